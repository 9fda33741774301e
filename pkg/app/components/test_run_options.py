import pytest

from app.components.run_options import (
    parse_int_list, validate_clamp, validate_n_list, validate_shot_list
)


def test_parse_int_list():
    assert parse_int_list("1000, 4000,16000") == [1000, 4000, 16000]
    assert parse_int_list("2") == [2]
    for text in ("", "1,,2", "1,a"):
        with pytest.raises(ValueError):
            parse_int_list(text)


def test_validate_n_list():
    assert validate_n_list([1, 2, 3]) == (True, None)
    is_valid, error_msg = validate_n_list([0, 2])
    assert not is_valid
    assert "[0]" in error_msg
    assert validate_n_list([])[0] is False


def test_validate_shot_list():
    assert validate_shot_list([1, 10]) == (True, None)
    assert validate_shot_list([100, 0])[0] is False
    assert validate_shot_list([])[0] is False


@pytest.mark.parametrize("value,ok", [(1e-10, True), (1e-3, True), (0.0, False), (-1e-8, False), (0.5, False)])
def test_validate_clamp(value, ok):
    assert validate_clamp(value)[0] is ok
