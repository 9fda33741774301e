from typing import List, Optional, Sequence, Tuple

import click

from config.settings import SUPPORTED_N


def parse_int_list(text: str) -> List[int]:
    """Parse "1000,4000" into [1000, 4000]"""
    items = [item.strip() for item in str(text).split(",")]
    if not items or any(not item for item in items):
        raise ValueError(f"expected comma-separated integers, got {text!r}")
    return [int(item) for item in items]


def validate_n_list(values: Sequence[int]) -> Tuple[bool, Optional[str]]:
    """
    Validate requested ququart counts

    Returns:
        (is_valid, error_message)
    """
    if not values:
        return False, "At least one N is required"
    bad = [n for n in values if n not in SUPPORTED_N]
    if bad:
        return False, f"Unsupported N {bad}. Allowed: {', '.join(map(str, SUPPORTED_N))}"
    return True, None


def validate_shot_list(values: Sequence[int]) -> Tuple[bool, Optional[str]]:
    if not values:
        return False, "At least one shot count is required"
    if any(m < 1 for m in values):
        return False, f"Shots per setup must be positive, got {list(values)}"
    return True, None


def validate_clamp(value: float) -> Tuple[bool, Optional[str]]:
    if not value > 0:
        return False, f"Probability clamp must be positive, got {value}"
    if value >= 1e-2:
        return False, f"Probability clamp {value} would distort the Fisher blocks (max 1e-2)"
    return True, None


# click callbacks --------------------------------------------------------

def _int_list(value, validator) -> List[int]:
    try:
        values = parse_int_list(value) if isinstance(value, str) else list(value)
    except ValueError as e:
        raise click.BadParameter(str(e))
    is_valid, error_msg = validator(values)
    if not is_valid:
        raise click.BadParameter(error_msg)
    return values


def n_list_callback(ctx, param, value) -> List[int]:
    return _int_list(value, validate_n_list)


def shot_list_callback(ctx, param, value) -> List[int]:
    return _int_list(value, validate_shot_list)


def clamp_callback(ctx, param, value: float) -> float:
    is_valid, error_msg = validate_clamp(value)
    if not is_valid:
        raise click.BadParameter(error_msg)
    return value
