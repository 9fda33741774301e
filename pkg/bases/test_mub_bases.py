import numpy as np
import pytest

from algebra.galois_core import get_ring
from algebra.pauli_ops import fourier_matrix, local_fourier, max_unitarity_error
from bases.fixtures import OMEGA_BAR, fixtures_single_ququart
from bases.mub_bases import (
    class_projectors, cnot4, cnot4_check, completeness_check,
    expected_overlaps, factorization_census, fourier_factorization,
    get_family, get_phase_context, ideal_basis, is_product_basis,
    match_up_to_phase, overlap_verify, phase_c, phase_equation_check,
    redundancy_projector_check, rotation_V, spectral_check, unbiased_census,
    validate_fixtures, verify_suite
)
from utils.errors import DimensionError

TOL = 1e-10
OMEGA = np.exp(2j * np.pi / 8)


def test_phase_examples():
    ctx = get_ring(2, 1)
    for a in ctx:
        assert phase_c(ctx.zero, a) == pytest.approx(1)
        assert phase_c(a, ctx.zero) == pytest.approx(1)
    assert phase_c(ctx.one, ctx.one) == pytest.approx(OMEGA ** 7)
    assert phase_c(ctx.const(2), ctx.one) == pytest.approx(-1)


def test_rotation_examples():
    ctx = get_ring(2, 1)
    np.testing.assert_allclose(rotation_V(ctx.zero), np.eye(4), atol=TOL)
    column = rotation_V(ctx.one)[:, 0]
    np.testing.assert_allclose(column, np.array([OMEGA_BAR, 1, -OMEGA_BAR, 1]) / 2, atol=TOL)


def test_ideal_zero_is_inverse_fourier():
    ctx = get_ring(2, 2)
    np.testing.assert_allclose(ideal_basis(ctx.zero), fourier_matrix(ctx).conj().T, atol=TOL)


def test_family_sizes():
    assert len(get_family(1)) == 6
    fam = get_family(2)
    assert len(fam) == 20
    assert fam.labels()[0] == "ray:(0,0)"
    assert fam.labels()[-4:] == ["ideal:(0,0)", "ideal:(2,0)", "ideal:(0,2)", "ideal:(2,2)"]
    assert fam.stacked().shape == (20, 16, 16)
    assert get_family(2) is fam


@pytest.mark.parametrize("N", [1, 2])
def test_phase_functional_equation(N):
    assert phase_equation_check(get_phase_context(get_ring(2, N))) < 1e-12


@pytest.mark.parametrize("N", [1, 2])
def test_family_laws(N):
    fam = get_family(N)
    assert max(max_unitarity_error(U) for _, _, U in fam.setups()) < 1e-12
    assert spectral_check(fam) < TOL
    assert completeness_check(fam) < TOL
    assert overlap_verify(fam) < TOL
    assert redundancy_projector_check(fam) < TOL


def test_single_ququart_overlaps():
    fam = get_family(1)
    ctx = fam.ctx
    ray1, ideal0, ideal2 = ("ray", ctx.one), ("ideal", ctx.zero), ("ideal", ctx.const(2))

    overlaps = np.abs(fam.basis(*ray1).conj().T @ fam.basis(*ideal0)) ** 2
    np.testing.assert_allclose(overlaps, np.full((4, 4), 0.25), atol=TOL)

    overlaps = np.abs(fam.basis(*ideal0).conj().T @ fam.basis(*ideal2)) ** 2
    half = np.array([[1, 0, 1, 0], [0, 1, 0, 1], [1, 0, 1, 0], [0, 1, 0, 1]]) / 2
    np.testing.assert_allclose(overlaps, half, atol=TOL)
    np.testing.assert_allclose(expected_overlaps(fam, ideal0, ideal2), half)

    # rays 0 and 2 share a bar class
    overlaps = np.abs(fam.basis("ray", ctx.zero).conj().T @ fam.basis("ray", ctx.const(2))) ** 2
    np.testing.assert_allclose(overlaps, half, atol=TOL)


def test_class_projectors_partition_identity():
    fam = get_family(2)
    projectors = class_projectors(fam, "ray", fam.ctx.xi)
    assert len(projectors) == 4
    np.testing.assert_allclose(sum(projectors.values()), np.eye(16), atol=TOL)


def test_unbiased_census_single_ququart():
    census = unbiased_census(get_family(1))
    assert census["max_size"] == 3
    assert census["count"] == 8
    assert census["printed_count"] == 6


def test_unbiased_census_two_ququarts():
    census = unbiased_census(get_family(2))
    assert census["max_size"] == 5
    assert census["count"] == 4 ** 5


def test_factorization_census_two_ququarts():
    census = factorization_census(get_family(2))
    # 0, 2, xi + 3 xi^2 and 3 xi + xi^2
    assert sorted(census["ray"]) == ["ray:(0,0)", "ray:(1,2)", "ray:(2,0)", "ray:(3,2)"]
    assert len(census["ideal"]) == 2


def test_is_product_basis():
    ctx = get_ring(2, 2)
    assert is_product_basis(np.eye(16), ctx)
    # characters factorize over coordinates even though F does not
    assert is_product_basis(fourier_matrix(ctx), ctx)
    assert not is_product_basis(rotation_V(ctx.xi), ctx)


def test_fourier_factorization():
    report = fourier_factorization(get_ring(2, 3))
    assert report["self_dual"]
    assert report["distance"] < TOL
    assert report["schmidt_ranks"] == [1, 1, 1]

    report = fourier_factorization(get_ring(2, 2))
    assert not report["self_dual"]
    assert report["distance"] > 1e-3
    assert all(rank > 1 for rank in report["schmidt_ranks"])


def test_fixtures_are_orthonormal():
    for name, B in fixtures_single_ququart().items():
        assert max_unitarity_error(B) < 1e-12, name


def test_fixture_validation():
    results = {r["fixture"]: r for r in validate_fixtures()}
    expected = {
        "i": ("printed", "plain", "ray:(0)", "ray:(0)"),
        "ii": ("printed", "conjugate", "ray:(1)", "ray:(3)"),
        "iii": ("printed", "plain", "ray:(2)", "ray:(2)"),
        "iv": ("printed", "conjugate", "ray:(3)", "ray:(1)"),
        "v": ("swapped", "plain", "ideal:(0)", "ideal:(0)"),
        "vi": ("swapped", "plain", "ideal:(2)", "ideal:(2)"),
    }
    for name, (header, convention, held, matched) in expected.items():
        result = results[name]
        assert result["holds"] == {"header": header, "convention": convention, "set": held}, name
        assert result["matched"] == matched, name
        assert result["match_error"] < TOL


def test_fixture_validation_needs_single_ququart():
    with pytest.raises(DimensionError):
        validate_fixtures(get_family(2))


def test_match_up_to_phase_ignores_phases_and_order():
    U = rotation_V(get_ring(2, 1).one)
    B = U[:, [2, 0, 3, 1]] * np.exp(1j * np.array([0.3, 1.1, -2.0, 0.7]))
    assert match_up_to_phase(B, U) < TOL
    assert match_up_to_phase(np.eye(4), U) > 0.1


def test_cnot4():
    gate = cnot4()
    assert gate.shape == (16, 16)
    assert max_unitarity_error(gate) < 1e-12
    np.testing.assert_allclose(np.linalg.matrix_power(gate, 4), np.eye(16), atol=TOL)


def test_cnot4_check():
    rows = cnot4_check()
    assert len(rows) == 16
    zero = next(r for r in rows if r["lambda"] == "(0,0)")
    assert zero["cnot_power"] == 0
    assert zero["schmidt_rank_V"] == 1
    assert zero["witness"] < 1e-8
    for row in rows:
        if row["product_basis"]:
            assert row["cnot_power"] == 0
            assert row["schmidt_rank_cnot"] == 1

    # CNOT^p sends |k~>|j> to |k~>|j + p k>
    F_inv = local_fourier(4).conj().T
    gate = cnot4()
    for coordinates in ([1, 0], [1, 1], [3, 2]):
        row = next(r for r in rows if r["coordinates"] == coordinates)
        power = row["cnot_power"]
        assert power == sum(coordinates) % 4
        G = np.linalg.matrix_power(gate, power)
        for k in range(4):
            for j in range(4):
                source = np.kron(F_inv[:, k], np.eye(4)[j])
                target = np.kron(F_inv[:, k], np.eye(4)[(j + power * k) % 4])
                np.testing.assert_allclose(G @ source, target, atol=TOL)


def test_cnot4_check_needs_two_ququarts():
    with pytest.raises(DimensionError):
        cnot4_check(get_family(1))


def test_verify_suite_single_ququart():
    report = verify_suite(1)
    assert "fixtures" in report
    assert all(value <= TOL for value in report.values()), report


@pytest.mark.slow
def test_verify_suite_two_ququarts():
    report = verify_suite(2)
    assert all(value <= TOL for value in report.values()), report
