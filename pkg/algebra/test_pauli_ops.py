import numpy as np
import pytest

from algebra.galois_core import get_ring
from algebra.pauli_ops import (
    MonomialLabel, commutation_phase, commuting_sets_enumerate,
    construction_mismatch, fourier_matrix, is_local, kron_all, local_fourier,
    local_x, max_disjoint_census, max_unitarity_error, monomial_matrix,
    operational_basis_check, operator_schmidt_rank, overlap_rule_violations,
    set_commutation_violations, set_overlap_analysis, single_ququart_set_rows, two_ququart_set_rows,
    to_tensor_order, x_matrix, z_matrix
)

TOL = 1e-10


def find_set(ctx, kind, param):
    for cs in commuting_sets_enumerate(ctx):
        if cs.kind == kind and cs.param == param:
            return cs
    raise KeyError((kind, param))


def test_single_ququart_z_and_x():
    ctx = get_ring(2, 1)
    np.testing.assert_allclose(z_matrix(ctx.one), np.diag([1, 1j, -1, -1j]), atol=TOL)
    np.testing.assert_allclose(x_matrix(ctx.one), local_x(4, 1), atol=TOL)
    np.testing.assert_allclose(z_matrix(ctx.zero), np.eye(4), atol=TOL)
    np.testing.assert_allclose(x_matrix(ctx.zero), np.eye(4), atol=TOL)
    # |0> -> |1>
    assert x_matrix(ctx.one)[1, 0] == 1


def test_x_is_additive():
    ctx = get_ring(2, 2)
    rng = np.random.default_rng(3)
    for a, b in rng.integers(0, ctx.size, size=(10, 2)):
        da, db = ctx.from_index(int(a)), ctx.from_index(int(b))
        np.testing.assert_allclose(x_matrix(da) @ x_matrix(db), x_matrix(da + db), atol=TOL)


def test_commutation_sign():
    ctx = get_ring(2, 1)
    Z, X = z_matrix(ctx.one), x_matrix(ctx.one)
    np.testing.assert_allclose(X @ Z, -1j * Z @ X, atol=TOL)


@pytest.mark.parametrize("N", [1, 2])
def test_commutation_relation_all_pairs(N):
    ctx = get_ring(2, N)
    for g in list(ctx)[::3]:
        for d in list(ctx)[::5]:
            phase = 1j ** (g * d).trace()
            np.testing.assert_allclose(
                z_matrix(g) @ x_matrix(d), phase * x_matrix(d) @ z_matrix(g), atol=TOL
            )


def test_monomial_with_zero_gamma_is_x():
    ctx = get_ring(2, 2)
    np.testing.assert_allclose(
        monomial_matrix(MonomialLabel(ctx.zero, ctx.xi)), x_matrix(ctx.xi), atol=TOL
    )


def test_operational_basis_single_ququart():
    assert operational_basis_check(get_ring(2, 1)) < TOL


def test_operational_basis_two_ququarts_sampled():
    assert operational_basis_check(get_ring(2, 2), sample=48, seed=1) < TOL


@pytest.mark.parametrize("N", [1, 2])
def test_ring_and_tensor_constructions_agree(N):
    assert construction_mismatch(get_ring(2, N)) < TOL


@pytest.mark.slow
def test_ring_and_tensor_constructions_agree_three_ququarts():
    assert construction_mismatch(get_ring(2, 3), sample=12, seed=5) < TOL


def test_fourier_single_ququart():
    F = fourier_matrix(get_ring(2, 1))
    j, k = np.meshgrid(range(4), range(4), indexing="ij")
    np.testing.assert_allclose(F, 1j ** (j * k) / 2, atol=TOL)
    assert max_unitarity_error(F) < 1e-12


@pytest.mark.parametrize("N", [1, 2])
def test_fourier_conjugates_z_into_x(N):
    ctx = get_ring(2, N)
    F = fourier_matrix(ctx)
    for d in ctx:
        np.testing.assert_allclose(F.conj().T @ z_matrix(d) @ F, x_matrix(d), atol=TOL)


def test_fourier_factorizes_with_self_dual_basis():
    ctx = get_ring(2, 3)
    assert ctx.working_basis.kind == "self-dual"
    F = to_tensor_order(fourier_matrix(ctx), ctx)
    np.testing.assert_allclose(F, kron_all([local_fourier(4)] * 3), atol=TOL)


def test_fourier_is_not_local_for_two_ququarts():
    ctx = get_ring(2, 2)
    F = to_tensor_order(fourier_matrix(ctx), ctx)
    assert operator_schmidt_rank(F, (4, 4)) > 1
    assert not is_local(F, (4, 4))


def test_operator_schmidt_rank():
    rng = np.random.default_rng(0)
    A = rng.normal(size=(4, 4))
    B = rng.normal(size=(4, 4))
    assert operator_schmidt_rank(np.kron(A, B), (4, 4)) == 1
    assert operator_schmidt_rank(np.kron(A, B), (4, 4), site=1) == 1
    cnot = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
    assert operator_schmidt_rank(cnot, (2, 2)) == 2


def test_commuting_set_counts():
    assert len(commuting_sets_enumerate(get_ring(2, 1))) == 6
    sets = commuting_sets_enumerate(get_ring(2, 2))
    assert len(sets) == 20
    assert all(len(cs.members) == 16 for cs in sets)
    assert all(MonomialLabel(cs.param.ctx.zero, cs.param.ctx.zero) in cs.member_set() for cs in sets)


@pytest.mark.parametrize("N", [1, 2])
def test_sets_cover_every_monomial(N):
    ctx = get_ring(2, N)
    covered = set()
    for cs in commuting_sets_enumerate(ctx):
        covered |= cs.member_set()
    assert len(covered) == ctx.size ** 2


def test_sets_commute_internally():
    for cs in commuting_sets_enumerate(get_ring(2, 1)):
        assert set_commutation_violations(cs) == 0
    for cs in commuting_sets_enumerate(get_ring(2, 2))[::7]:
        assert set_commutation_violations(cs) == 0


def test_commutation_phase_between_sets():
    ctx = get_ring(2, 1)
    z = MonomialLabel(ctx.one, ctx.zero)
    x = MonomialLabel(ctx.zero, ctx.one)
    # Z X = i X Z
    assert commutation_phase(z, x) == 1


def test_single_ququart_set_rows():
    rows = single_ququart_set_rows()
    expected = [
        [(k, 0) for k in range(4)],
        [(k, k) for k in range(4)],
        [(k, 2 * k % 4) for k in range(4)],
        [(k, 3 * k % 4) for k in range(4)],
        [(0, k) for k in range(4)],
        [(2 * k % 4, k) for k in range(4)],
    ]
    assert [row["members"] for row in rows] == expected
    assert [row["set"] for row in rows] == [
        "ray:(0)", "ray:(1)", "ray:(2)", "ray:(3)", "ideal:(0)", "ideal:(2)"
    ]


def test_overlap_examples():
    ctx = get_ring(2, 2)
    shared = set_overlap_analysis(find_set(ctx, "ray", ctx.zero), find_set(ctx, "ray", ctx.const(2)))
    two_xi_sq = 2 * ctx.xi ** 2
    assert set(shared) == {
        MonomialLabel(ctx.zero, ctx.zero),
        MonomialLabel(ctx.const(2), ctx.zero),
        MonomialLabel(2 * ctx.xi, ctx.zero),
        MonomialLabel(two_xi_sq, ctx.zero),
    }

    z4 = get_ring(2, 1)
    shared = set_overlap_analysis(find_set(z4, "ray", z4.one), find_set(z4, "ideal", z4.zero))
    assert shared == [MonomialLabel(z4.zero, z4.zero)]

    shared = set_overlap_analysis(find_set(z4, "ideal", z4.zero), find_set(z4, "ideal", z4.const(2)))
    assert MonomialLabel(z4.zero, z4.const(2)) in shared


@pytest.mark.parametrize("N", [1, 2])
def test_overlap_rules(N):
    assert overlap_rule_violations(get_ring(2, N)) == 0


def test_two_ququart_set_rows():
    rows = two_ququart_set_rows()
    assert len(rows) == 5
    assert rows[0]["sets"] == ["ray:(0,0)", "ray:(2,0)", "ray:(0,2)", "ray:(2,2)"]
    assert rows[0]["shared"] == sorted(["Z(2,0)X(0,0)", "Z(0,2)X(0,0)", "Z(2,2)X(0,0)"])
    assert len(rows[-1]["sets"]) == 4
    assert rows[-1]["shared"] == sorted(["Z(0,0)X(2,0)", "Z(0,0)X(0,2)", "Z(0,0)X(2,2)"])


@pytest.mark.parametrize("N,size,count", [(1, 3, 8), (2, 5, 1024)])
def test_disjoint_census(N, size, count):
    census = max_disjoint_census(get_ring(2, N))
    assert census["max_size"] == size == census["expected_size"]
    assert census["count"] == count == census["expected_count"]
