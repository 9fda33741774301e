import numpy as np
import pytest

from algebra.galois_core import (
    GR42_TWO_ADIC_EXPANSIONS, TwoAdic, bar_map, dual_basis, elem_arith, enumerate_subsets,
    frobenius, frobenius_trace, get_ring, hensel_compatible, hensel_lift,
    lift_table, lift_teichmuller, ring_context_new, self_dual_basis_search,
    two_adic_expansion_rows, two_adic_compose
)
from utils.errors import RingMismatchError, RingSpecError

SMALL_RINGS = [(1, 1), (1, 2), (1, 3), (1, 4), (2, 1), (2, 2), (2, 3), (3, 1), (3, 2)]


def test_default_polynomials():
    assert get_ring(2, 2).poly == (1, 1, 1)
    assert get_ring(2, 3).poly == (3, 2, 3, 1)
    assert get_ring(3, 3).poly == (7, 2, 3, 1)
    assert get_ring(1, 1).poly == (1, 1)
    assert get_ring(2, 2).size == 16
    assert get_ring(2, 3).size == 64


def test_get_ring_is_shared():
    assert get_ring(2, 2) is get_ring(2, 2)
    assert get_ring(2, 2) is get_ring(2, 2, [1, 1, 1])


def test_hensel_lift_examples():
    assert hensel_lift((1, 1, 1), 1) == (1, 1, 1)
    assert hensel_lift((1, 1, 1), 2) == (1, 1, 1)
    assert hensel_lift((1, 0, 1, 1), 1) == (3, 2, 3, 1)
    assert hensel_lift((3, 2, 3, 1), 2) == (7, 2, 3, 1)
    assert hensel_lift((1, 1), 1) == (3, 1)


def test_hensel_lift_rejects_non_monic():
    with pytest.raises(RingSpecError):
        hensel_lift((1, 1, 0), 1)


@pytest.mark.parametrize("s,N", [(1, 1), (1, 2), (1, 3), (2, 1), (2, 2), (2, 3)])
def test_hensel_trace_compatibility(s, N):
    assert hensel_compatible(get_ring(s, N)) == 0


def test_gr42_arithmetic():
    ctx = get_ring(2, 2)
    xi = ctx.xi
    assert xi * xi ** 2 == 1
    assert xi + xi ** 2 == 3
    assert elem_arith("mul", xi, elem_arith("pow", xi, 2)) == ctx.one
    for a in ctx:
        assert a + (-a) == ctx.zero


def test_trace_examples():
    gf4 = get_ring(1, 2)
    assert frobenius_trace(gf4.xi * gf4.xi) == 1

    ctx = get_ring(2, 2)
    xi = ctx.xi
    assert frobenius_trace(xi * xi) == 3
    assert frobenius_trace(xi * xi * xi) == 2
    assert frobenius_trace(ctx.one) == 2
    assert frobenius_trace(xi, which="bar-composed") == 1


def test_mixed_contexts_rejected():
    with pytest.raises(RingMismatchError):
        get_ring(2, 2).xi + get_ring(1, 2).xi


@pytest.mark.parametrize("s,N,poly", [
    (1, 2, [1, 0, 1]),   # x^2 + 1 = (x + 1)^2
    (2, 1, [1, 1]),      # root -1 fails xi^1 = 1
    (2, 2, [1, 1, 2]),   # not monic
    (2, 2, [1, 1]),      # wrong length
])
def test_ring_context_rejects(s, N, poly):
    with pytest.raises(RingSpecError):
        ring_context_new(s, N, poly)


def test_ring_context_rejects_out_of_range():
    with pytest.raises(RingSpecError):
        ring_context_new(4, 2)
    with pytest.raises(RingSpecError):
        ring_context_new(2, 9)


def test_bar_map_examples():
    z4 = get_ring(2, 1)
    assert bar_map(z4.const(3)) == get_ring(1, 1).one

    ctx = get_ring(2, 2)
    assert bar_map(1 + 2 * ctx.xi) == get_ring(1, 2).one
    assert bar_map(2 * ctx.xi) == get_ring(1, 2).zero


def test_two_adic_examples():
    ctx = get_ring(2, 2)
    assert ctx.const(3).two_adic() == TwoAdic((0, 0))
    assert (1 + 2 * ctx.xi).two_adic() == TwoAdic((0, 1))
    assert ctx.zero.two_adic() == TwoAdic((None, None))
    assert not (2 * ctx.xi).two_adic().is_unit
    assert (1 + 2 * ctx.xi).coordinates() == (1, 3)


@pytest.mark.parametrize("s,N", SMALL_RINGS)
def test_two_adic_round_trip(s, N):
    ctx = get_ring(s, N)
    for a in ctx:
        assert two_adic_compose(ctx, a.two_adic()) == a


def test_dual_basis_gr42():
    ctx = get_ring(2, 2)
    xi = ctx.xi
    basis = ctx.working_basis
    assert basis.kind == "dual-pair"
    assert basis.elems == (xi, xi ** 2)
    assert basis.dual_elems == (3 * xi + 2 * xi ** 2, 2 * xi + 3 * xi ** 2)
    np.testing.assert_array_equal(basis.gram(), [[3, 2], [2, 3]])


def test_dual_of_self_dual_is_itself():
    gf4 = get_ring(1, 2)
    assert dual_basis(gf4.power_basis()).kind == "self-dual"
    assert gf4.working_basis.elems == (gf4.xi, gf4.xi ** 2)

    gr43 = get_ring(2, 3)
    assert dual_basis(gr43.working_basis).dual_elems == gr43.working_basis.elems


def test_self_dual_search():
    gr43 = get_ring(2, 3)
    found = self_dual_basis_search(gr43)
    xi = gr43.xi
    assert found is not None
    assert found.elems == (xi + 2 * xi ** 2, xi ** 2 + 2 * xi ** 4, xi ** 4 + 2 * xi)

    assert self_dual_basis_search(get_ring(2, 2)) is None

    gf8 = get_ring(1, 3)
    assert gf8.working_basis.elems == (gf8.xi, gf8.xi ** 2, gf8.xi ** 4)


def test_self_dual_search_needs_backtracking_in_gf16():
    gf16 = get_ring(1, 4)
    basis = gf16.working_basis
    assert basis.kind == "self-dual"
    np.testing.assert_array_equal(basis.gram(), np.eye(4, dtype=int))


@pytest.mark.parametrize("s,N", SMALL_RINGS)
def test_coordinate_identity(s, N):
    ctx = get_ring(s, N)
    basis = ctx.working_basis.elems
    for a in ctx:
        total = ctx.zero
        for k, theta in zip(a.coordinates(), basis):
            total = total + k * theta
        assert total == a


def test_two_adic_expansions():
    ctx = get_ring(2, 2)
    rows = dict(two_adic_expansion_rows())
    assert len(rows) == 16
    for digits, expansion in GR42_TWO_ADIC_EXPANSIONS:
        assert rows[digits] == expansion
        element = two_adic_compose(ctx, TwoAdic(digits))
        assert element.coordinates() == expansion


def test_lift_teichmuller():
    z4 = get_ring(2, 1)
    z8 = get_ring(3, 1)
    assert lift_teichmuller(z4.const(3)) == z8.const(3)
    assert lift_teichmuller(z4.zero) == z8.zero

    ctx = get_ring(2, 2)
    lifted = lift_teichmuller(ctx.xi)
    assert lifted == ctx.lifted.xi
    assert lifted ** 3 == 1


@pytest.mark.parametrize("s,N", [(1, 2), (2, 1), (2, 2), (2, 3)])
def test_lift_reduces_back(s, N):
    ctx = get_ring(s, N)
    table = lift_table(ctx)
    reduced = (ctx.lifted.elements[table] % ctx.q) @ ctx.weights
    np.testing.assert_array_equal(reduced, np.arange(ctx.size))
    for a in list(ctx)[:16]:
        assert lift_teichmuller(a).index == table[a.index]


def test_subsets():
    ctx = get_ring(2, 2)
    assert len(enumerate_subsets(ctx, "ideal2")) == 4
    assert len(enumerate_subsets(ctx, "units")) == 12
    assert len(enumerate_subsets(ctx, "teichmuller")) == 4
    classes = enumerate_subsets(ctx, "bar-classes")
    assert len(classes) == 4
    assert all(len(members) == 4 for members in classes.values())

    z4 = get_ring(2, 1)
    assert enumerate_subsets(z4, "ideal2") == [z4.zero, z4.const(2)]


@pytest.mark.parametrize("s,N", SMALL_RINGS)
def test_trace_is_additive(s, N):
    ctx = get_ring(s, N)
    T = ctx.trace_table
    expected = (T[:, None] + T[None, :]) % ctx.q
    np.testing.assert_array_equal(T[ctx.add_table], expected)


@pytest.mark.parametrize("s,N", [(1, 3), (2, 2), (2, 3)])
def test_frobenius_is_automorphism(s, N):
    ctx = get_ring(s, N)
    elems = list(ctx)
    for a in elems[::3]:
        image = a
        for _ in range(N):
            image = frobenius(image)
        assert image == a
        for b in elems[::5]:
            assert frobenius(a * b) == frobenius(a) * frobenius(b)
            assert frobenius(a + b) == frobenius(a) + frobenius(b)


@pytest.mark.parametrize("s,N", [(2, 1), (2, 2), (2, 3), (3, 2)])
def test_bar_is_homomorphism(s, N):
    ctx = get_ring(s, N)
    field = ctx.bar_field
    bars = ctx.bar_table
    np.testing.assert_array_equal(bars[ctx.mul_table], field.mul_table[bars[:, None], bars[None, :]])
    np.testing.assert_array_equal(bars[ctx.add_table], field.add_table[bars[:, None], bars[None, :]])
    assert sorted(bars[ctx.teichmuller]) == list(range(2 ** N))


def test_tensor_order_is_permutation():
    ctx = get_ring(2, 2)
    order = ctx.tensor_order
    assert sorted(order) == list(range(16))
    # (k0, k1) = (1, 0) is xi, at tensor index 4
    assert order[4] == ctx.xi.index


def test_describe():
    assert get_ring(2, 2).describe() == "GR(4,2); poly=[1,1,1]; basis=[(0,1),(3,3)]"
