"""
Exact arithmetic for GF(2^N) and the Galois rings GR(2^s, N).

Elements use the additive representation a_1 + a_2 xi + ... + a_N xi^(N-1)
with coefficients in Z_q, q = 2^s. The canonical index of an element is its
coefficient vector read as a base-q integer, first coefficient least
significant; every matrix built elsewhere is indexed in this order.

Polynomials are ascending coefficient lists [c0, c1, ..., cN].
"""
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from sympy import Matrix

from config.settings import MAX_EXHAUSTIVE_SN, MAX_TABLE_N, SUPPORTED_S
from utils.errors import DualBasisError, RingMismatchError, RingSpecError

logger = logging.getLogger(__name__)

# Primitive polynomials over Z_2, ascending coefficients
PRIMITIVE_Z2 = {
    1: (1, 1),
    2: (1, 1, 1),
    3: (1, 0, 1, 1),
    4: (1, 1, 0, 0, 1),
    5: (1, 0, 1, 0, 0, 1),
    6: (1, 1, 0, 0, 0, 0, 1),
    7: (1, 1, 0, 0, 0, 0, 0, 1),
    8: (1, 0, 1, 1, 1, 0, 0, 0, 1),
}

# GR(4,2) rows: 2-adic digits (a, b) of a + 2b -> coordinates in {xi, xi^2}.
# Digits are Teichmuller exponents, None stands for the zero digit.
GR42_TWO_ADIC_EXPANSIONS = (
    ((None, None), (0, 0)), ((1, None), (1, 0)),
    ((None, 0), (2, 2)), ((1, 0), (3, 2)),
    ((None, 1), (2, 0)), ((1, 1), (3, 0)),
    ((None, 2), (0, 2)), ((1, 2), (1, 2)),
    ((0, None), (3, 3)), ((2, None), (0, 1)),
    ((0, 0), (1, 1)), ((2, 0), (2, 3)),
    ((0, 1), (1, 3)), ((2, 1), (2, 1)),
    ((0, 2), (3, 1)), ((2, 2), (0, 3)),
)

Poly = Tuple[int, ...]

# Generators tried for a self-dual Frobenius orbit when exhaustive search is off
ORBIT_SCAN_LIMIT = 4096


# ----------------------------------------------------------------------
# Polynomial helpers
# ----------------------------------------------------------------------

def _gf2_mask(poly: Sequence[int]) -> int:
    return sum((c & 1) << i for i, c in enumerate(poly))


def _gf2_mod(a: int, b: int) -> int:
    deg_b = b.bit_length() - 1
    while a and a.bit_length() - 1 >= deg_b:
        a ^= b << (a.bit_length() - 1 - deg_b)
    return a


def is_irreducible_gf2(poly: Sequence[int]) -> bool:
    """Irreducibility over Z_2 by exhaustive trial division"""
    f = _gf2_mask(poly)
    degree = f.bit_length() - 1
    if degree < 1:
        return False
    for d in range(1, degree // 2 + 1):
        for g in range(1 << d, 1 << (d + 1)):
            if _gf2_mod(f, g) == 0:
                return False
    return True


def hensel_lift(poly: Sequence[int], s: int) -> Poly:
    """
    Lift a basic irreducible polynomial from Z_{2^s}[x] to Z_{2^{s+1}}[x]

    Graeffe step: f'(x^2) = (-1)^N f(x) f(-x). The product only depends on
    f modulo 2^s up to multiples of 2^{s+1}, so the result is the unique
    monic lift whose roots are Teichmuller elements.

    Args:
        poly: Ascending coefficients of a monic polynomial over Z_{2^s}
        s: Current exponent of the characteristic

    Returns:
        Ascending coefficients over Z_{2^{s+1}}
    """
    f = [int(c) for c in poly]
    if len(f) < 2 or f[-1] % (2 ** s) != 1:
        raise RingSpecError(f"hensel_lift needs a monic polynomial, got {list(poly)}")
    if not is_irreducible_gf2(f):
        raise RingSpecError(f"bar polynomial of {list(poly)} is reducible")

    degree = len(f) - 1
    f_neg = [c * (-1) ** k for k, c in enumerate(f)]
    h = np.convolve(np.array(f, dtype=object), np.array(f_neg, dtype=object))
    modulus = 2 ** (s + 1)
    sign = (-1) ** degree
    lifted = tuple(int(sign * h[2 * k]) % modulus for k in range(degree + 1))

    if lifted[-1] != 1 or any((a - b) % (2 ** s) for a, b in zip(lifted, f)):
        raise RingSpecError(f"Hensel lift of {list(poly)} failed verification")
    return lifted


def default_polynomial(s: int, N: int) -> Poly:
    """Built-in primitive polynomial lifted to Z_{2^s}"""
    if N not in PRIMITIVE_Z2:
        raise RingSpecError(f"no built-in polynomial for N={N} (max {MAX_TABLE_N})")
    poly = PRIMITIVE_Z2[N]
    for level in range(1, s):
        poly = hensel_lift(poly, level)
    return tuple(poly)


# ----------------------------------------------------------------------
# Data types
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class TwoAdic:
    """Digits of a = t_1 + 2 t_2 + 4 t_3, each a Teichmuller exponent or None"""

    parts: Tuple[Optional[int], ...]

    @property
    def is_unit(self) -> bool:
        return self.parts[0] is not None

    def __str__(self) -> str:
        terms = []
        for level, k in enumerate(self.parts):
            if k is None:
                continue
            base = "1" if k == 0 else ("xi" if k == 1 else f"xi^{k}")
            terms.append(base if level == 0 else f"{2 ** level}*{base}")
        return " + ".join(terms) if terms else "0"


class RingElem:
    """One element of a RingContext in additive representation"""

    __slots__ = ("ctx", "coeffs")

    def __init__(self, ctx: "RingContext", coeffs: Sequence[int]):
        if len(coeffs) != ctx.N:
            raise RingSpecError(f"expected {ctx.N} coefficients, got {len(coeffs)}")
        self.ctx = ctx
        self.coeffs = tuple(int(c) % ctx.q for c in coeffs)

    # -- identity ---------------------------------------------------------
    @property
    def index(self) -> int:
        return sum(c * self.ctx.q ** i for i, c in enumerate(self.coeffs))

    def __int__(self) -> int:
        return self.index

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            return self == self.ctx.const(other)
        if not isinstance(other, RingElem):
            return NotImplemented
        return self.ctx.key == other.ctx.key and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash((self.ctx.key, self.coeffs))

    def __repr__(self) -> str:
        return "(" + ",".join(str(c) for c in self.coeffs) + ")"

    # -- arithmetic -------------------------------------------------------
    def _coerce(self, other) -> "RingElem":
        if isinstance(other, int):
            return self.ctx.const(other)
        if not isinstance(other, RingElem):
            raise TypeError(f"unsupported operand {type(other).__name__}")
        if other.ctx.key != self.ctx.key:
            raise RingMismatchError(
                f"operands from {self.ctx.name} and {other.ctx.name}"
            )
        return other

    def __add__(self, other) -> "RingElem":
        other = self._coerce(other)
        return RingElem(self.ctx, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    __radd__ = __add__

    def __sub__(self, other) -> "RingElem":
        other = self._coerce(other)
        return RingElem(self.ctx, [a - b for a, b in zip(self.coeffs, other.coeffs)])

    def __rsub__(self, other) -> "RingElem":
        return self._coerce(other) - self

    def __neg__(self) -> "RingElem":
        return RingElem(self.ctx, [-a for a in self.coeffs])

    def __mul__(self, other) -> "RingElem":
        if isinstance(other, int):
            return RingElem(self.ctx, [a * other for a in self.coeffs])
        other = self._coerce(other)
        return RingElem(self.ctx, self.ctx._mul_coeffs(self.coeffs, other.coeffs))

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "RingElem":
        if exponent < 0:
            raise ValueError("negative powers are not supported")
        return RingElem(self.ctx, self.ctx._pow_coeffs(self.coeffs, exponent))

    # -- maps -------------------------------------------------------------
    def trace(self) -> int:
        return self.ctx.trace_of(self.coeffs)

    def frobenius(self, times: int = 1) -> "RingElem":
        return self.ctx.frobenius(self, times)

    def bar(self) -> "RingElem":
        return bar_map(self)

    def two_adic(self) -> TwoAdic:
        return teichmuller_and_two_adic(self)

    def coordinates(self) -> Tuple[int, ...]:
        """k_j = T(alpha theta*_j) in the working basis"""
        return tuple((self * d).trace() for d in self.ctx.working_basis.dual_elems)

    def is_unit(self) -> bool:
        return any(c % 2 for c in self.coeffs)


@dataclass(frozen=True)
class RingBasis:
    """Basis {theta_i} together with its trace-dual partner"""

    elems: Tuple[RingElem, ...]
    kind: str  # plain | dual-pair | self-dual
    partner: Optional[Tuple[RingElem, ...]] = None

    @property
    def dual_elems(self) -> Tuple[RingElem, ...]:
        if self.kind == "self-dual":
            return self.elems
        if self.partner is None:
            raise DualBasisError("plain basis has no dual attached")
        return self.partner

    def gram(self) -> np.ndarray:
        return np.array([[(a * b).trace() for b in self.elems] for a in self.elems])


# ----------------------------------------------------------------------
# Ring context
# ----------------------------------------------------------------------

class RingContext:
    """
    Immutable description of GR(2^s, N) (GF(2^N) when s = 1)

    Cheap invariants (polynomial checks, trace of the power basis, working
    basis) are computed on construction; whole-ring tables are built lazily.
    """

    def __init__(self, s: int, N: int, poly: Sequence[int]):
        self.s = s
        self.N = N
        self.q = 2 ** s
        self.size = self.q ** N
        self.poly: Poly = tuple(int(c) for c in poly)
        self.key = (s, N, self.poly)
        self.name = f"GR({self.q},{N})"

        self._reduced = self._reduced_powers()
        self.xi = RingElem(self, self._xi_coeffs())
        self._frob = np.array(
            [self._pow_coeffs(self.xi.coeffs, 2 * i) for i in range(N)], dtype=np.int64
        )
        self._check_root_order()
        self._trace_powers = self._compute_trace_powers()
        self.working_basis = self._choose_working_basis()

    # -- construction helpers --------------------------------------------
    def _reduced_powers(self) -> np.ndarray:
        """Rows xi^0 .. xi^(2N-2) reduced modulo poly"""
        N, q = self.N, self.q
        rows = np.zeros((max(2 * N - 1, 1), N), dtype=np.int64)
        tail = np.array([-c % q for c in self.poly[:N]], dtype=np.int64)
        current = np.zeros(N, dtype=np.int64)
        current[0] = 1
        for k in range(rows.shape[0]):
            rows[k] = current
            carry = current[-1]
            shifted = np.zeros(N, dtype=np.int64)
            shifted[1:] = current[:-1]
            current = (shifted + carry * tail) % q
        return rows

    def _xi_coeffs(self) -> Tuple[int, ...]:
        if self.N == 1:
            return ((-self.poly[0]) % self.q,)
        return tuple(1 if i == 1 else 0 for i in range(self.N))

    def _mul_coeffs(self, a: Sequence[int], b: Sequence[int]) -> Tuple[int, ...]:
        conv = np.convolve(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64))
        return tuple(int(c) for c in (conv @ self._reduced) % self.q)

    def _pow_coeffs(self, a: Sequence[int], exponent: int) -> Tuple[int, ...]:
        result = tuple(1 if i == 0 else 0 for i in range(self.N))
        base = tuple(a)
        while exponent:
            if exponent & 1:
                result = self._mul_coeffs(result, base)
            base = self._mul_coeffs(base, base)
            exponent >>= 1
        return result

    def _check_root_order(self) -> None:
        order = 2 ** self.N - 1
        if self._pow_coeffs(self.xi.coeffs, order) != self.one.coeffs:
            raise RingSpecError(
                f"root of {list(self.poly)} fails xi^{order} = 1 in {self.name}"
            )

    def _compute_trace_powers(self) -> np.ndarray:
        values = np.zeros(self.N, dtype=np.int64)
        for i in range(self.N):
            total = np.zeros(self.N, dtype=np.int64)
            for j in range(self.N):
                total += self._pow_coeffs(self.xi.coeffs, i * 2 ** j)
            total %= self.q
            if np.any(total[1:]):
                raise RingSpecError(f"trace of xi^{i} is not in Z_{self.q}")
            values[i] = total[0]
        return values

    def _choose_working_basis(self) -> RingBasis:
        if self.s == 1 or self.N % 2 == 1:
            found = self_dual_basis_search(self)
            if found is not None:
                return found
        return dual_basis(self.power_basis())

    # -- element constructors ---------------------------------------------
    def elem(self, coeffs: Sequence[int]) -> RingElem:
        return RingElem(self, coeffs)

    def const(self, value: int) -> RingElem:
        return RingElem(self, [value] + [0] * (self.N - 1))

    def from_index(self, index: int) -> RingElem:
        return RingElem(self, [(index // self.q ** i) % self.q for i in range(self.N)])

    def xi_power(self, k: int) -> RingElem:
        return self.xi ** (k % (2 ** self.N - 1))

    @property
    def zero(self) -> RingElem:
        return self.const(0)

    @property
    def one(self) -> RingElem:
        return self.const(1)

    def power_basis(self) -> RingBasis:
        return RingBasis(tuple(self.xi ** k for k in range(1, self.N + 1)), "plain")

    def __iter__(self):
        for index in range(self.size):
            yield self.from_index(index)

    def __repr__(self) -> str:
        return f"RingContext({self.describe()})"

    # -- maps -------------------------------------------------------------
    def trace_of(self, coeffs: Sequence[int]) -> int:
        return int(np.dot(np.asarray(coeffs, dtype=np.int64), self._trace_powers) % self.q)

    def frobenius(self, a: RingElem, times: int = 1) -> RingElem:
        coeffs = np.asarray(a.coeffs, dtype=np.int64)
        for _ in range(times % self.N):
            coeffs = (coeffs @ self._frob) % self.q
        return RingElem(self, coeffs)

    @cached_property
    def bar_field(self) -> "RingContext":
        if self.s == 1:
            return self
        return get_ring(1, self.N, tuple(c % 2 for c in self.poly))

    @cached_property
    def lifted(self) -> "RingContext":
        """GR(2^{s+1}, N) defined by the Hensel lift of poly"""
        return lifted_context(self)

    # -- whole-ring tables ------------------------------------------------
    @cached_property
    def weights(self) -> np.ndarray:
        return self.q ** np.arange(self.N, dtype=np.int64)

    @cached_property
    def elements(self) -> np.ndarray:
        """(size, N) coefficient matrix in canonical order"""
        idx = np.arange(self.size, dtype=np.int64)
        return (idx[:, None] // self.weights[None, :]) % self.q

    @cached_property
    def add_table(self) -> np.ndarray:
        E = self.elements
        return ((E[:, None, :] + E[None, :, :]) % self.q) @ self.weights

    @cached_property
    def neg_table(self) -> np.ndarray:
        return ((-self.elements) % self.q) @ self.weights

    @cached_property
    def mul_table(self) -> np.ndarray:
        E = self.elements
        N = self.N
        table = np.empty((self.size, self.size), dtype=np.int64)
        for i in range(self.size):
            conv = np.zeros((self.size, 2 * N - 1), dtype=np.int64)
            for a in range(N):
                conv[:, a:a + N] += E[i, a] * E
            table[i] = ((conv @ self._reduced) % self.q) @ self.weights
        return table

    @cached_property
    def trace_table(self) -> np.ndarray:
        return (self.elements @ self._trace_powers) % self.q

    @cached_property
    def bar_table(self) -> np.ndarray:
        """Index of the bar image in GF(2^N)"""
        return (self.elements % 2) @ (2 ** np.arange(self.N, dtype=np.int64))

    @cached_property
    def teichmuller_exponents(self) -> Dict[int, Optional[int]]:
        """Element index -> exponent k of xi^k (None for zero)"""
        table: Dict[int, Optional[int]] = {0: None}
        for k in range(2 ** self.N - 1):
            table[self.xi_power(k).index] = k
        return table

    @cached_property
    def teich_by_bar(self) -> np.ndarray:
        """Bar index -> index of the Teichmuller element with that bar"""
        reps = np.zeros(2 ** self.N, dtype=np.int64)
        for index in self.teichmuller_exponents:
            reps[self.bar_table[index]] = index
        return reps

    @cached_property
    def two_adic_table(self) -> np.ndarray:
        """(size, s) Teichmuller digit exponents, -1 marks the zero digit"""
        exps = self.teichmuller_exponents
        digits = np.full((self.size, self.s), -1, dtype=np.int64)
        rem = self.elements.copy()
        for level in range(self.s):
            bars = (rem % 2) @ (2 ** np.arange(self.N, dtype=np.int64))
            teich = self.teich_by_bar[bars]
            digits[:, level] = [(-1 if exps[t] is None else exps[t]) for t in teich]
            diff = (rem - self.elements[teich]) % self.q
            rem = diff // 2
        return digits

    @cached_property
    def coordinate_table(self) -> np.ndarray:
        """(size, N) working-basis coordinates k_j = T(alpha theta*_j)"""
        duals = [d.index for d in self.working_basis.dual_elems]
        return np.stack([self.trace_table[self.mul_table[:, d]] for d in duals], axis=1)

    @cached_property
    def tensor_order(self) -> np.ndarray:
        """order[t] = canonical index of the element with tensor index t"""
        coords = self.coordinate_table
        tensor_index = coords @ (self.q ** np.arange(self.N - 1, -1, -1, dtype=np.int64))
        order = np.empty(self.size, dtype=np.int64)
        order[tensor_index] = np.arange(self.size)
        return order

    @cached_property
    def ideal2(self) -> np.ndarray:
        return np.flatnonzero(self.bar_table == 0)

    @cached_property
    def units(self) -> np.ndarray:
        return np.flatnonzero(self.bar_table != 0)

    @cached_property
    def teichmuller(self) -> np.ndarray:
        return np.array(sorted(self.teichmuller_exponents), dtype=np.int64)

    @cached_property
    def bar_classes(self) -> Dict[int, np.ndarray]:
        """Bar index -> element indices of the coset bar + (2)"""
        return {b: np.flatnonzero(self.bar_table == b) for b in range(2 ** self.N)}

    # -- reporting --------------------------------------------------------
    def describe(self) -> str:
        poly = ",".join(str(c) for c in self.poly)
        basis = ",".join(repr(e) for e in self.working_basis.elems)
        return f"{self.name}; poly=[{poly}]; basis=[{basis}]"

    def to_dict(self) -> Dict:
        return {
            "ring": self.name,
            "s": self.s,
            "N": self.N,
            "poly": list(self.poly),
            "basis_kind": self.working_basis.kind,
            "basis": [list(e.coeffs) for e in self.working_basis.elems],
            "dual_basis": [list(e.coeffs) for e in self.working_basis.dual_elems],
        }


# ----------------------------------------------------------------------
# Context construction and caches
# ----------------------------------------------------------------------

_ring_cache: Dict[Tuple, RingContext] = {}


def ring_context_new(s: int, N: int, poly_override: Optional[Sequence[int]] = None) -> RingContext:
    """
    Build and validate a ring context

    Args:
        s: Exponent of the characteristic 2^s
        N: Extension degree
        poly_override: Optional monic polynomial over Z_{2^s}

    Returns:
        A new RingContext
    """
    if s not in SUPPORTED_S:
        raise RingSpecError(f"s must be one of {SUPPORTED_S}, got {s}")
    if N < 1:
        raise RingSpecError(f"N must be positive, got {N}")

    if poly_override is None:
        poly = default_polynomial(s, N)
    else:
        poly = tuple(int(c) for c in poly_override)
        q = 2 ** s
        if len(poly) != N + 1:
            raise RingSpecError(f"polynomial of degree {N} needs {N + 1} coefficients")
        if any(c < 0 or c >= q for c in poly):
            raise RingSpecError(f"coefficients must lie in [0, {q})")
        if poly[-1] != 1:
            raise RingSpecError("polynomial must be monic")
        if not is_irreducible_gf2(poly):
            raise RingSpecError(f"bar polynomial of {list(poly)} is reducible")

    ctx = RingContext(s, N, poly)
    logger.debug("Built %s", ctx.describe())
    return ctx


def get_ring(s: int, N: int, poly: Optional[Sequence[int]] = None) -> RingContext:
    """Get or create the shared context for (s, N, poly)"""
    key = (s, N, default_polynomial(s, N) if poly is None else tuple(int(c) for c in poly))
    if key not in _ring_cache:
        _ring_cache[key] = ring_context_new(s, N, poly)
    return _ring_cache[key]


def lifted_context(ctx: RingContext) -> RingContext:
    """GR(2^{s+1}, N) from the Hensel lift, checked against the trace tables"""
    if ctx.s >= max(SUPPORTED_S):
        raise RingSpecError(f"cannot lift beyond s={max(SUPPORTED_S)}")
    lifted = get_ring(ctx.s + 1, ctx.N, hensel_lift(ctx.poly, ctx.s))
    if np.any((lifted._trace_powers - ctx._trace_powers) % ctx.q):
        raise RingSpecError(f"trace tables of {lifted.name} and {ctx.name} disagree")
    return lifted


# ----------------------------------------------------------------------
# Operations
# ----------------------------------------------------------------------

def elem_arith(op: str, a: RingElem, b: Union[RingElem, int, None] = None) -> RingElem:
    """Dispatch add/sub/neg/mul/pow on ring elements"""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "neg":
        return -a
    if op == "mul":
        return a * b
    if op == "pow":
        return a ** int(b)
    raise ValueError(f"unknown operation {op}")


def frobenius_trace(a: RingElem, which: str = "T_2s") -> int:
    """
    Trace of a: T_{2^s}(a) in Z_{2^s}, or tr(bar a) in Z_2 for "bar-composed"
    """
    if which == "T_2s":
        return a.trace()
    if which == "bar-composed":
        return bar_map(a).trace()
    raise ValueError(f"unknown trace kind {which}")


def bar_map(a: RingElem) -> RingElem:
    """Coefficient-wise reduction mod 2 into GF(2^N)"""
    field = a.ctx.bar_field
    return RingElem(field, [c % 2 for c in a.coeffs])


def teichmuller_and_two_adic(a: RingElem) -> TwoAdic:
    """Unique decomposition a = t_1 + 2 t_2 + ... with t_i Teichmuller"""
    ctx = a.ctx
    exps = ctx.teichmuller_exponents
    parts: List[Optional[int]] = []
    rem = np.asarray(a.coeffs, dtype=np.int64)
    for _ in range(ctx.s):
        bar_index = int(((rem % 2) * (2 ** np.arange(ctx.N))).sum())
        teich = int(ctx.teich_by_bar[bar_index])
        parts.append(exps[teich])
        rem = ((rem - ctx.elements[teich]) % ctx.q) // 2
    return TwoAdic(tuple(parts))


def two_adic_compose(ctx: RingContext, digits: TwoAdic) -> RingElem:
    total = ctx.zero
    for level, k in enumerate(digits.parts):
        if k is not None:
            total = total + (2 ** level) * ctx.xi_power(k)
    return total


def lift_teichmuller(a: RingElem, target: Optional[RingContext] = None) -> RingElem:
    """
    Digitwise lift of a into T_{s+1} inside GR(2^{s+1}, N)

    Args:
        a: Element of GR(2^s, N)
        target: Lifted context (defaults to a.ctx.lifted)

    Returns:
        Element whose reduction mod 2^s is a
    """
    target = target or a.ctx.lifted
    total = target.zero
    for level, k in enumerate(teichmuller_and_two_adic(a).parts):
        if k is not None:
            total = total + (2 ** level) * target.xi_power(k)
    return total


def lift_table(ctx: RingContext) -> np.ndarray:
    """Canonical index in ctx -> canonical index of its lift"""
    target = ctx.lifted
    powers = np.array([target.xi_power(k).index for k in range(2 ** ctx.N - 1)], dtype=np.int64)
    digits = ctx.two_adic_table
    lifted = np.zeros(ctx.size, dtype=np.int64)
    for level in range(ctx.s):
        column = digits[:, level]
        term = np.where(column < 0, 0, powers[np.maximum(column, 0)])
        scaled = (target.elements[term] * 2 ** level) % target.q
        lifted = target.add_table[lifted, scaled @ target.weights]
    return lifted


def dual_basis(basis: RingBasis) -> RingBasis:
    """
    Trace-dual of a basis by inverting its Gram matrix over Z_{2^s}

    Args:
        basis: N linearly independent elements

    Returns:
        RingBasis of kind dual-pair (or self-dual when the Gram is identity)
    """
    elems = basis.elems
    ctx = elems[0].ctx
    gram = basis.gram()
    det = int(Matrix(gram.tolist()).det())
    if det % 2 == 0:
        raise DualBasisError(f"Gram determinant {det} is a zero divisor in Z_{ctx.q}")

    if np.array_equal(gram % ctx.q, np.eye(ctx.N, dtype=np.int64)):
        return RingBasis(elems, "self-dual")

    inverse = Matrix(gram.tolist()).inv_mod(ctx.q)
    duals = []
    for j in range(ctx.N):
        total = ctx.zero
        for k in range(ctx.N):
            total = total + int(inverse[j, k]) * elems[k]
        duals.append(total)

    for i, theta in enumerate(elems):
        for j, dual in enumerate(duals):
            if (theta * dual).trace() != (1 if i == j else 0):
                raise DualBasisError("dual basis failed the trace check")
    return RingBasis(elems, "dual-pair", tuple(duals))


def _is_self_dual(elems: Sequence[RingElem]) -> bool:
    for i, a in enumerate(elems):
        for j, b in enumerate(elems[i:], start=i):
            if (a * b).trace() != (1 if i == j else 0):
                return False
    return True


def self_dual_basis_search(ctx: RingContext) -> Optional[RingBasis]:
    """
    Find a self-dual basis, trying Frobenius orbits first

    Returns None when none exists; the answer is definitive for s*N <= 6.
    """
    exhaustive = ctx.s * ctx.N <= MAX_EXHAUSTIVE_SN
    if ctx.s >= 2 and ctx.N % 2 == 0:
        return None

    generators = [ctx.xi]
    if ctx.N >= 2:
        generators.append(ctx.xi + 2 * ctx.xi ** 2)
    limit = ctx.size if exhaustive else min(ctx.size, ORBIT_SCAN_LIMIT)
    candidates = generators + [ctx.from_index(i) for i in range(1, limit)]

    for g in candidates:
        orbit = [ctx.frobenius(g, i) for i in range(ctx.N)]
        if _is_self_dual(orbit):
            return RingBasis(tuple(orbit), "self-dual")

    if not exhaustive:
        return None

    pool = [e for e in (ctx.from_index(i) for i in range(1, ctx.size)) if (e * e).trace() == 1]
    chosen: List[RingElem] = []

    def extend(start: int) -> bool:
        if len(chosen) == ctx.N:
            return True
        for pos in range(start, len(pool)):
            cand = pool[pos]
            if all((cand * c).trace() == 0 for c in chosen):
                chosen.append(cand)
                if extend(pos + 1):
                    return True
                chosen.pop()
        return False

    if extend(0):
        return RingBasis(tuple(chosen), "self-dual")
    return None


def enumerate_subsets(ctx: RingContext, which: str):
    """
    Named subsets of the ring in canonical order

    Args:
        ctx: Ring context
        which: units | ideal2 | teichmuller | bar-classes

    Returns:
        List of RingElem, or a dict bar element -> list of RingElem
    """
    if which == "units":
        return [ctx.from_index(int(i)) for i in ctx.units]
    if which == "ideal2":
        return [ctx.from_index(int(i)) for i in ctx.ideal2]
    if which == "teichmuller":
        return [ctx.from_index(int(i)) for i in ctx.teichmuller]
    if which == "bar-classes":
        field = ctx.bar_field
        return {
            field.from_index(b): [ctx.from_index(int(i)) for i in members]
            for b, members in ctx.bar_classes.items()
        }
    raise ValueError(f"unknown subset {which}")


def two_adic_expansion_rows(ctx: Optional[RingContext] = None) -> List[Tuple[Tuple[Optional[int], ...], Tuple[int, ...]]]:
    """(2-adic digits, working-basis coordinates) for every element of GR(4,2) by default"""
    ctx = ctx or get_ring(2, 2)
    return [(e.two_adic().parts, e.coordinates()) for e in ctx]


def frobenius(a: RingElem, times: int = 1) -> RingElem:
    """phi^times(a): substitute xi -> xi^(2^times) in the additive representation"""
    return a.ctx.frobenius(a, times)


def coordinate_permutation(ctx: RingContext) -> np.ndarray:
    """order[t] = canonical index of the element whose coordinates spell t"""
    return ctx.tensor_order


def hensel_compatible(ctx: RingContext) -> int:
    """Number of elements violating T_{2^{s+1}}(a) mod 2^s = T_{2^s}(a mod 2^s)"""
    lifted = ctx.lifted
    reduced = (lifted.elements % ctx.q) @ ctx.weights
    return int(np.count_nonzero(lifted.trace_table % ctx.q != ctx.trace_table[reduced]))
