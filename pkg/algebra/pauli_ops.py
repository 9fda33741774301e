"""
Generalized Pauli monomials Z_gamma X_delta over a Galois ring.

Convention: a monomial is the product Z_gamma X_delta (Z first). With
Z_gamma|k> = w^{T(gamma k)}|k> and X_delta|k> = |k + delta>, where w is the
primitive 2^s-th root of unity, the operators obey

    Z_gamma X_delta = w^{T(gamma delta)} X_delta Z_gamma

so for one ququart X Z = -i Z X. Everything here is generic in s, which lets
the qubit reference (s = 1) reuse the same builders.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from algebra.galois_core import RingContext, RingElem, get_ring
from config.settings import MATRIX_TOL
from utils.errors import DimensionError, RingMismatchError

logger = logging.getLogger(__name__)


def unit_roots(q: int) -> np.ndarray:
    """w^k for k = 0..q-1, exact for q <= 4"""
    if q == 1:
        return np.array([1.0 + 0j])
    if q == 2:
        return np.array([1.0, -1.0], dtype=complex)
    if q == 4:
        return np.array([1.0, 1j, -1.0, -1j], dtype=complex)
    return np.exp(2j * np.pi * np.arange(q) / q)


@dataclass(frozen=True)
class MonomialLabel:
    """Names the operator Z_gamma X_delta"""

    gamma: RingElem
    delta: RingElem

    def __post_init__(self):
        if self.gamma.ctx.key != self.delta.ctx.key:
            raise RingMismatchError("gamma and delta come from different rings")

    @property
    def is_identity(self) -> bool:
        return self.gamma == 0 and self.delta == 0

    def __str__(self) -> str:
        return f"Z{self.gamma!r}X{self.delta!r}"


@dataclass(frozen=True)
class CommutingSet:
    """Ray {(gamma, lambda gamma)} or ideal {(mu delta, delta)} with mu in (2)"""

    kind: str  # ray | ideal
    param: RingElem
    members: Tuple[MonomialLabel, ...]

    @property
    def label(self) -> str:
        return f"{self.kind}:{self.param!r}"

    def member_set(self) -> frozenset:
        return frozenset(self.members)


# ----------------------------------------------------------------------
# Operators
# ----------------------------------------------------------------------

def z_matrix(gamma: RingElem) -> np.ndarray:
    """Diagonal Z_gamma in canonical element order"""
    ctx = gamma.ctx
    exponents = ctx.trace_table[ctx.mul_table[gamma.index]]
    return np.diag(unit_roots(ctx.q)[exponents])


def x_matrix(delta: RingElem) -> np.ndarray:
    """Permutation matrix of k -> k + delta"""
    ctx = delta.ctx
    X = np.zeros((ctx.size, ctx.size), dtype=complex)
    X[ctx.add_table[delta.index], np.arange(ctx.size)] = 1.0
    return X


def monomial_matrix(m: MonomialLabel) -> np.ndarray:
    return z_matrix(m.gamma) @ x_matrix(m.delta)


def local_z(q: int, power: int = 1) -> np.ndarray:
    return np.diag(unit_roots(q)[(power * np.arange(q)) % q])


def local_x(q: int, power: int = 1) -> np.ndarray:
    return np.roll(np.eye(q, dtype=complex), power % q, axis=0)


def local_fourier(q: int) -> np.ndarray:
    k = np.arange(q)
    return unit_roots(q)[np.outer(k, k) % q] / np.sqrt(q)


def kron_all(factors: Sequence[np.ndarray]) -> np.ndarray:
    result = np.eye(1, dtype=complex)
    for factor in factors:
        result = np.kron(result, factor)
    return result


def to_tensor_order(M: np.ndarray, ctx: RingContext) -> np.ndarray:
    """Reindex a canonical-order matrix by working-basis coordinates"""
    if M.shape != (ctx.size, ctx.size):
        raise DimensionError(f"expected {ctx.size}x{ctx.size}, got {M.shape}")
    order = ctx.tensor_order
    return M[np.ix_(order, order)]


def z_matrix_tensor(gamma: RingElem) -> np.ndarray:
    """Z^{g_1} x ... x Z^{g_N} with g_j = T(gamma theta_j), tensor order"""
    ctx = gamma.ctx
    powers = [(gamma * theta).trace() for theta in ctx.working_basis.elems]
    return kron_all([local_z(ctx.q, g) for g in powers])


def x_matrix_tensor(delta: RingElem) -> np.ndarray:
    """X^{d_1} x ... x X^{d_N} with d_j = T(delta theta*_j), tensor order"""
    ctx = delta.ctx
    return kron_all([local_x(ctx.q, d) for d in delta.coordinates()])


@lru_cache(maxsize=None)
def fourier_matrix(ctx: RingContext) -> np.ndarray:
    """F = size^{-1/2} sum w^{T(alpha beta)} |alpha><beta|"""
    F = unit_roots(ctx.q)[ctx.trace_table[ctx.mul_table]] / np.sqrt(ctx.size)
    F.setflags(write=False)
    return F


def commutation_phase(m1: MonomialLabel, m2: MonomialLabel) -> int:
    """p with m1 m2 = w^p m2 m1"""
    q = m1.gamma.ctx.q
    return ((m1.gamma * m2.delta).trace() - (m2.gamma * m1.delta).trace()) % q


def max_unitarity_error(U: np.ndarray) -> float:
    return float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))


def operational_basis_check(ctx: RingContext, sample: Optional[int] = None, seed: int = 0) -> float:
    """
    Max deviation of Tr[m1^dagger m2] from size * delta over monomial pairs

    Args:
        ctx: Ring context
        sample: Number of random labels to use (all labels when None)
        seed: Sampling seed

    Returns:
        Largest absolute deviation
    """
    labels = [(g, d) for g in range(ctx.size) for d in range(ctx.size)]
    if sample is not None and sample < len(labels):
        rng = np.random.default_rng(seed)
        picks = rng.choice(len(labels), size=sample, replace=False)
        labels = [labels[i] for i in picks]
    stack = np.stack([
        monomial_matrix(MonomialLabel(ctx.from_index(g), ctx.from_index(d))).ravel()
        for g, d in labels
    ])
    gram = stack.conj() @ stack.T
    return float(np.max(np.abs(gram - ctx.size * np.eye(len(labels)))))


def operator_schmidt_rank(U: np.ndarray, dims: Sequence[int], site: int = 0, tol: float = 1e-8) -> int:
    """
    Operator Schmidt rank of U across the cut (site | rest)

    Args:
        U: Operator on the product space with local dimensions dims
        dims: Local dimensions in tensor order
        site: Index of the single subsystem cut off
        tol: Relative singular value threshold

    Returns:
        Number of singular values above tol * largest
    """
    n = len(dims)
    if U.shape != (int(np.prod(dims)),) * 2:
        raise DimensionError(f"operator shape {U.shape} does not match dims {tuple(dims)}")
    T = U.reshape(tuple(dims) + tuple(dims))
    rest = [k for k in range(n) if k != site]
    T = T.transpose([site, n + site] + rest + [n + k for k in rest])
    d = dims[site]
    M = T.reshape(d * d, -1)
    sv = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(sv > tol * sv[0]))


def is_local(U: np.ndarray, dims: Sequence[int], tol: float = 1e-8) -> bool:
    return all(operator_schmidt_rank(U, dims, site, tol) == 1 for site in range(len(dims)))


# ----------------------------------------------------------------------
# Commuting sets
# ----------------------------------------------------------------------

@lru_cache(maxsize=None)
def commuting_sets_enumerate(ctx: RingContext) -> Tuple[CommutingSet, ...]:
    """
    All ray sets (lambda in canonical order) followed by ideal sets (mu in (2))

    For s = 2 this gives 4^N + 2^N sets of 4^N commuting monomials each.
    """
    elems = list(ctx)
    sets: List[CommutingSet] = []
    for lam in elems:
        members = tuple(MonomialLabel(g, lam * g) for g in elems)
        sets.append(CommutingSet("ray", lam, members))
    for mu_index in ctx.ideal2:
        mu = ctx.from_index(int(mu_index))
        members = tuple(MonomialLabel(mu * d, d) for d in elems)
        sets.append(CommutingSet("ideal", mu, members))
    logger.debug("Enumerated %d commuting sets in %s", len(sets), ctx.name)
    return tuple(sets)


def set_commutation_violations(cs: CommutingSet) -> int:
    """Member pairs with a nonzero commutation phase"""
    members = cs.members
    return sum(
        1
        for i, a in enumerate(members)
        for b in members[i + 1:]
        if commutation_phase(a, b) != 0
    )


def set_overlap_analysis(A: CommutingSet, B: CommutingSet) -> List[MonomialLabel]:
    """Shared labels (identity included) in the member order of A"""
    other = B.member_set()
    return [m for m in A.members if m in other]


def expected_overlap(A: CommutingSet, B: CommutingSet) -> frozenset:
    """Intersection predicted by the ray/ideal disjointness rules"""
    ctx = A.param.ctx
    ideal = [ctx.from_index(int(i)) for i in ctx.ideal2]
    identity = MonomialLabel(ctx.zero, ctx.zero)
    if A.kind == "ray" and B.kind == "ray":
        if A.param.bar() != B.param.bar():
            return frozenset([identity])
        return frozenset(MonomialLabel(g, A.param * g) for g in ideal)
    if A.kind == "ideal" and B.kind == "ideal":
        return frozenset(MonomialLabel(ctx.zero, d) for d in ideal)
    return frozenset([identity])


def overlap_rule_violations(ctx: RingContext) -> int:
    """Pairs of distinct sets whose intersection breaks the rules"""
    sets = commuting_sets_enumerate(ctx)
    bad = 0
    for i, A in enumerate(sets):
        for B in sets[i + 1:]:
            if frozenset(set_overlap_analysis(A, B)) != expected_overlap(A, B):
                bad += 1
    return bad


def _label_pair(m: MonomialLabel) -> Tuple[int, int]:
    return m.gamma.index, m.delta.index


def single_ququart_set_rows() -> List[Dict]:
    """Single ququart: each commuting set as (Z power, X power) pairs"""
    ctx = get_ring(2, 1)
    return [
        {"set": cs.label, "members": [_label_pair(m) for m in cs.members]}
        for cs in commuting_sets_enumerate(ctx)
    ]


def two_ququart_set_rows() -> List[Dict]:
    """Two ququarts: ray sets grouped by bar class, then the ideal sets"""
    ctx = get_ring(2, 2)
    sets = commuting_sets_enumerate(ctx)
    rows = []
    for bar_index in range(2 ** ctx.N):
        group = [cs for cs in sets if cs.kind == "ray" and ctx.bar_table[cs.param.index] == bar_index]
        shared = set.intersection(*(set(cs.members) for cs in group))
        rows.append({
            "group": f"ray bar={ctx.bar_field.from_index(bar_index)!r}",
            "sets": [cs.label for cs in group],
            "shared": sorted((str(m) for m in shared if not m.is_identity)),
        })
    ideals = [cs for cs in sets if cs.kind == "ideal"]
    shared = set.intersection(*(set(cs.members) for cs in ideals))
    rows.append({
        "group": "ideal",
        "sets": [cs.label for cs in ideals],
        "shared": sorted(str(m) for m in shared if not m.is_identity),
    })
    return rows


def disjointness_graph(ctx: RingContext) -> nx.Graph:
    """Commuting sets as nodes, edge iff they share only the identity"""
    sets = commuting_sets_enumerate(ctx)
    graph = nx.Graph()
    graph.add_nodes_from(cs.label for cs in sets)
    for i, A in enumerate(sets):
        for B in sets[i + 1:]:
            if len(set_overlap_analysis(A, B)) == 1:
                graph.add_edge(A.label, B.label)
    return graph


def max_clique_census(graph: nx.Graph) -> Dict[str, int]:
    cliques = list(nx.find_cliques(graph))
    size = max(len(c) for c in cliques)
    return {"max_size": size, "count": sum(1 for c in cliques if len(c) == size)}


def max_disjoint_census(ctx: RingContext) -> Dict[str, int]:
    """Largest family of mutually disjoint commuting sets and how many there are"""
    census = max_clique_census(disjointness_graph(ctx))
    census["expected_size"] = 2 ** ctx.N + 1
    census["expected_count"] = (2 ** ctx.N) ** (2 ** ctx.N + 1)
    return census


def construction_mismatch(ctx: RingContext, sample: Optional[int] = None, seed: int = 0) -> float:
    """Max entry difference between ring-built and tensor-built Z and X"""
    indices = np.arange(ctx.size)
    if sample is not None and sample < ctx.size:
        indices = np.random.default_rng(seed).choice(ctx.size, size=sample, replace=False)
    worst = 0.0
    for index in indices:
        a = ctx.from_index(int(index))
        worst = max(
            worst,
            float(np.max(np.abs(to_tensor_order(z_matrix(a), ctx) - z_matrix_tensor(a)))),
            float(np.max(np.abs(to_tensor_order(x_matrix(a), ctx) - x_matrix_tensor(a)))),
        )
    if worst > MATRIX_TOL:
        logger.warning("Ring and tensor constructions differ by %.3e in %s", worst, ctx.name)
    return worst
