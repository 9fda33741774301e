"""
MU-like basis family of N ququarts built from the Galois-ring phase solution.

Ray bases are the columns of V_lambda = F diag(c_{., lambda}) F^dagger for
every lambda in GR(4,N); ideal bases are the columns of
diag(c_{., mu})^* F^dagger for mu in (2). Columns are indexed by ring
elements in canonical order. The same construction at s = 1 gives the
qubit MUBs used by bases.qubit_ref.
"""
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Tuple

import networkx as nx
import numpy as np
from scipy.optimize import linear_sum_assignment

from algebra.galois_core import (
    GR42_TWO_ADIC_EXPANSIONS, RingContext, RingElem, get_ring, hensel_compatible, lift_table,
    two_adic_expansion_rows
)
from algebra.pauli_ops import (
    CommutingSet, commuting_sets_enumerate, fourier_matrix, kron_all,
    local_fourier, local_x, max_clique_census, max_unitarity_error,
    monomial_matrix, operator_schmidt_rank, overlap_rule_violations,
    set_commutation_violations, to_tensor_order, unit_roots
)
from bases.fixtures import FIXTURES, HEADERS, SWAPPED_HEADERS
from config.settings import FACTOR_GAP, MATRIX_TOL, UNITARY_TOL
from utils.errors import DimensionError, UnitarityError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PhaseContext:
    """GR(2^s,N), its Hensel lift and the primitive 2^{s+1}-th root omega"""

    base: RingContext
    lifted: RingContext
    omega: complex

    @classmethod
    def build(cls, ctx: RingContext) -> "PhaseContext":
        omega = complex(np.exp(2j * np.pi / (2 * ctx.q)))
        return cls(ctx, ctx.lifted, omega)

    @cached_property
    def table(self) -> np.ndarray:
        """c[gamma, lambda] = omega^{-T(lift(lambda) lift(gamma)^2)}"""
        lifted = self.lifted
        lift = lift_table(self.base)
        squares = lifted.mul_table[lift, lift]
        products = lifted.mul_table[squares[:, None], lift[None, :]]
        exponents = (-lifted.trace_table[products]) % (2 * self.base.q)
        return np.exp(2j * np.pi * exponents / (2 * self.base.q))


_phase_cache: Dict[Tuple, PhaseContext] = {}


def get_phase_context(ctx: RingContext) -> PhaseContext:
    if ctx.key not in _phase_cache:
        _phase_cache[ctx.key] = PhaseContext.build(ctx)
    return _phase_cache[ctx.key]


def phase_c(gamma: RingElem, lam: RingElem) -> complex:
    """c_{gamma, lambda} through digitwise Teichmuller lifts"""
    return complex(get_phase_context(gamma.ctx).table[gamma.index, lam.index])


def rotation_V(lam: RingElem) -> np.ndarray:
    """V_lambda = F diag(c_{., lambda}) F^dagger; column kappa is |psi_kappa^lambda>"""
    ctx = lam.ctx
    F = fourier_matrix(ctx)
    phases = get_phase_context(ctx).table[:, lam.index]
    return (F * phases[None, :]) @ F.conj().T


def ideal_basis(mu: RingElem) -> np.ndarray:
    """Columns |psi~_kappa^mu> = F^{-1} V_mu^dagger |kappa>"""
    ctx = mu.ctx
    F = fourier_matrix(ctx)
    phases = get_phase_context(ctx).table[:, mu.index]
    return phases.conj()[:, None] * F.conj().T


@dataclass
class BasisFamily:
    """Ray bases keyed by lambda, then ideal bases keyed by mu in (2)"""

    ctx: RingContext
    ray_bases: Dict[RingElem, np.ndarray] = field(default_factory=dict)
    ideal_bases: Dict[RingElem, np.ndarray] = field(default_factory=dict)

    def setups(self) -> List[Tuple[str, RingElem, np.ndarray]]:
        return [("ray", lam, U) for lam, U in self.ray_bases.items()] + \
            [("ideal", mu, U) for mu, U in self.ideal_bases.items()]

    def labels(self) -> List[str]:
        return [f"{kind}:{param!r}" for kind, param, _ in self.setups()]

    def basis(self, kind: str, param: RingElem) -> np.ndarray:
        bases = self.ray_bases if kind == "ray" else self.ideal_bases
        return bases[param]

    def stacked(self) -> np.ndarray:
        """(setups, dim, dim) array of all bases in setup order"""
        return np.stack([U for _, _, U in self.setups()])

    def __len__(self) -> int:
        return len(self.ray_bases) + len(self.ideal_bases)


def family_build(ctx: RingContext) -> BasisFamily:
    """
    Build all 4^N + 2^N bases (2^N + 1 when s = 1)

    Args:
        ctx: GR(2^s, N) context with s <= 2

    Returns:
        BasisFamily with unitary matrices in canonical order
    """
    family = BasisFamily(ctx)
    for lam in ctx:
        family.ray_bases[lam] = rotation_V(lam)
    for mu_index in ctx.ideal2:
        mu = ctx.from_index(int(mu_index))
        family.ideal_bases[mu] = ideal_basis(mu)

    worst = max(max_unitarity_error(U) for _, _, U in family.setups())
    if worst > UNITARY_TOL:
        raise UnitarityError(f"{ctx.name} family unitarity error {worst:.3e}")
    logger.debug("Built %d bases over %s (unitarity %.2e)", len(family), ctx.name, worst)
    return family


_family_cache: Dict[Tuple, BasisFamily] = {}


def get_family(N: int, s: int = 2) -> BasisFamily:
    """Get or create the shared family for N ququarts (or N qubits when s = 1)"""
    key = (s, N)
    if key not in _family_cache:
        _family_cache[key] = family_build(get_ring(s, N))
    return _family_cache[key]


# ----------------------------------------------------------------------
# Checks
# ----------------------------------------------------------------------

def phase_equation_check(phase: PhaseContext) -> float:
    """max |c_{a+g} c*_g - c_a w^{-T(a g lambda)}| over all triples"""
    ctx = phase.base
    c = phase.table
    w = unit_roots(ctx.q)
    worst = 0.0
    for lam in range(ctx.size):
        col = c[:, lam]
        lhs = col[ctx.add_table] * col.conj()[None, :]
        agl = ctx.mul_table[ctx.mul_table, lam]
        rhs = col[:, None] * w[(-ctx.trace_table[agl]) % ctx.q]
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


def spectral_check(fam: BasisFamily) -> float:
    """
    Max deviation of U^dagger M U from its predicted diagonal form

    Ray: V^dagger Z_g X_{lg} V = c*_{g,l} Z_g. Ideal: U^dagger Z_{mu d} X_d U =
    c_{d,mu} w^{T(mu d^2)} Z_d.
    """
    ctx = fam.ctx
    c = get_phase_context(ctx).table
    w = unit_roots(ctx.q)
    worst = 0.0
    for cs in commuting_sets_enumerate(ctx):
        U = fam.basis(cs.kind, cs.param)
        for m in cs.members:
            M = U.conj().T @ monomial_matrix(m) @ U
            if cs.kind == "ray":
                z = m.gamma
                factor = np.conj(c[z.index, cs.param.index])
            else:
                z = m.delta
                factor = c[z.index, cs.param.index] * w[(cs.param * z * z).trace()]
            diag = w[ctx.trace_table[ctx.mul_table[z.index]]]
            worst = max(worst, float(np.max(np.abs(M - factor * np.diag(diag)))))
    return worst


def completeness_check(fam: BasisFamily) -> float:
    """max |sum_k |psi_k><psi_k| - I| over all bases"""
    eye = np.eye(fam.ctx.size)
    return max(float(np.max(np.abs(U @ U.conj().T - eye))) for _, _, U in fam.setups())


def expected_overlaps(fam: BasisFamily, a: Tuple[str, RingElem], b: Tuple[str, RingElem]) -> np.ndarray:
    """Predicted |<psi_k^a|psi_l^b>|^2 for two setups"""
    ctx = fam.ctx
    size = ctx.size
    bars = ctx.bar_table
    same_class = (bars[:, None] == bars[None, :]).astype(float)
    (kind_a, pa), (kind_b, pb) = a, b
    if kind_a == kind_b and pa == pb:
        return np.eye(size)
    if kind_a != kind_b:
        return np.full((size, size), 1.0 / size)
    if kind_a == "ideal" or pa.bar() == pb.bar():
        return same_class / 2 ** ctx.N
    return np.full((size, size), 1.0 / size)


def overlap_verify(fam: BasisFamily) -> float:
    """Max violation of the ray/ray, ray/ideal and ideal/ideal overlap laws"""
    setups = fam.setups()
    worst = 0.0
    for i, (ka, pa, Ua) in enumerate(setups):
        for kb, pb, Ub in setups[i:]:
            overlaps = np.abs(Ua.conj().T @ Ub) ** 2
            expected = expected_overlaps(fam, (ka, pa), (kb, pb))
            worst = max(worst, float(np.max(np.abs(overlaps - expected))))
    return worst


def class_projectors(fam: BasisFamily, kind: str, param: RingElem) -> Dict[int, np.ndarray]:
    """Bar index -> sum of projectors onto the basis vectors in that bar class"""
    U = fam.basis(kind, param)
    return {
        b: U[:, members] @ U[:, members].conj().T
        for b, members in fam.ctx.bar_classes.items()
    }


def redundancy_projector_check(fam: BasisFamily) -> float:
    """Class projectors coincide within a ray bar class and across all ideal bases"""
    ctx = fam.ctx
    worst = 0.0
    groups: Dict[str, List[Tuple[str, RingElem]]] = {}
    for kind, param, _ in fam.setups():
        key = "ideal" if kind == "ideal" else f"ray:{ctx.bar_table[param.index]}"
        groups.setdefault(key, []).append((kind, param))
    for members in groups.values():
        reference = class_projectors(fam, *members[0])
        for kind, param in members[1:]:
            current = class_projectors(fam, kind, param)
            for b, P in reference.items():
                worst = max(worst, float(np.max(np.abs(P - current[b]))))
    return worst


def unbiased_census(fam: BasisFamily, tol: float = MATRIX_TOL) -> Dict[str, int]:
    """
    Bases as nodes, edge iff every squared overlap equals 1/dim

    Returns the maximum clique size and number of maximum cliques, next to
    the count 2^N(2^N+1) usually quoted.
    """
    setups = fam.setups()
    labels = fam.labels()
    size = fam.ctx.size
    graph = nx.Graph()
    graph.add_nodes_from(labels)
    for i, (_, _, Ua) in enumerate(setups):
        for j in range(i + 1, len(setups)):
            overlaps = np.abs(Ua.conj().T @ setups[j][2]) ** 2
            if np.max(np.abs(overlaps - 1.0 / size)) < tol:
                graph.add_edge(labels[i], labels[j])
    census = max_clique_census(graph)
    A = 2 ** fam.ctx.N
    census["printed_count"] = A * (A + 1)
    return census


def _is_product_column(vector: np.ndarray, dims: Tuple[int, ...]) -> bool:
    tensor = vector.reshape(dims)
    for site in range(len(dims)):
        M = np.moveaxis(tensor, site, 0).reshape(dims[site], -1)
        sv = np.linalg.svd(M, compute_uv=False)
        if sv[1:].size and sv[1] > FACTOR_GAP * sv[0]:
            return False
    return True


def is_product_basis(U: np.ndarray, ctx: RingContext) -> bool:
    """Every column is a product vector in tensor (coordinate) order"""
    dims = (ctx.q,) * ctx.N
    rows = U[ctx.tensor_order, :]
    return all(_is_product_column(rows[:, k], dims) for k in range(U.shape[1]))


def factorization_census(fam: BasisFamily) -> Dict[str, List[str]]:
    """Labels of ray and ideal product bases"""
    census: Dict[str, List[str]] = {"ray": [], "ideal": []}
    for kind, param, U in fam.setups():
        if is_product_basis(U, fam.ctx):
            census[kind].append(f"{kind}:{param!r}")
    return census


def fourier_factorization(ctx: RingContext) -> Dict[str, object]:
    """Distance of F to the local Fourier power and its operator Schmidt ranks"""
    F = to_tensor_order(fourier_matrix(ctx), ctx)
    local = kron_all([local_fourier(ctx.q)] * ctx.N)
    dims = (ctx.q,) * ctx.N
    return {
        "distance": float(np.max(np.abs(F - local))),
        "schmidt_ranks": [operator_schmidt_rank(F, dims, site) for site in range(ctx.N)],
        "self_dual": ctx.working_basis.kind == "self-dual",
    }


# ----------------------------------------------------------------------
# Fixtures
# ----------------------------------------------------------------------

def _eigenbasis_error(B: np.ndarray, cs: CommutingSet, conjugate: bool) -> float:
    worst = 0.0
    for m in cs.members:
        M = monomial_matrix(m)
        if conjugate:
            M = M.conj()
        D = B.conj().T @ M @ B
        worst = max(worst, float(np.max(np.abs(D - np.diag(np.diag(D))))))
    return worst


def match_up_to_phase(B: np.ndarray, U: np.ndarray) -> float:
    """Distance of |U^dagger B|^2 from the best-matching permutation matrix"""
    overlaps = np.abs(U.conj().T @ B) ** 2
    rows, cols = linear_sum_assignment(overlaps, maximize=True)
    permutation = np.zeros_like(overlaps)
    permutation[rows, cols] = 1.0
    return float(np.max(np.abs(overlaps - permutation)))


def validate_fixtures(fam: Optional[BasisFamily] = None, tol: float = MATRIX_TOL) -> List[Dict]:
    """
    Check each published single-ququart basis

    For every fixture the printed header is tried first, then the swapped
    one, each with the plain and the complex-conjugate monomials. The fixture
    is also matched against every constructed basis up to column phases and
    column order.

    Returns:
        One dict per fixture with the convention that holds and the match
    """
    fam = fam or get_family(1)
    ctx = fam.ctx
    if ctx.size != 4:
        raise DimensionError("fixtures describe a single ququart")
    sets = {(cs.kind, cs.param.index): cs for cs in commuting_sets_enumerate(ctx)}

    results = []
    for name, B in FIXTURES.items():
        attempts = [("printed", HEADERS[name])]
        if name in SWAPPED_HEADERS:
            attempts.append(("swapped", SWAPPED_HEADERS[name]))

        holds = None
        for header, key in attempts:
            for convention, conjugate in (("plain", False), ("conjugate", True)):
                if _eigenbasis_error(B, sets[key], conjugate) < tol:
                    holds = {"header": header, "convention": convention, "set": f"{key[0]}:({key[1]})"}
                    break
            if holds:
                break

        match_label, match_error = None, float("inf")
        for kind, param, U in fam.setups():
            error = match_up_to_phase(B, U)
            if error < match_error:
                match_label, match_error = f"{kind}:{param!r}", error

        results.append({
            "fixture": name,
            "orthonormal_error": max_unitarity_error(B),
            "holds": holds,
            "matched": match_label if match_error < tol else None,
            "match_error": match_error,
        })
        if holds is None or match_error >= tol:
            logger.warning("Fixture %s did not validate (match error %.3e)", name, match_error)
    return results


# ----------------------------------------------------------------------
# CNOT relation for two ququarts
# ----------------------------------------------------------------------

def cnot4() -> np.ndarray:
    """sum_k |k~><k~| (x) X^k with |k~> = F^{-1}|k>, control on particle 1"""
    F = local_fourier(4)
    gate = np.zeros((16, 16), dtype=complex)
    for k in range(4):
        tilde = F.conj().T[:, k]
        gate += np.kron(np.outer(tilde, tilde.conj()), local_x(4, k))
    return gate


def _product_witness(W: np.ndarray, samples: int, seed: int) -> float:
    """Largest second Schmidt coefficient of W applied to random product states"""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        a = rng.normal(size=4) + 1j * rng.normal(size=4)
        b = rng.normal(size=4) + 1j * rng.normal(size=4)
        state = W @ np.kron(a / np.linalg.norm(a), b / np.linalg.norm(b))
        sv = np.linalg.svd(state.reshape(4, 4), compute_uv=False)
        worst = max(worst, float(sv[1] / sv[0]))
    return worst


def cnot4_check(fam: Optional[BasisFamily] = None, samples: int = 20, seed: int = 0) -> List[Dict]:
    """
    Compare V_lambda with CNOT^{l1+l2} for two ququarts, report only

    For each lambda = l1 theta_1 + l2 theta_2 the report holds the operator
    Schmidt ranks of V_lambda (tensor order) and of the CNOT power, whether the
    ray basis is a product basis, and the product-state witness of
    V_lambda (CNOT^{l1+l2})^dagger.
    """
    fam = fam or get_family(2)
    ctx = fam.ctx
    if ctx.N != 2 or ctx.q != 4:
        raise DimensionError("the CNOT relation is stated for two ququarts")
    gate = cnot4()
    rows = []
    for lam, V in fam.ray_bases.items():
        l1, l2 = lam.coordinates()
        power = np.linalg.matrix_power(gate, (l1 + l2) % 4)
        V_tensor = to_tensor_order(V, ctx)
        rows.append({
            "lambda": repr(lam),
            "coordinates": [l1, l2],
            "cnot_power": (l1 + l2) % 4,
            "product_basis": is_product_basis(V, ctx),
            "schmidt_rank_V": operator_schmidt_rank(V_tensor, (4, 4)),
            "schmidt_rank_cnot": operator_schmidt_rank(power, (4, 4)),
            "witness": _product_witness(V_tensor @ power.conj().T, samples, seed),
        })
    return rows


# ----------------------------------------------------------------------
# Verification suite
# ----------------------------------------------------------------------

def verify_suite(N: int, tol: float = MATRIX_TOL) -> Dict[str, float]:
    """
    Run every structural check for N ququarts

    Counts (mismatched rows, violated pairs) and numeric maxima share one
    dict; a check passes when its value is at most tol.

    Args:
        N: Number of ququarts
        tol: Tolerance used by the fixture and census checks

    Returns:
        Check name -> violation
    """
    ctx = get_ring(2, N)
    fam = get_family(N)
    gr42 = dict(two_adic_expansion_rows())
    report: Dict[str, float] = {
        "ring_two_adic_expansions": float(sum(gr42.get(digits) != expansion for digits, expansion in GR42_TWO_ADIC_EXPANSIONS)),
        "hensel_compatibility": float(hensel_compatible(ctx)),
        "set_commutation": float(sum(set_commutation_violations(cs) for cs in commuting_sets_enumerate(ctx))),
        "set_overlap_rules": float(overlap_rule_violations(ctx)),
        "unitarity": max(max_unitarity_error(U) for _, _, U in fam.setups()),
        "phase_equation": phase_equation_check(get_phase_context(ctx)),
        "spectral": spectral_check(fam),
        "completeness": completeness_check(fam),
        "overlap": overlap_verify(fam),
        "redundancy": redundancy_projector_check(fam),
    }
    if N == 1:
        fixtures = validate_fixtures(fam, tol)
        report["fixtures"] = float(sum(r["holds"] is None or r["matched"] is None for r in fixtures))
    if N <= 2:
        # the clique count grows as (2^N)^(2^N+1)
        census = unbiased_census(fam, tol)
        report["unbiased_clique_size"] = float(abs(census["max_size"] - (2 ** N + 1)))

    for name, value in report.items():
        logger.debug("verify N=%d %s = %.3e", N, name, value)
    return report
