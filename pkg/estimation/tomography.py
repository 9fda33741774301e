"""
Born probabilities, linear-inversion reconstruction and sampled statistics.

Probability and count tables are (setups, outcomes) arrays with ray setups
first in canonical lambda order, then ideal setups in canonical mu order;
outcomes are ring elements in canonical order. Shots are allocated per setup.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
from joblib import Parallel, delayed
from tqdm import tqdm

from algebra.pauli_ops import unit_roots
from bases.mub_bases import BasisFamily, get_phase_context
from config.settings import BORN_DUST, NORMALIZATION_TOL, PSD_FLOOR, STATE_TOL
from estimation.ensembles import substream
from utils.errors import DimensionError, NormalizationError, StateError

logger = logging.getLogger(__name__)


@dataclass
class ProbabilityTable:
    """p_kappa^lambda and p~_kappa^mu for one basis family"""

    fam: BasisFamily
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        _check_shape(self.fam, self.values)

    @property
    def ray(self) -> np.ndarray:
        return self.values[:self.fam.ctx.size]

    @property
    def ideal(self) -> np.ndarray:
        return self.values[self.fam.ctx.size:]

    def setup_labels(self) -> List[str]:
        return self.fam.labels()

    def as_matrix(self) -> np.ndarray:
        return self.values

    def normalization_error(self) -> float:
        return float(np.max(np.abs(self.values.sum(axis=1) - 1)))

    @classmethod
    def frequencies(cls, counts: "CountTable") -> "ProbabilityTable":
        """f = m / M per setup"""
        return cls(counts.fam, counts.counts / counts.shots)


@dataclass
class CountTable:
    """Outcome counts m_kappa^lambda with M shots in every setup"""

    fam: BasisFamily
    counts: np.ndarray
    shots: int
    seed: int
    repeat: int = 0

    def setup_labels(self) -> List[str]:
        return self.fam.labels()


def _check_shape(fam: BasisFamily, values: np.ndarray) -> None:
    expected = (len(fam), fam.ctx.size)
    if values.shape != expected:
        raise DimensionError(f"table of shape {values.shape} does not cover the {expected[0]} setups x {expected[1]} outcomes")


def validate_density_matrix(rho: np.ndarray, dim: Optional[int] = None, physical: bool = False) -> None:
    """
    Raise unless rho is a Hermitian unit-trace matrix of the given dimension

    Args:
        rho: Candidate density matrix
        dim: Required dimension, if any
        physical: Also require eigenvalues above PSD_FLOOR
    """
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionError(f"density matrix must be square, got {rho.shape}")
    if dim is not None and rho.shape[0] != dim:
        raise DimensionError(f"expected a {dim}x{dim} density matrix, got {rho.shape}")
    hermiticity = float(np.max(np.abs(rho - rho.conj().T)))
    if hermiticity > STATE_TOL:
        raise StateError(f"density matrix is not Hermitian ({hermiticity:.3e})")
    trace = float(abs(np.trace(rho) - 1))
    if trace > STATE_TOL:
        raise StateError(f"density matrix trace is off by {trace:.3e}")
    if physical:
        min_eig = float(np.linalg.eigvalsh(rho)[0])
        if min_eig < PSD_FLOOR:
            raise StateError(f"density matrix has eigenvalue {min_eig:.3e}")


def physicality_report(rho: np.ndarray) -> Dict[str, float]:
    """Residuals of a (possibly non-physical) reconstruction"""
    hermitian = (rho + rho.conj().T) / 2
    min_eig = float(np.linalg.eigvalsh(hermitian)[0])
    return {
        "min_eigenvalue": min_eig,
        "hermiticity": float(np.max(np.abs(rho - rho.conj().T))),
        "trace_residual": float(abs(np.trace(rho) - 1)),
        "physical": bool(min_eig >= PSD_FLOOR),
    }


def class_sums(values: np.ndarray, fam: BasisFamily) -> np.ndarray:
    """(setups, 2^N) probability of each bar class kappa-bar + (2)"""
    classes = fam.ctx.bar_classes
    return np.stack([values[:, classes[b]].sum(axis=1) for b in sorted(classes)], axis=1)


def born_probabilities(rho: np.ndarray, fam: BasisFamily) -> ProbabilityTable:
    """
    p_kappa = <psi_kappa|rho|psi_kappa> for every setup

    Numerical dust within BORN_DUST of [0, 1] is clipped; anything beyond is
    kept so that non-physical inputs stay linear.
    """
    d = fam.ctx.size
    if rho.shape != (d, d):
        raise DimensionError(f"state of shape {rho.shape} does not fit {d} levels")
    U = fam.stacked()
    probs = np.sum(U.conj() * (rho @ U), axis=1).real
    probs = np.where((probs < 0) & (probs > -BORN_DUST), 0.0, probs)
    probs = np.where((probs > 1) & (probs < 1 + BORN_DUST), 1.0, probs)
    return ProbabilityTable(fam, probs)


def reconstruct_projector(probs: ProbabilityTable, fam: Optional[BasisFamily] = None) -> np.ndarray:
    """
    rho = sum C_kappa |psi_kappa><psi_kappa| - I/2^N over all setups

    with C_kappa = p_kappa - (2^N - 1)/4^N sum_{gamma in (2)} p_{kappa+gamma}.
    No positivity is enforced.
    """
    fam = fam or probs.fam
    _check_shape(fam, probs.values)
    ctx = fam.ctx
    A = 2 ** ctx.N
    P = probs.values
    shifted = P[:, ctx.add_table[:, ctx.ideal2]].sum(axis=-1)
    C = P - (A - 1) / A ** 2 * shifted
    U = fam.stacked()
    rho = np.einsum("sik,sk,sjk->ij", U, C, U.conj(), optimize=True)
    return rho - np.eye(ctx.size) / A


def _character_matrix(fam: BasisFamily) -> np.ndarray:
    ctx = fam.ctx
    return unit_roots(ctx.q)[ctx.trace_table[ctx.mul_table]]


def monomial_coefficients(probs: ProbabilityTable, fam: Optional[BasisFamily] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Monomial coefficients estimated from one setup each

    Returns:
        (ray, ideal): ray[lambda, kappa] estimates 4^{-N} Tr(rho (Z_kappa X_{lambda kappa})^dagger),
        ideal[i, kappa] estimates 4^{-N} Tr(rho (Z_{mu_i kappa} X_kappa)^dagger)
    """
    fam = fam or probs.fam
    ctx = fam.ctx
    d = ctx.size
    w = unit_roots(ctx.q)
    c = get_phase_context(ctx).table
    sums = probs.values @ _character_matrix(fam).conj()

    ray = c.T * sums[:d] / d

    mu = ctx.ideal2
    squares = ctx.mul_table[np.arange(d), np.arange(d)]
    twist = w[(-ctx.trace_table[ctx.mul_table[mu][:, squares]]) % ctx.q]
    ideal = c[:, mu].T.conj() * twist * sums[d:] / d
    return ray, ideal


def reconstruct_monomial(probs: ProbabilityTable, fam: Optional[BasisFamily] = None) -> np.ndarray:
    """
    rho as a sum of monomials Z_gamma X_delta

    Each setup contributes its d commuting monomials. Monomials whose
    diagonal label lies in (2) are shared with other setups of the same
    bar class and carry weight 1 - (2^N - 1)/2^N.
    """
    fam = fam or probs.fam
    _check_shape(fam, probs.values)
    ctx = fam.ctx
    d = ctx.size
    A = 2 ** ctx.N
    ray, ideal = monomial_coefficients(probs, fam)
    weight = np.where(ctx.bar_table == 0, 1.0 / A, 1.0)

    # coefficients[gamma, delta] of Z_gamma X_delta
    coefficients = np.zeros((d, d), dtype=complex)
    kappa = np.broadcast_to(np.arange(d), (d, d))
    np.add.at(coefficients, (kappa, ctx.mul_table), weight * ray)
    mu = ctx.ideal2
    np.add.at(coefficients, (ctx.mul_table[mu], kappa[:len(mu)]), weight * ideal)
    coefficients[0, 0] -= 1.0 / A

    # (Z_gamma X_delta)[i, j] = w^{T(gamma i)} when i = j + delta
    rows = _character_matrix(fam) @ coefficients
    difference = ctx.add_table[:, ctx.neg_table]
    return rows[np.arange(d)[:, None], difference]


def redundancy_check(probs: ProbabilityTable) -> float:
    """
    Largest violation of normalization and the bar-class relations

    Class sums must agree across ray setups of one bar class and across all
    ideal setups.
    """
    fam = probs.fam
    ctx = fam.ctx
    d = ctx.size
    sums = class_sums(probs.values, fam)
    worst = probs.normalization_error()

    reference = ctx.teich_by_bar[ctx.bar_table]
    worst = max(worst, float(np.max(np.abs(sums[:d] - sums[reference]))))
    worst = max(worst, float(np.max(np.abs(sums[d:] - sums[d]))))
    return worst


def probability_map_rank(fam: BasisFamily) -> Dict[str, int]:
    """
    Rank of the real-linear Born map on Hermitian matrices

    The independent-parameter count is the rank less one for the trace.
    """
    d = fam.ctx.size
    if d > 16:
        raise DimensionError("the rank computation is limited to two ququarts")
    U = fam.stacked()
    outer = U.conj()[:, :, None, :] * U[:, None, :, :]   # (setup, i, j, outcome)
    columns = [outer[:, i, i, :].real.ravel() for i in range(d)]
    for i in range(d):
        for j in range(i + 1, d):
            columns.append(2 * outer[:, i, j, :].real.ravel())
            columns.append(-2 * outer[:, i, j, :].imag.ravel())
    rank = int(np.linalg.matrix_rank(np.stack(columns, axis=1)))
    return {"rank": rank, "expected": d * d, "independent": rank - 1}


def sample_counts(probs: ProbabilityTable, shots: int, seed: int, repeat: int = 0) -> CountTable:
    """
    Multinomial counts with `shots` draws per setup

    Each setup draws from its own substream keyed by (seed, repeat, setup
    index) through the inverse cumulative distribution over the outcomes of
    nonzero probability.
    """
    if shots < 1:
        raise NormalizationError(f"shots must be positive, got {shots}")
    values = probs.values
    counts = np.empty(values.shape, dtype=np.int64)
    for setup, p in enumerate(values):
        rng = substream(seed, repeat, setup)
        support = np.flatnonzero(p > 0)
        cdf = np.cumsum(p[support])
        cdf /= cdf[-1]
        cdf[-1] = 1.0
        # zero-probability outcomes are never drawn, whatever the rounding
        picks = np.minimum(np.searchsorted(cdf, rng.random(shots), side="right"), len(support) - 1)
        outcomes = support[picks]
        counts[setup] = np.bincount(outcomes, minlength=values.shape[1])
    return CountTable(probs.fam, counts, shots, seed, repeat)


def _repeat_error(rho: np.ndarray, probs: ProbabilityTable, shots: int, seed: int, repeat: int) -> float:
    counts = sample_counts(probs, shots, seed, repeat)
    estimate = reconstruct_projector(ProbabilityTable.frequencies(counts))
    return float(np.sum(np.abs(rho - estimate) ** 2))


def sampled_errors(
    rho: np.ndarray,
    fam: BasisFamily,
    shots: int,
    repeats: int,
    seed: int,
    n_jobs: int = 1,
    progress: bool = False
) -> np.ndarray:
    """Tr[(rho - rho_est)^2] for each of `repeats` sampled reconstructions"""
    probs = born_probabilities(rho, fam)
    errors = Parallel(n_jobs=n_jobs)(
        delayed(_repeat_error)(rho, probs, shots, seed, repeat)
        for repeat in tqdm(range(repeats), desc=f"M={shots}", disable=not progress, leave=False)
    )
    return np.asarray(errors)


def empirical_mse(
    rho: np.ndarray,
    fam: BasisFamily,
    shots: int,
    repeats: int,
    seed: int,
    n_jobs: int = 1,
    progress: bool = False
) -> float:
    """Mean Hilbert-Schmidt square error over independent sampled reconstructions"""
    return float(np.mean(sampled_errors(rho, fam, shots, repeats, seed, n_jobs, progress)))


def linear_inversion_mse(probs: ProbabilityTable) -> float:
    """
    Exact per-shot MSE of the projector reconstruction

    sum over setups of (1 + b) - sum_k p_k^2 - b sum_c P_c^2 with
    b = -(4^N - 1)/8^N and P_c the bar-class sums. empirical_mse * M
    converges to this value.
    """
    A = 2 ** probs.fam.ctx.N
    b = -(A * A - 1) / A ** 3
    P = probs.values
    per_setup = (1 + b) - np.sum(P ** 2, axis=1) - b * np.sum(class_sums(P, probs.fam) ** 2, axis=1)
    return float(per_setup.sum())
