"""
Complete MUB sets for n qubits, used as the comparison scheme for ququarts.

The family is the s = 1 instance of the ququart construction: 2^n ray
bases over GF(2^n) with phases i^{-T_4(lift(lambda) lift(gamma)^2)} plus the
inverse Fourier basis. A ququart register of N particles compares with
n = 2N qubits.
"""
import logging
from typing import Optional

import numpy as np

from bases.mub_bases import (
    BasisFamily, get_family, get_phase_context, phase_equation_check,
    spectral_check
)
from config.settings import MAX_QUBITS, NORMALIZATION_TOL, PROB_TOL
from utils.errors import DimensionError, NormalizationError, RingSpecError

logger = logging.getLogger(__name__)

# 2^n + 1 bases of dimension 2^n
QubitMubFamily = BasisFamily


def qubit_mub_build(n: int) -> QubitMubFamily:
    """
    Build the 2^n + 1 mutually unbiased bases of n qubits

    Args:
        n: Number of qubits, 1..MAX_QUBITS

    Returns:
        Shared family over GF(2^n)
    """
    if not 1 <= n <= MAX_QUBITS:
        raise RingSpecError(f"qubit count must lie in [1, {MAX_QUBITS}], got {n}")
    return get_family(n, s=1)


def _check_state(rho: np.ndarray, fam: QubitMubFamily) -> None:
    d = fam.ctx.size
    if rho.shape != (d, d):
        raise DimensionError(f"state of shape {rho.shape} does not fit {d} levels")


def qubit_born_probabilities(rho: np.ndarray, fam: QubitMubFamily) -> np.ndarray:
    """(bases, outcomes) array of <psi|rho|psi>, ray bases first"""
    _check_state(rho, fam)
    U = fam.stacked()
    probs = np.einsum("sik,ij,sjk->sk", U.conj(), rho, U).real
    return np.clip(probs, 0.0, 1.0)


def qubit_reconstruct(probs: np.ndarray, fam: QubitMubFamily) -> np.ndarray:
    """rho = sum_{bases, k} p_k |psi_k><psi_k| - I"""
    d = fam.ctx.size
    if probs.shape != (len(fam), d):
        raise DimensionError(f"expected {len(fam)}x{d} probabilities, got {probs.shape}")
    sums = probs.sum(axis=1)
    worst = float(np.max(np.abs(sums - 1)))
    if worst > NORMALIZATION_TOL:
        raise NormalizationError(f"basis probabilities off by {worst:.3e}")

    U = fam.stacked()
    rho = np.einsum("sik,sk,sjk->ij", U, probs, U.conj()) - np.eye(d)
    min_eig = float(np.linalg.eigvalsh((rho + rho.conj().T) / 2)[0])
    if min_eig < -PROB_TOL:
        logger.debug("Qubit reconstruction is not positive (min eigenvalue %.3e)", min_eig)
    return rho


def qubit_mse_bound(rho: np.ndarray, fam: Optional[QubitMubFamily] = None) -> float:
    """
    Minimum per-shot square error of MUB tomography

    d + 1 - sum over every basis and outcome of p^2, with exact Born
    probabilities.
    """
    if fam is None:
        n = int(round(np.log2(rho.shape[0])))
        fam = qubit_mub_build(n)
    probs = qubit_born_probabilities(rho, fam)
    return float(fam.ctx.size + 1 - np.sum(probs ** 2))


def qubit_spectral_check(fam: QubitMubFamily) -> float:
    return spectral_check(fam)


def qubit_phase_equation_check(fam: QubitMubFamily) -> float:
    """Max violation of c_{a+g} = c_a c_g (-1)^{tr(a g lambda)}"""
    return phase_equation_check(get_phase_context(fam.ctx))
