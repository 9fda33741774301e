"""
Random test states and seeded substreams.

Every random draw in the estimation package goes through substream(), a
Philox generator keyed by a SeedSequence built from the master seed and the
position of the draw (state index, repeat, setup), so results do not depend
on execution order or worker count.
"""
from typing import Iterator

import numpy as np

from config.run_config import StateEnsembleSpec


def substream(*entropy: int) -> np.random.Generator:
    """Counter-based generator for the given (seed, index, ...) key"""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(e) for e in entropy])))


def random_pure(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Fubini-Study (Haar) random pure state as a density matrix"""
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    return np.outer(v, v.conj())


def random_mixed(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Hilbert-Schmidt random state G G^dagger / Tr(G G^dagger)"""
    G = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = G @ G.conj().T
    rho = (rho + rho.conj().T) / 2
    return rho / np.trace(rho).real


def maximally_mixed(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=complex) / dim


def state_at(spec: StateEnsembleSpec, index: int) -> np.ndarray:
    """The index-th state of the ensemble"""
    rng = substream(spec.seed, index)
    if spec.kind == "pure":
        return random_pure(spec.dim, rng)
    return random_mixed(spec.dim, rng)


def random_state(spec: StateEnsembleSpec) -> Iterator[np.ndarray]:
    """
    Stream spec.count states of the requested ensemble

    Args:
        spec: Ensemble kind, dimension, count and seed

    Yields:
        Density matrices, reproducible per (seed, index)
    """
    for index in range(spec.count):
        yield state_at(spec, index)
