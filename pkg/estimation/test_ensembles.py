import numpy as np
import pytest

from config.run_config import StateEnsembleSpec
from estimation.ensembles import (
    maximally_mixed, random_mixed, random_pure, random_state, state_at,
    substream
)
from estimation.tomography import validate_density_matrix


def test_pure_states_have_unit_purity():
    rng = substream(1, 2)
    for _ in range(20):
        rho = random_pure(4, rng)
        assert np.trace(rho @ rho).real == pytest.approx(1, abs=1e-12)
        validate_density_matrix(rho, 4, physical=True)


def test_mixed_states_are_physical():
    rng = substream(3)
    for _ in range(20):
        validate_density_matrix(random_mixed(16, rng), 16, physical=True)


def test_hilbert_schmidt_mean_purity():
    spec = StateEnsembleSpec(kind="mixed", dim=4, count=10000, seed=5)
    purities = [np.real(np.sum(rho * rho.T)) for rho in random_state(spec)]
    assert np.mean(purities) == pytest.approx(8 / 17, rel=0.02)


def test_same_seed_same_stream():
    spec = StateEnsembleSpec(kind="pure", dim=4, count=5, seed=9)
    first = list(random_state(spec))
    second = list(random_state(spec))
    for a, b in zip(first, second):
        np.testing.assert_array_equal(a, b)
    np.testing.assert_array_equal(first[3], state_at(spec, 3))
    assert not np.allclose(first[0], first[1])


def test_maximally_mixed():
    np.testing.assert_allclose(maximally_mixed(4), np.eye(4) / 4)
