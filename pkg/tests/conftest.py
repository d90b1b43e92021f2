import numpy as np
import pytest

from acband.common.rng import SeededRng
from acband.oracle import MatrixOracle, RunTrace, RuntimeMatrix


@pytest.fixture
def make_matrix():
    def _make(values, timeout=10.0):
        return RuntimeMatrix.from_array(np.asarray(values, dtype=float), timeout)

    return _make


@pytest.fixture
def make_oracle():
    """Fresh matrix oracle with a kept trace."""

    def _make(matrix, seed=0, k=None):
        return MatrixOracle(matrix, SeededRng(seed).fork("oracle"), k=k, trace=RunTrace())

    return _make


@pytest.fixture
def ranked_matrix(make_matrix):
    """Configuration c takes c + 1 seconds on every instance."""

    def _make(n_configs, n_instances, timeout=1000.0):
        values = np.repeat(np.arange(1, n_configs + 1, dtype=float)[:, None], n_instances, axis=1)
        return make_matrix(values, timeout)

    return _make
