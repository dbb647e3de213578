import numpy as np
import pytest

from interplab.grids import LogGrid


@pytest.fixture(scope="session")
def grid():
    return LogGrid(1e-6, 1e2, 2048)


@pytest.fixture(scope="session")
def coarse_grid():
    return LogGrid(1e-6, 1e2, 512)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
