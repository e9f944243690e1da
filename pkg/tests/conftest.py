import numpy as np
import pytest

from arhbench.grid import make_grid, sine_basis
from arhbench.scenario import Regime, ScenarioSpec, validate


@pytest.fixture(scope="session")
def fine_grid():
    return make_grid(0.0, 4.0, 0.01)


@pytest.fixture(scope="session")
def fine_basis(fine_grid):
    return sine_basis(fine_grid, 50)


@pytest.fixture(scope="session")
def diag_ops():
    return validate(ScenarioSpec(regime=Regime.DIAGONAL, delta1=1.5, delta2=1.1, c2=0.8))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
