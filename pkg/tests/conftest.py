"""Shared fixtures."""

import logfire
import numpy as np
import pytest
from hypothesis import settings as hypothesis_settings

from config import SolverSettings

logfire.configure(send_to_logfire=False, console=False)

hypothesis_settings.register_profile("numeric", deadline=None, max_examples=40)
hypothesis_settings.load_profile("numeric")


@pytest.fixture
def solver_settings() -> SolverSettings:
    """Defaults, independent of any FACTORAPPROX_ environment."""
    return SolverSettings(_env_file=None, cache_enabled=False)


@pytest.fixture
def coarse_settings(solver_settings) -> SolverSettings:
    return solver_settings.model_copy(update={"grid_points": 401, "ranking_grid_points": 101})


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(7)
