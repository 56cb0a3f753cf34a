"""Central configuration for the factor approximant solver."""

from functools import lru_cache

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class SolverSettings(BaseSettings):
    """Solver configuration loaded from environment variables (prefix FACTORAPPROX_)."""

    model_config = SettingsConfigDict(
        env_file=".env", env_prefix="FACTORAPPROX_", extra="ignore"
    )

    # Newton refinement of the power-sum system
    newton_tolerance: float = 1e-12
    newton_max_iterations: int = 50
    acceptance_tolerance: float = 1e-10

    # Prony reduction
    node_zero_tolerance: float = 1e-8
    pairing_tolerance: float = 1e-8
    hankel_rank_tolerance: float = 1e-13
    weight_drop_tolerance: float = 1e-10
    jitter_restarts: int = 4
    seed: int = 0

    # Shooting over series parameters
    constraint_tolerance: float = 1e-9
    bracket_points: int = 64
    bracket_low: float = 1e-3
    bracket_high: float = 10.0

    # Diagnostics
    grid_points: int = Field(default=2001, ge=3)
    ranking_grid_points: int = Field(default=201, ge=3)
    reference_tolerance: float = 1e-10

    # Table cell cache
    cache_enabled: bool = False
    cache_dir: str = ".cache/tables"
    cache_size_mb: int = 64

    # Sweep concurrency (None lets the executor choose)
    max_workers: int | None = None


@lru_cache(maxsize=1)
def get_settings() -> SolverSettings:
    """Process-wide default settings (cached via @lru_cache)."""
    return SolverSettings()
