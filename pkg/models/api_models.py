"""
Run configuration and API Request/Response Models.

These models define the contract for both front ends:
    - RunConfig: one CLI run (flags and --config JSON merge into it)
    - ErrorResponse: Standard error format
    - SolveRequest / SolveResponse: parameter dump of one solved problem
    - TableRequest / TableResponse: table rows, null cells for failed orders
    - ProblemListResponse: catalog listing
"""

from typing import Any

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from constants import CurveMetric, OutputFormat, TableDefinition
from models.problem_models import ProblemInfo

__all__ = [
    "RunConfig",
    "ErrorResponse",
    "SolveRequest",
    "SolveResponse",
    "TableRequest",
    "TableResponse",
    "ProblemListResponse",
]


class RunConfig(BaseModel):
    """Everything one CLI invocation needs; round-trips through JSON unchanged."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    problem: str | None = Field(default=None, description="Catalog problem name")
    orders: tuple[int, ...] = Field(default=(), description="Approximant orders k")
    epsilons: tuple[float, ...] = Field(default=(), description="Small-parameter values")
    p0: float | None = Field(default=None, description="Logistic initial value")
    name: str | None = Field(default=None, description="Reproducible table name (table1..table5)")
    metric: str = Field(default=CurveMetric.DEFECT)
    compare: bool = Field(default=False, description="Append printed values and relative deviations")
    with_error: bool = Field(default=False, description="Explicit sweeps: add error columns against the reference")
    grid_points: int | None = Field(default=None, ge=3)
    format: str = Field(default=OutputFormat.CSV)
    out: str | None = Field(default=None, description="Output path; stdout when absent")
    seed: int | None = None
    tolerance: float | None = Field(default=None, gt=0.0, description="Acceptance tolerance override")

    @field_validator("orders")
    @classmethod
    def _positive_orders(cls, orders: tuple[int, ...]) -> tuple[int, ...]:
        if any(k < 1 for k in orders):
            raise ValueError("orders must be positive")
        return orders

    @field_validator("format")
    @classmethod
    def _known_format(cls, value: str) -> str:
        if value not in OutputFormat.ALL:
            raise ValueError(f"format must be one of {OutputFormat.ALL}")
        return value

    @field_validator("metric")
    @classmethod
    def _known_metric(cls, value: str) -> str:
        if value not in CurveMetric.ALL:
            raise ValueError(f"metric must be one of {CurveMetric.ALL}")
        return value

    @field_validator("name")
    @classmethod
    def _known_table(cls, value: str | None) -> str | None:
        if value is not None and value not in TableDefinition.NAMES:
            raise ValueError(f"name must be one of {TableDefinition.NAMES}")
        return value

    @property
    def epsilon(self) -> float | None:
        return self.epsilons[0] if self.epsilons else None

    def settings_overrides(self) -> dict[str, Any]:
        """Fields to apply to SolverSettings via model_copy(update=...)."""
        overrides: dict[str, Any] = {}
        if self.grid_points is not None:
            overrides["grid_points"] = self.grid_points
        if self.seed is not None:
            overrides["seed"] = self.seed
        if self.tolerance is not None:
            overrides["acceptance_tolerance"] = self.tolerance
            overrides["constraint_tolerance"] = self.tolerance
        return overrides

    def merged(self, **flags: Any) -> "RunConfig":
        """Copy with every non-empty flag value taking precedence."""
        update = {k: v for k, v in flags.items() if v is not None and v != ()}
        return RunConfig.model_validate({**self.model_dump(), **update})


class ErrorResponse(BaseModel):
    """Standard error response format."""

    error: str
    error_type: str | None = None
    message: str
    details: dict[str, Any] | None = None


class SolveRequest(BaseModel):
    problem: str
    order: int = Field(ge=1)
    epsilon: float | None = None
    p0: float | None = None


class FactorRecord(BaseModel):
    """One factor; complex values are [re, im] pairs, real values plain floats."""

    kind: str
    A: float | list[float]
    n: float | list[float]
    b: float | list[float]


class SolveResponse(BaseModel):
    """
    Approximant parameters of one solved problem.

    Used by: POST /api/v1/solve and the CLI solve command
    """

    problem: str
    order: int
    epsilon: float | None = None
    p0: float | None = None
    c: float | list[float] = Field(description="Leading amplitude of the prefactor")
    sigma: int = Field(description="Prefactor exponent at the expansion point")
    step: int
    factors: list[FactorRecord]
    theta: dict[str, float] = Field(default_factory=dict, description="Shooting parameters")
    constraint_residuals: list[float] = Field(default_factory=list)
    native_condition_residuals: list[float] = Field(default_factory=list)
    moment_residual: float = 0.0
    alternates: list[dict[str, Any]] = Field(default_factory=list)


class TableRequest(BaseModel):
    """Either a named table or an explicit sweep."""

    name: str | None = None
    problem: str | None = None
    orders: list[int] = Field(default_factory=list)
    epsilons: list[float] = Field(default_factory=lambda: [1.0])
    p0: float | None = None
    with_error: bool = False
    compare: bool = False

    @model_validator(mode="after")
    def _named_or_explicit(self) -> "TableRequest":
        if self.name is None and (self.problem is None or not self.orders):
            raise ValueError("give a table name or a problem with orders")
        return self


class TableResponse(BaseModel):
    name: str | None = None
    problem: str
    columns: list[str]
    rows: list[dict[str, float | int | None]]


class ProblemListResponse(BaseModel):
    problems: list[ProblemInfo]
