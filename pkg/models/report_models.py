"""
Diagnostic Report Models.

    - DefectReport: pointwise defects/errors on a grid and their maxima D, Delta, delta
    - StabilizationReport: differences between approximants of consecutive orders
    - TableCell: one (problem, order, epsilon) entry of an accuracy table
"""

from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

__all__ = [
    "DefectReport",
    "StabilizationReport",
    "TableCell",
]


class DefectReport(BaseModel):
    """Solution defect |E[y*]| and optional error |y* - y| on a native grid."""

    model_config = ConfigDict(frozen=True)

    grid: tuple[float, ...] = Field(description="Native-variable points that evaluated cleanly")
    defect_values: tuple[float, ...]
    error_values: tuple[float, ...] | None = None
    max_defect: float = Field(ge=0.0, description="D: supremum of the defect")
    max_error: float | None = Field(default=None, ge=0.0, description="Delta: supremum of the error")
    ratio: float | None = Field(default=None, ge=0.0, description="delta = Delta / D")
    order: int
    epsilon: float | None = None
    excluded_points: tuple[float, ...] = Field(
        default=(), description="Grid points where evaluation failed"
    )

    @model_validator(mode="after")
    def _consistent(self) -> "DefectReport":
        if len(self.defect_values) != len(self.grid):
            raise ValueError("defect_values must align with grid")
        if any(v < 0 for v in self.defect_values):
            raise ValueError("defect values must be non-negative")
        if self.error_values is not None:
            if len(self.error_values) != len(self.grid):
                raise ValueError("error_values must align with grid")
            if self.max_error is None:
                raise ValueError("max_error required with error_values")
        return self

    @property
    def warning_count(self) -> int:
        return len(self.excluded_points)

    @classmethod
    def from_defects(
        cls,
        grid: np.ndarray,
        defects: np.ndarray,
        *,
        order: int,
        epsilon: float | None = None,
        excluded: np.ndarray | None = None,
    ) -> "DefectReport":
        defects = np.abs(np.asarray(defects, dtype=float))
        return cls(
            grid=tuple(float(v) for v in grid),
            defect_values=tuple(float(v) for v in defects),
            max_defect=float(np.max(defects)) if defects.size else 0.0,
            order=order,
            epsilon=epsilon,
            excluded_points=() if excluded is None else tuple(float(v) for v in excluded),
        )

    @classmethod
    def from_residuals(
        cls,
        grid: np.ndarray,
        residuals: np.ndarray,
        *,
        order: int,
        epsilon: float | None = None,
    ) -> "DefectReport":
        """Report over the points where the residual is finite; the rest are excluded."""
        grid = np.asarray(grid, dtype=float)
        residuals = np.asarray(residuals)
        finite = np.isfinite(residuals)
        return cls.from_defects(
            grid[finite],
            residuals[finite],
            order=order,
            epsilon=epsilon,
            excluded=grid[~finite],
        )

    def with_errors(self, errors: np.ndarray) -> "DefectReport":
        """Copy with error fields filled; delta = Delta / D."""
        errors = np.abs(np.asarray(errors, dtype=float))
        max_error = float(np.max(errors)) if errors.size else 0.0
        ratio = max_error / self.max_defect if self.max_defect > 0 else None
        return self.model_copy(
            update={
                "error_values": tuple(float(v) for v in errors),
                "max_error": max_error,
                "ratio": ratio,
            }
        )

    def summary(self) -> dict[str, Any]:
        return {
            "order": self.order,
            "epsilon": self.epsilon,
            "D": self.max_defect,
            "Delta": self.max_error,
            "delta": self.ratio,
            "excluded_points": self.warning_count,
        }


class StabilizationReport(BaseModel):
    """Sup-norm differences between consecutive approximants on a grid."""

    model_config = ConfigDict(frozen=True)

    differences: tuple[float, ...]
    threshold: float
    stabilized: bool


class TableCell(BaseModel):
    """One computed (or failed) table entry; failures leave the values null."""

    problem: str
    order: int
    epsilon: float | None = None
    max_defect: float | None = None
    max_error: float | None = None
    ratio: float | None = None
    root_defect: float | None = None
    error_type: str | None = Field(default=None, description="Failure category when the cell is absent")
    message: str | None = None

    @property
    def failed(self) -> bool:
        return self.error_type is not None
