"""
Factor Approximant Models.

    - MomentVector: log-derivative moments B_1..B_k of a normalized series
    - Factor: one binomial (1 + A x)^n, or its confluent exponential limit e^{b x}
    - FactorForm: prefactor times a product of factors in the variable x^step
"""

from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator, model_validator

from models.series_models import Prefactor

__all__ = [
    "MomentVector",
    "FactorKind",
    "Factor",
    "FactorForm",
]


def _complex_from_pair(value):
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(value[0], value[1])
    return value


class MomentVector(BaseModel):
    """Moments B_1..B_k; B_n equals the power sum of the factor parameters."""

    model_config = ConfigDict(frozen=True)

    values: tuple[complex, ...] = Field(min_length=1, description="B_1..B_k")

    @property
    def order(self) -> int:
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=complex)

    def is_real(self, tolerance: float = 1e-12) -> bool:
        values = self.as_array()
        return bool(np.all(np.abs(values.imag) <= tolerance * max(1.0, float(np.max(np.abs(values))))))

    @field_validator("values", mode="before")
    @classmethod
    def _accept_pairs(cls, values):
        return tuple(_complex_from_pair(v) for v in values)

    @field_serializer("values", when_used="json")
    def _pairs(self, values: tuple[complex, ...]) -> list[list[float]]:
        return [[v.real, v.imag] for v in values]


class FactorKind(str, Enum):
    """Factor kinds: binomial power or its A -> 0 exponential limit."""

    POWER = "power"
    EXPONENTIAL = "exponential"


class Factor(BaseModel):
    """(1 + A x)^n for kind=power, e^{b x} for kind=exponential."""

    model_config = ConfigDict(frozen=True)

    kind: FactorKind = Field(default=FactorKind.POWER)
    A: complex = Field(default=0.0, description="Node")
    n: complex = Field(default=0.0, description="Exponent (power kind)")
    b: complex = Field(default=0.0, description="Rate (exponential kind)")

    @field_validator("A", "n", "b", mode="before")
    @classmethod
    def _accept_pairs(cls, value):
        return _complex_from_pair(value)

    @model_validator(mode="after")
    def _node_matches_kind(self) -> "Factor":
        if self.kind is FactorKind.POWER and self.A == 0:
            raise ValueError("A power factor needs a nonzero node")
        return self

    @field_serializer("A", "n", "b", when_used="json")
    def _pair(self, value: complex) -> list[float]:
        return [value.real, value.imag]

    @classmethod
    def power(cls, A: complex, n: complex) -> "Factor":
        return cls(kind=FactorKind.POWER, A=A, n=n)

    @classmethod
    def exponential(cls, b: complex) -> "Factor":
        return cls(kind=FactorKind.EXPONENTIAL, b=b)

    def moment(self, m: int) -> complex:
        """Contribution of this factor to the power sum B_m."""
        if self.kind is FactorKind.EXPONENTIAL:
            return self.b if m == 1 else 0.0
        return self.n * self.A**m


class FactorForm(BaseModel):
    """y(x) = c x^sigma * prod_i (1 + A_i x^step)^{n_i} * exp(sum_j b_j x^step)."""

    model_config = ConfigDict(frozen=True)

    prefactor: Prefactor = Field(default_factory=Prefactor.unit)
    factors: tuple[Factor, ...] = Field(default=())
    order: int = Field(ge=0, description="Number of matched series terms k")
    step: int = Field(default=1, ge=1, description="Expansion variable is x^step")
    real: bool = Field(default=True, description="Declared real: complex factors come in conjugate pairs")
    residual: float = Field(default=0.0, ge=0.0, description="Scaled residual of the moment equations")

    @property
    def power_factors(self) -> tuple[Factor, ...]:
        return tuple(f for f in self.factors if f.kind is FactorKind.POWER)

    @property
    def exponential_rate(self) -> complex:
        return sum((f.b for f in self.factors if f.kind is FactorKind.EXPONENTIAL), 0j)

    def nodes(self) -> np.ndarray:
        return np.array([f.A for f in self.power_factors], dtype=complex)

    def exponents(self) -> np.ndarray:
        return np.array([f.n for f in self.power_factors], dtype=complex)

    def moments(self, order: int) -> np.ndarray:
        """Power sums sum_i n_i A_i^m (+ b for m = 1), m = 1..order."""
        return np.array(
            [sum((f.moment(m) for f in self.factors), 0j) for m in range(1, order + 1)],
            dtype=complex,
        )

    def evaluate(self, x):
        from services.factor_evaluation import evaluate

        return evaluate(self, x)

    def expand(self, order: int):
        """Maclaurin re-expansion divided by the prefactor, in x^step."""
        from services.factor_evaluation import expand_form

        return expand_form(self, order)

    def limit_at_infinity(self) -> tuple[complex, complex]:
        from services.factor_evaluation import limit_at_infinity

        return limit_at_infinity(self)
