"""
Problem and Constraint Models.

    - Condition: value/derivative at a point, or power-law behaviour at infinity
    - ConstrainedSolveSpec: series oracle + conditions + order + shooting brackets
    - ShootingCandidate / ShootingResult: constrained solutions ranked by quality
    - VariableTransform: native variable <-> working variable, with chain-rule factors
    - ProblemParameters / ProblemSpec: one executable ODE benchmark
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from models.factor_models import FactorForm
from models.series_models import SeriesOracle, TruncatedSeries

__all__ = [
    "ConditionKind",
    "Condition",
    "ConstrainedSolveSpec",
    "ShootingCandidate",
    "ShootingResult",
    "VariableTransform",
    "ProblemParameters",
    "ReferenceSetup",
    "ProblemSpec",
    "ProblemInfo",
]

Triple = tuple[np.ndarray, np.ndarray, np.ndarray]


class ConditionKind(str, Enum):
    VALUE_AT_POINT = "value_at_point"
    DERIVATIVE_AT_POINT = "derivative_at_point"
    ASYMPTOTIC_POWER = "asymptotic_power"


class Condition(BaseModel):
    """One imposed condition f(x1) = f1, f'(x1) = f1, or f(x) ~ B x^beta at infinity."""

    model_config = ConfigDict(frozen=True)

    kind: ConditionKind
    location: float = Field(description="Point x1, or +inf for asymptotic conditions")
    target: float = Field(description="f1, f'(x1), or the amplitude B")
    exponent: float | None = Field(default=None, description="beta (asymptotic only)")

    @model_validator(mode="after")
    def _asymptotic_at_infinity(self) -> "Condition":
        if self.kind is ConditionKind.ASYMPTOTIC_POWER:
            if not math.isinf(self.location) or self.exponent is None:
                raise ValueError("asymptotic_power needs location = inf and an exponent")
        elif not math.isfinite(self.location):
            raise ValueError("point conditions need a finite location")
        return self

    @classmethod
    def value(cls, location: float, target: float) -> "Condition":
        return cls(kind=ConditionKind.VALUE_AT_POINT, location=location, target=target)

    @classmethod
    def derivative(cls, location: float, target: float) -> "Condition":
        return cls(kind=ConditionKind.DERIVATIVE_AT_POINT, location=location, target=target)

    @classmethod
    def asymptotic(cls, amplitude: float, exponent: float) -> "Condition":
        return cls(
            kind=ConditionKind.ASYMPTOTIC_POWER,
            location=math.inf,
            target=amplitude,
            exponent=exponent,
        )

    @property
    def is_asymptotic(self) -> bool:
        return self.kind is ConditionKind.ASYMPTOTIC_POWER


@dataclass(frozen=True)
class ConstrainedSolveSpec:
    """Everything the constrained solve needs besides tolerances.

    Conditions located at `expansion_point` hold by construction of the series
    and are verified, not solved.
    """

    oracle: SeriesOracle
    conditions: tuple[Condition, ...]
    order: int
    parameter_brackets: tuple[tuple[float, float], ...] | None = None
    expansion_point: float = 0.0


class ShootingCandidate(BaseModel):
    """A form satisfying all conditions for one root theta of the shooting residual."""

    model_config = ConfigDict(frozen=True)

    form: FactorForm
    theta: tuple[float, ...] = ()
    residuals: tuple[float, ...] = ()
    quality: float | None = Field(default=None, description="Ranking score (coarse-grid defect)")


class ShootingResult(BaseModel):
    """Best candidate plus alternates, ordered by quality."""

    model_config = ConfigDict(frozen=True)

    best: ShootingCandidate
    alternates: tuple[ShootingCandidate, ...] = ()

    @property
    def form(self) -> FactorForm:
        return self.best.form

    @property
    def theta(self) -> tuple[float, ...]:
        return self.best.theta


@dataclass(frozen=True)
class VariableTransform:
    """Native t -> working s = s(t), and u(t) = m(t) * f(s(t)) + q(t).

    Each callable returns the value with its first and second t-derivatives.
    """

    working: Callable[[np.ndarray], Triple]
    inverse: Callable[[np.ndarray], np.ndarray]
    multiplier: Callable[[np.ndarray], Triple] | None = None
    offset: Callable[[np.ndarray], Triple] | None = None
    description: str = "s = t"

    def to_working(self, t) -> np.ndarray:
        return self.working(np.asarray(t, dtype=float))[0]

    def to_native(self, s) -> np.ndarray:
        return self.inverse(np.asarray(s, dtype=float))

    def compose(self, t: np.ndarray, f: np.ndarray, f1: np.ndarray, f2: np.ndarray) -> Triple:
        """Native value and derivatives from working-variable ones (chain rule)."""
        _, s1, s2 = self.working(t)
        g = f
        g1 = f1 * s1
        g2 = f2 * s1**2 + f1 * s2
        if self.multiplier is not None:
            m, m1, m2 = self.multiplier(t)
            g, g1, g2 = m * g, m1 * g + m * g1, m2 * g + 2.0 * m1 * g1 + m * g2
        if self.offset is not None:
            q, q1, q2 = self.offset(t)
            g, g1, g2 = g + q, g1 + q1, g2 + q2
        return g, g1, g2


class ProblemParameters(BaseModel):
    """Equation parameter epsilon and, for the logistic problem, the initial value p0."""

    model_config = ConfigDict(frozen=True)

    epsilon: float = 1.0
    p0: float | None = None


@dataclass(frozen=True)
class ReferenceSetup:
    """First-order native system for the numerical reference.

    kind = "ivp": integrate `initial_state` from the left end of the domain.
    kind = "bvp": shoot on the unknown initial slope so that u(right) = `right_value`.
    """

    kind: Literal["ivp", "bvp"]
    rhs: Callable[[float, np.ndarray], np.ndarray]
    initial_state: tuple[float, ...] = ()
    left_value: float = 0.0
    right_value: float = 0.0
    slope_guesses: tuple[float, float] = (1.0, 2.0)


@dataclass(frozen=True)
class ProblemSpec:
    """An executable ODE benchmark.

    series_residual builds the working residual from truncated series; its
    order-m coefficient is affine in a_m at index m - order_offset.
    order_shift is the number of leading series terms a table order k counts on top
    of the moment equations (1 when the factored-out monomial a_1 x is itself counted).
    """

    name: str
    description: str
    parameters: ProblemParameters
    native_residual: Callable[[np.ndarray, np.ndarray, np.ndarray, np.ndarray, ProblemParameters], np.ndarray]
    series_residual: Callable[[TruncatedSeries, TruncatedSeries, ProblemParameters], TruncatedSeries]
    coefficient_presets: Callable[[tuple[float, ...], ProblemParameters], dict[int, complex]]
    order_offset: int
    transform: VariableTransform
    domain: tuple[float, float]
    conditions: tuple[Condition, ...] = ()
    native_conditions: tuple[Condition, ...] = ()
    parameter_names: tuple[str, ...] = ()
    parameter_brackets: tuple[tuple[float, float], ...] | None = None
    leading_exponent: int = 0
    step: int = 1
    min_order: int = 1
    order_shift: int = 0
    working_variable: str = "x"
    native_variable: str = "t"
    exact: Callable[[np.ndarray], Triple] | None = field(default=None, repr=False)
    reference: ReferenceSetup | None = field(default=None, repr=False)

    @property
    def oracle(self) -> SeriesOracle:
        from services.series import series_from_ode

        return SeriesOracle(
            generator=lambda order, theta: series_from_ode(self, order, theta),
            parameter_names=self.parameter_names,
            step=self.step,
            leading_exponent=self.leading_exponent,
        )

    @property
    def has_exact(self) -> bool:
        return self.exact is not None

    def constrained_spec(self, order: int) -> ConstrainedSolveSpec:
        """Working-variable solve for table order k; k - order_shift moment equations."""
        return ConstrainedSolveSpec(
            oracle=self.oracle,
            conditions=self.conditions,
            order=order - self.order_shift,
            parameter_brackets=self.parameter_brackets,
        )

    def grid(self, points: int) -> np.ndarray:
        """Uniform native-variable grid over the diagnostic domain."""
        return np.linspace(self.domain[0], self.domain[1], points)


class ProblemInfo(BaseModel):
    """Catalog listing entry."""

    model_config = ConfigDict(frozen=True)

    name: str
    description: str
    domain: str = Field(description="Diagnostic interval in the native variable")
    parameters: tuple[str, ...] = Field(default=(), description="Validity ranges of eps / p0")
    has_exact: bool
    has_reference: bool
    min_order: int = 1
