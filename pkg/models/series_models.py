"""
Series Models.

These models carry truncated expansions through the pipeline:
    - TruncatedSeries: coefficients a_0..a_K with ring arithmetic
    - Prefactor: the factored-out leading monomial c * x^sigma
    - SeriesOracle: (order, theta) -> normalized series for one problem
"""

from dataclasses import dataclass, field
from enum import Enum
from numbers import Number
from typing import Callable, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_serializer, model_validator

from exceptions import OrderMismatchError

__all__ = [
    "TruncatedSeries",
    "PrefactorTag",
    "Prefactor",
    "SeriesOracle",
]


@dataclass(frozen=True, eq=False)
class TruncatedSeries:
    """Power series a_0 + a_1 x + ... + a_K x^K, truncated at order K.

    Coefficients are complex; products and sums stay truncated at K.
    Operands must share the same truncation order.
    """

    coefficients: np.ndarray
    variable_name: str = "x"

    # numpy scalars defer to the reflected operators below
    __array_ufunc__ = None

    def __post_init__(self):
        coeffs = np.array(self.coefficients, dtype=complex).ravel()
        if coeffs.size == 0:
            raise ValueError("A truncated series needs at least the constant term")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def zeros(cls, order: int, variable_name: str = "x") -> "TruncatedSeries":
        return cls(np.zeros(order + 1, dtype=complex), variable_name)

    @classmethod
    def constant(cls, value: complex, order: int, variable_name: str = "x") -> "TruncatedSeries":
        coeffs = np.zeros(order + 1, dtype=complex)
        coeffs[0] = value
        return cls(coeffs, variable_name)

    @classmethod
    def monomial(cls, power: int, order: int, variable_name: str = "x") -> "TruncatedSeries":
        """x^power truncated at order (zero when power > order)."""
        coeffs = np.zeros(order + 1, dtype=complex)
        if power <= order:
            coeffs[power] = 1.0
        return cls(coeffs, variable_name)

    @property
    def order(self) -> int:
        return self.coefficients.size - 1

    def __len__(self) -> int:
        return self.coefficients.size

    def __getitem__(self, index: int) -> complex:
        return complex(self.coefficients[index])

    def is_real(self, tolerance: float = 1e-12) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.coefficients))))
        return bool(np.all(np.abs(self.coefficients.imag) <= tolerance * scale))

    def _coerce(self, other) -> np.ndarray:
        if isinstance(other, TruncatedSeries):
            if other.order != self.order:
                raise OrderMismatchError(
                    "Series truncated at different orders cannot be combined",
                    {"left_order": self.order, "right_order": other.order},
                )
            return other.coefficients
        if isinstance(other, Number):
            coeffs = np.zeros_like(self.coefficients)
            coeffs[0] = other
            return coeffs
        return NotImplemented

    def _new(self, coeffs: np.ndarray) -> "TruncatedSeries":
        return TruncatedSeries(coeffs, self.variable_name)

    def __add__(self, other):
        coeffs = self._coerce(other)
        if coeffs is NotImplemented:
            return NotImplemented
        return self._new(self.coefficients + coeffs)

    __radd__ = __add__

    def __neg__(self):
        return self._new(-self.coefficients)

    def __sub__(self, other):
        coeffs = self._coerce(other)
        if coeffs is NotImplemented:
            return NotImplemented
        return self._new(self.coefficients - coeffs)

    def __rsub__(self, other):
        coeffs = self._coerce(other)
        if coeffs is NotImplemented:
            return NotImplemented
        return self._new(coeffs - self.coefficients)

    def __mul__(self, other):
        if isinstance(other, Number):
            return self._new(self.coefficients * other)
        coeffs = self._coerce(other)
        if coeffs is NotImplemented:
            return NotImplemented
        # Cauchy product truncated at K
        product = np.convolve(self.coefficients, coeffs)[: self.order + 1]
        return self._new(product)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Number):
            return self._new(self.coefficients / other)
        return NotImplemented

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int) or exponent < 0:
            return NotImplemented
        result = TruncatedSeries.constant(1.0, self.order, self.variable_name)
        for _ in range(exponent):
            result = result * self
        return result

    def derivative(self, times: int = 1) -> "TruncatedSeries":
        """d/dx, zero-padded at the top so the truncation order is kept."""
        coeffs = self.coefficients
        for _ in range(times):
            shifted = np.zeros_like(coeffs)
            shifted[:-1] = coeffs[1:] * np.arange(1, coeffs.size)
            coeffs = shifted
        return self._new(coeffs)

    def shift(self, power: int) -> "TruncatedSeries":
        """Multiply by x^power, keeping the truncation order."""
        coeffs = np.zeros_like(self.coefficients)
        if power <= self.order:
            coeffs[power:] = self.coefficients[: self.order + 1 - power]
        return self._new(coeffs)

    def truncate(self, order: int) -> "TruncatedSeries":
        if order > self.order:
            raise OrderMismatchError(
                "Cannot truncate a series above its own order",
                {"order": self.order, "requested": order},
            )
        return self._new(self.coefficients[: order + 1])

    def evaluate(self, x):
        """Horner evaluation of the truncated polynomial."""
        return np.polynomial.polynomial.polyval(x, self.coefficients)

    def allclose(self, other: "TruncatedSeries", rtol: float = 1e-12, atol: float = 1e-14) -> bool:
        return other.order == self.order and bool(
            np.allclose(self.coefficients, other.coefficients, rtol=rtol, atol=atol)
        )

    def __repr__(self) -> str:
        return f"TruncatedSeries(order={self.order}, variable={self.variable_name!r})"


class PrefactorTag(str, Enum):
    """Closed form of the zero-order factor f_0."""

    POWER = "power"
    UNIT = "unit"


class Prefactor(BaseModel):
    """Leading monomial c * x^sigma factored out of a series before summation."""

    model_config = ConfigDict(frozen=True)

    leading_scale: complex = Field(default=1.0, description="Amplitude c of the leading monomial")
    zero_exponent: int = Field(default=0, ge=0, description="sigma with f_0(x) ~ x^sigma as x -> 0")
    infinity_exponent: float | None = Field(
        default=0.0, description="alpha with f_0(x) ~ c x^alpha as x -> infinity"
    )
    functional_tag: PrefactorTag = Field(default=PrefactorTag.UNIT)

    @model_validator(mode="after")
    def _unit_is_trivial(self) -> "Prefactor":
        if self.functional_tag is PrefactorTag.UNIT and (
            self.leading_scale != 1 or self.zero_exponent != 0 or self.infinity_exponent != 0
        ):
            raise ValueError("A unit prefactor must have scale 1 and zero exponents")
        return self

    @field_serializer("leading_scale", when_used="json")
    def _complex_pair(self, value: complex) -> list[float]:
        return [value.real, value.imag]

    @classmethod
    def unit(cls) -> "Prefactor":
        return cls()

    @classmethod
    def power(cls, leading_scale: complex, exponent: int) -> "Prefactor":
        if exponent == 0 and leading_scale == 1:
            return cls.unit()
        return cls(
            leading_scale=leading_scale,
            zero_exponent=exponent,
            infinity_exponent=float(exponent),
            functional_tag=PrefactorTag.POWER,
        )


@dataclass(frozen=True)
class SeriesOracle:
    """Deterministic (order, theta) -> series map for one problem.

    `generator` returns the raw series in the working variable; `normalized`
    splits off the prefactor and re-indexes in x^step.
    """

    generator: Callable[[int, Sequence[float]], TruncatedSeries] = field(repr=False)
    parameter_names: tuple[str, ...] = ()
    step: int = 1
    leading_exponent: int = 0

    def raw(self, order: int, theta: Sequence[float] = ()) -> TruncatedSeries:
        return self.generator(order, tuple(theta))

    def normalized(self, order: int, theta: Sequence[float] = ()) -> tuple[Prefactor, TruncatedSeries]:
        """Prefactor plus normalized series of truncation order `order` in x^step."""
        from services.series import normalize

        raw = self.raw(self.leading_exponent + self.step * order, theta)
        return normalize(raw, self.step, expected_order=order)
