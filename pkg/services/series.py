"""
Truncated series arithmetic and order-by-order series generation.

Flow (series_from_ode):
    [1] Start from the coefficient presets fixed by conditions at the expansion point
    [2] For each order m, evaluate the working residual with a_m = 0, 1, 2
    [3] Read the residual coefficient at index m - d (d = the problem's order offset)
    [4] Solve the affine equation for a_m; reject non-affine or singular orders
"""

from typing import TYPE_CHECKING, Sequence

import logfire
import numpy as np

from exceptions import (
    UnderDeterminedError,
    UnsupportedProblemError,
    ZeroConstantTermError,
)
from models.series_models import Prefactor, TruncatedSeries

if TYPE_CHECKING:
    from models.problem_models import ProblemSpec

__all__ = [
    "add",
    "mul",
    "div",
    "log",
    "exp",
    "reciprocal",
    "derivative",
    "shift",
    "scale",
    "truncate",
    "evaluate",
    "normalize",
    "series_from_ode",
]

_AFFINE_TOLERANCE = 1e-9
_SLOPE_TOLERANCE = 1e-12


def add(s: TruncatedSeries, t: TruncatedSeries) -> TruncatedSeries:
    return s + t


def mul(s: TruncatedSeries, t: TruncatedSeries) -> TruncatedSeries:
    return s * t


def scale(s: TruncatedSeries, factor: complex) -> TruncatedSeries:
    return s * factor


def derivative(s: TruncatedSeries, times: int = 1) -> TruncatedSeries:
    return s.derivative(times)


def shift(s: TruncatedSeries, power: int) -> TruncatedSeries:
    return s.shift(power)


def truncate(s: TruncatedSeries, order: int) -> TruncatedSeries:
    return s.truncate(order)


def evaluate(s: TruncatedSeries, x):
    return s.evaluate(x)


def reciprocal(t: TruncatedSeries) -> TruncatedSeries:
    """1/t through order K; requires t_0 != 0."""
    coeffs = t.coefficients
    if coeffs[0] == 0:
        raise ZeroConstantTermError(
            "Cannot invert a series with vanishing constant term", {"order": t.order}
        )
    result = np.zeros_like(coeffs)
    result[0] = 1.0 / coeffs[0]
    for n in range(1, coeffs.size):
        result[n] = -np.dot(coeffs[1 : n + 1], result[n - 1 :: -1][:n]) / coeffs[0]
    return TruncatedSeries(result, t.variable_name)


def div(s: TruncatedSeries, t: TruncatedSeries) -> TruncatedSeries:
    """s / t as the product with the reciprocal of t."""
    return s * reciprocal(t)


def log(s: TruncatedSeries) -> TruncatedSeries:
    """Series of ln s(x); the constant term is the principal ln s_0."""
    coeffs = s.coefficients
    if coeffs[0] == 0:
        raise ZeroConstantTermError(
            "Cannot take the logarithm of a series with vanishing constant term",
            {"order": s.order},
        )
    result = np.zeros_like(coeffs)
    result[0] = np.log(coeffs[0])
    for n in range(1, coeffs.size):
        j = np.arange(1, n)
        acc = n * coeffs[n] - np.sum(j * result[1:n] * coeffs[n - j])
        result[n] = acc / (n * coeffs[0])
    return TruncatedSeries(result, s.variable_name)


def exp(s: TruncatedSeries) -> TruncatedSeries:
    """Series of exp(s(x))."""
    coeffs = s.coefficients
    result = np.zeros_like(coeffs)
    result[0] = np.exp(coeffs[0])
    for n in range(1, coeffs.size):
        j = np.arange(1, n + 1)
        result[n] = np.sum(j * coeffs[1 : n + 1] * result[n - j]) / n
    return TruncatedSeries(result, s.variable_name)


def normalize(
    raw: TruncatedSeries,
    step: int = 1,
    *,
    expected_order: int | None = None,
    zero_tolerance: float = 1e-13,
    lattice_tolerance: float = 1e-10,
) -> tuple[Prefactor, TruncatedSeries]:
    """Split off the leading monomial c*x^sigma and re-index in x^step.

    Returns the prefactor and a series with a_0 = 1 whose variable is x^step.

    Raises:
        ZeroConstantTermError: If the series vanishes identically
        UnsupportedProblemError: If coefficients off the step lattice are nonzero
    """
    coeffs = raw.coefficients
    magnitude = float(np.max(np.abs(coeffs)))
    if magnitude == 0.0 or not np.isfinite(magnitude):
        raise ZeroConstantTermError(
            "Series has no nonzero finite coefficient to normalize by",
            {"order": raw.order},
        )

    sigma = int(np.argmax(np.abs(coeffs) > zero_tolerance * magnitude))
    leading = complex(coeffs[sigma])
    tail = coeffs[sigma:] / leading

    off_lattice = np.ones(tail.size, dtype=bool)
    off_lattice[::step] = False
    if off_lattice.any():
        worst = float(np.max(np.abs(tail[off_lattice])))
        if worst > lattice_tolerance * max(1.0, float(np.max(np.abs(tail)))):
            raise UnsupportedProblemError(
                f"Series has nonzero coefficients off the x^{step} lattice",
                {"step": step, "largest_off_lattice": worst},
            )

    variable = raw.variable_name if step == 1 else f"{raw.variable_name}^{step}"
    normalized = TruncatedSeries(tail[::step], variable)

    if expected_order is not None and normalized.order != expected_order:
        raise UnsupportedProblemError(
            "Leading behaviour of the series differs from the declared prefactor",
            {
                "expected_order": expected_order,
                "normalized_order": normalized.order,
                "zero_exponent": sigma,
            },
        )

    return Prefactor.power(leading, sigma), normalized


def _residual_coefficient(
    problem: "ProblemSpec", coeffs: np.ndarray, index: int, variable: TruncatedSeries
) -> complex:
    y = TruncatedSeries(coeffs, variable.variable_name)
    return complex(problem.series_residual(y, variable, problem.parameters).coefficients[index])


def series_from_ode(
    problem: "ProblemSpec", order: int, theta: Sequence[float] = ()
) -> TruncatedSeries:
    """Generate the working-variable series of `problem` through `order`.

    Args:
        problem: Problem whose residual is polynomial in y, y', y'' and x
        order: Truncation order K of the raw series
        theta: Shooting parameters consumed by the problem's coefficient presets

    Returns:
        TruncatedSeries: Raw (un-normalized) coefficients a_0..a_K

    Raises:
        UnderDeterminedError: A coefficient is neither preset nor fixed by the residual
        UnsupportedProblemError: The recurrence is not affine/triangular, or a preset
            contradicts the residual
    """
    presets = problem.coefficient_presets(tuple(theta), problem.parameters)
    offset = problem.order_offset
    variable = TruncatedSeries.monomial(1, order, problem.working_variable)
    coeffs = np.zeros(order + 1, dtype=complex)

    for m in range(order + 1):
        index = m - offset

        if m in presets:
            coeffs[m] = presets[m]
            if index >= 0:
                residual = _residual_coefficient(problem, coeffs, index, variable)
                coeffs[m] = 0.0
                baseline = _residual_coefficient(problem, coeffs, index, variable)
                coeffs[m] = presets[m]
                if abs(residual) > _AFFINE_TOLERANCE * max(1.0, abs(baseline)):
                    raise UnsupportedProblemError(
                        "Preset coefficient contradicts the residual",
                        {"problem": problem.name, "index": m, "residual": abs(residual)},
                    )
            continue

        if index < 0:
            raise UnderDeterminedError(
                "Conditions at the expansion point do not fix this coefficient",
                {"problem": problem.name, "index": m, "order_offset": offset},
            )

        samples = []
        for trial in (0.0, 1.0, 2.0):
            coeffs[m] = trial
            samples.append(_residual_coefficient(problem, coeffs, index, variable))
        r0, r1, r2 = samples
        slope = r1 - r0
        magnitude = max(1.0, abs(r0), abs(r1))

        if abs(r2 - 2.0 * r1 + r0) > _AFFINE_TOLERANCE * magnitude:
            raise UnsupportedProblemError(
                "Residual is not affine in the new coefficient",
                {"problem": problem.name, "index": m},
            )
        if abs(slope) <= _SLOPE_TOLERANCE * magnitude:
            if abs(r0) <= _AFFINE_TOLERANCE * magnitude:
                raise UnderDeterminedError(
                    "Coefficient is free (resonant order) and no preset fixes it",
                    {"problem": problem.name, "index": m},
                )
            raise UnsupportedProblemError(
                "Recurrence is not triangular at this order",
                {"problem": problem.name, "index": m, "residual": abs(r0)},
            )
        coeffs[m] = -r0 / slope

    logfire.debug(
        "Series generated",
        problem=problem.name,
        order=order,
        theta=list(theta),
    )
    return TruncatedSeries(coeffs, problem.working_variable)
