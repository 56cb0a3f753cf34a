"""
Evaluation of factor approximants with analytic derivatives.

For y(s) = c s^sigma g(u), u = s^step, g(u) = prod_i (1 + A_i u)^{n_i} exp(b u):
    (log g)'  = sum_i n_i A_i / (1 + A_i u) + b
    (log g)'' = -sum_i n_i A_i^2 / (1 + A_i u)^2
and the product rule with s^sigma keeps everything finite at s = 0.
"""

from typing import Sequence

import numpy as np

from exceptions import BranchCutError, ConjugationBrokenError, InvalidConditionError
from models.factor_models import FactorForm, FactorKind
from models.report_models import StabilizationReport
from models.series_models import TruncatedSeries
from services.series import exp

__all__ = [
    "evaluate",
    "evaluate_with_derivatives",
    "expand_form",
    "limit_at_infinity",
    "detect_fixed_form",
    "IMAGINARY_TOLERANCE",
    "STABILIZATION_THRESHOLD",
]

IMAGINARY_TOLERANCE = 1e-9
STABILIZATION_THRESHOLD = 1e-8
_INTEGER_TOLERANCE = 1e-12


def _is_integer(n: complex) -> bool:
    return abs(n.imag) <= _INTEGER_TOLERANCE and abs(n.real - round(n.real)) <= _INTEGER_TOLERANCE


def _monomial_terms(s: np.ndarray, power: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """s^k with its first two derivatives, without negative powers of zero."""
    zero = np.zeros_like(s)
    value = s**power
    first = power * s ** (power - 1) if power >= 1 else zero
    second = power * (power - 1) * s ** (power - 2) if power >= 2 else zero
    return value, first, second


def _real_part(values: np.ndarray, label: str) -> np.ndarray:
    finite = np.isfinite(values)
    residue = np.abs(values.imag[finite])
    bound = IMAGINARY_TOLERANCE * (1.0 + np.abs(values[finite]))
    if np.any(residue > bound):
        worst = int(np.argmax(residue - bound))
        raise ConjugationBrokenError(
            "Form declared real evaluated to a complex value",
            {"quantity": label, "imaginary_part": float(residue[worst])},
        )
    return values.real


def evaluate_with_derivatives(form: FactorForm, x) -> tuple:
    """Value, first and second derivative of the form at x (scalar or array).

    Raises:
        BranchCutError: Real node with non-integer exponent and 1 + A x^step <= 0
        ConjugationBrokenError: Real form with imaginary residue above tolerance
    """
    scalar = np.ndim(x) == 0
    s = np.atleast_1d(np.asarray(x, dtype=float)).astype(complex)
    p = form.step
    u, du, d2u = _monomial_terms(s, p)

    log_g = form.exponential_rate * u
    first_log = np.full_like(u, form.exponential_rate)
    second_log = np.zeros_like(u)

    with np.errstate(all="ignore"):
        for factor in form.factors:
            if factor.kind is FactorKind.EXPONENTIAL:
                continue
            A, n = factor.A, factor.n
            base = 1.0 + A * u
            if abs(A.imag) <= _INTEGER_TOLERANCE * max(1.0, abs(A)) and not _is_integer(n):
                bad = base.real <= 0.0
                if np.any(bad):
                    raise BranchCutError(
                        "Factor evaluated on its branch cut",
                        {"A": [A.real, A.imag], "n": [n.real, n.imag], "x": float(s[bad][0].real)},
                    )
            log_g = log_g + n * np.log1p(A * u)
            ratio = A / base
            first_log = first_log + n * ratio
            second_log = second_log - n * ratio**2

        g = np.exp(log_g)
        g_u = g * first_log
        g_uu = g * (first_log**2 + second_log)
        G, G1, G2 = g, g_u * du, g_uu * du**2 + g_u * d2u

        P0, P1, P2 = _monomial_terms(s, form.prefactor.zero_exponent)
        c = form.prefactor.leading_scale
        value = c * P0 * G
        first = c * (P1 * G + P0 * G1)
        second = c * (P2 * G + 2.0 * P1 * G1 + P0 * G2)

    if form.real:
        value = _real_part(value, "value")
        first = _real_part(first, "first_derivative")
        second = _real_part(second, "second_derivative")

    if scalar:
        return value[0], first[0], second[0]
    return value, first, second


def evaluate(form: FactorForm, x):
    """Value of the form at x (scalar or array)."""
    return evaluate_with_derivatives(form, x)[0]


def expand_form(form: FactorForm, order: int) -> TruncatedSeries:
    """Maclaurin expansion of the form divided by its prefactor, in x^step."""
    m = np.arange(1, order + 1)
    ell = np.zeros(order + 1, dtype=complex)
    for factor in form.factors:
        if factor.kind is FactorKind.EXPONENTIAL:
            if order >= 1:
                ell[1] += factor.b
            continue
        ell[1:] += factor.n * (-1.0) ** (m - 1) * factor.A**m / m
    return exp(TruncatedSeries(ell))


def limit_at_infinity(form: FactorForm) -> tuple[complex, complex]:
    """(amplitude c * prod A_i^{n_i}, exponent sigma + step * sum n_i) of the large-x power law.

    Raises:
        InvalidConditionError: The form contains an exponential factor
        BranchCutError: Negative real node with non-integer exponent on a real form
    """
    if any(f.kind is FactorKind.EXPONENTIAL for f in form.factors):
        raise InvalidConditionError(
            "Exponential factors have no power-law behaviour at infinity",
            {"factors": len(form.factors)},
        )
    log_amplitude = 0j
    exponent_sum = 0j
    for factor in form.factors:
        A, n = factor.A, factor.n
        if form.real and abs(A.imag) == 0 and A.real < 0 and not _is_integer(n):
            raise BranchCutError(
                "Negative node with non-integer exponent has no real amplitude",
                {"A": A.real, "n": [n.real, n.imag]},
            )
        log_amplitude += n * np.log(A)
        exponent_sum += n
    amplitude = form.prefactor.leading_scale * np.exp(log_amplitude)
    exponent = form.prefactor.zero_exponent + form.step * exponent_sum
    if form.real:
        return complex(amplitude.real), complex(exponent.real)
    return complex(amplitude), complex(exponent)


def _grid_values(candidate, grid: np.ndarray) -> np.ndarray:
    if isinstance(candidate, FactorForm):
        return evaluate(candidate, grid)
    return candidate.evaluate(grid)


def detect_fixed_form(
    forms: Sequence, grid, threshold: float = STABILIZATION_THRESHOLD
) -> StabilizationReport:
    """Sup-norm differences of consecutive approximants on a grid.

    Accepts FactorForm objects or anything with an `evaluate(grid)` method.
    """
    if len(forms) < 2:
        raise InvalidConditionError("Stabilization needs at least two forms", {"forms": len(forms)})
    grid = np.asarray(grid, dtype=float)
    differences = []
    previous = None
    for candidate in forms:
        try:
            values = np.asarray(_grid_values(candidate, grid))
        except (BranchCutError, ConjugationBrokenError):
            values = np.full(grid.shape, np.nan)
        if previous is not None:
            gap = np.abs(values - previous)
            differences.append(float(np.max(gap)) if np.all(np.isfinite(gap)) else float("inf"))
        previous = values
    return StabilizationReport(
        differences=tuple(differences),
        threshold=threshold,
        stabilized=all(d < threshold for d in differences),
    )
