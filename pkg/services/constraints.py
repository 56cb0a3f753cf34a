"""
Imposed conditions on factor approximants.

Flow (solve_constrained):
    [1] Split conditions: at the expansion point (built into the series, verified only),
        asymptotic (exponent enters the moment solve, amplitude is shot on), outer points
    [2] Check parameter balance: one outer equation per free series parameter theta
    [3] Scan each bracket (plus a window around every seed) for sign changes of g(theta)
    [4] brentq on every sign change; a finite sample between failed ones is resampled densely
    [5] Damped secant from the seeds and isolated samples; keep roots whose full residuals vanish
    [6] Rank surviving roots (coarse-grid defect when a ranker is given)
"""

import math
from typing import Callable, Sequence

import logfire
import numpy as np
from scipy.optimize import brentq

from config import SolverSettings, get_settings
from exceptions import (
    ApproximantError,
    InvalidConditionError,
    NoSolutionError,
    ParameterCountError,
    UnsupportedProblemError,
)
from models.factor_models import FactorForm
from models.problem_models import (
    Condition,
    ConditionKind,
    ConstrainedSolveSpec,
    ShootingCandidate,
    ShootingResult,
)
from services.factor_evaluation import evaluate_with_derivatives, limit_at_infinity
from services.factor_solver import solve
from services.moments import moments_from_series

__all__ = [
    "apply_asymptotic",
    "check_conditions",
    "solve_constrained",
    "scan_points",
    "Ranker",
]

Ranker = Callable[[FactorForm], float]

_ROOT_XTOL = 2e-14
_DUPLICATE_TOLERANCE = 1e-9
_SEED_SPAN = 1.5
_DENSE_POINTS = 33
_MAX_RUNS = 8
_SECANT_STEP = 1e-4
_SECANT_ITERATIONS = 60
_SECANT_HALVINGS = 30
_EVALUATION_ERRORS = (ApproximantError, ArithmeticError, np.linalg.LinAlgError, ValueError)


class _EvaluationFailed(Exception):
    """Outer residual could not be evaluated at a trial theta."""


def _signed(value: complex, real: bool) -> float:
    value = complex(value)
    return value.real if real else abs(value)


def apply_asymptotic(form: FactorForm, condition: Condition) -> tuple[float, float]:
    """(amplitude residual, exponent residual) of a power-law condition at infinity.

    Raises:
        InvalidConditionError: The condition is not asymptotic, or the form has exponential factors
        BranchCutError: Negative real node with non-integer exponent
    """
    if not condition.is_asymptotic:
        raise InvalidConditionError(
            "apply_asymptotic needs an asymptotic_power condition", {"kind": condition.kind.value}
        )
    amplitude, exponent = limit_at_infinity(form)
    return (
        _signed(amplitude - condition.target, form.real),
        _signed(exponent - condition.exponent, form.real),
    )


def _point_residual(form: FactorForm, condition: Condition) -> float:
    value, first, _ = evaluate_with_derivatives(form, condition.location)
    if condition.kind is ConditionKind.DERIVATIVE_AT_POINT:
        return _signed(first - condition.target, form.real)
    return _signed(value - condition.target, form.real)


def check_conditions(form: FactorForm, conditions: Sequence[Condition]) -> list[float]:
    """Residual of every condition; an asymptotic condition contributes two entries."""
    residuals: list[float] = []
    for condition in conditions:
        if condition.is_asymptotic:
            residuals.extend(apply_asymptotic(form, condition))
        else:
            residuals.append(_point_residual(form, condition))
    return residuals


def _within(residuals: Sequence[float], conditions: Sequence[Condition], tolerance: float) -> bool:
    scales = []
    for condition in conditions:
        scale = max(1.0, abs(condition.target))
        scales.extend([scale, 1.0] if condition.is_asymptotic else [scale])
    return all(
        math.isfinite(r) and abs(r) <= tolerance * scale for r, scale in zip(residuals, scales)
    )


def scan_points(bracket: tuple[float, float], points: int) -> np.ndarray:
    """Log-spaced points for one-signed brackets, uniform otherwise."""
    lo, hi = sorted(bracket)
    if lo > 0:
        return np.geomspace(lo, hi, points)
    if hi < 0:
        return -np.geomspace(-lo, -hi, points)
    return np.linspace(lo, hi, points)


def _split(spec: ConstrainedSolveSpec) -> tuple[list[Condition], list[Condition], list[Condition]]:
    builtin, asymptotic, outer = [], [], []
    for condition in spec.conditions:
        if condition.is_asymptotic:
            asymptotic.append(condition)
        elif condition.location == spec.expansion_point:
            builtin.append(condition)
        else:
            outer.append(condition)
    return builtin, asymptotic, outer


def solve_constrained(
    spec: ConstrainedSolveSpec,
    settings: SolverSettings | None = None,
    ranker: Ranker | None = None,
    seeds: Sequence[float] = (),
) -> ShootingResult:
    """Factor approximant of order k satisfying every condition of `spec`.

    Args:
        spec: Oracle, conditions, order and shooting brackets
        settings: Solver tolerances and scan density
        ranker: Quality score of a candidate form (lower is better)
        seeds: Likely shooting roots, e.g. those of the next lower order

    Returns:
        ShootingResult: Best candidate and ranked alternates

    Raises:
        ParameterCountError: Outer equations and free series parameters do not balance
        NoSolutionError: No root of the shooting residual satisfies the conditions
    """
    settings = settings or get_settings()
    oracle = spec.oracle
    _, asymptotic, outer = _split(spec)
    free = len(oracle.parameter_names)

    if len(asymptotic) > 1:
        raise ParameterCountError(
            "At most one asymptotic condition is supported", {"asymptotic": len(asymptotic)}
        )
    equations = len(outer) + len(asymptotic)
    if equations != free:
        raise ParameterCountError(
            "Outer conditions must match the number of free series parameters",
            {"outer_equations": equations, "parameters": list(oracle.parameter_names)},
        )
    if free > 1:
        raise UnsupportedProblemError(
            "Shooting supports a single free series parameter", {"parameters": free}
        )

    asymptotic_condition = asymptotic[0] if asymptotic else None

    def inner(theta: tuple[float, ...]) -> FactorForm:
        prefactor, series = oracle.normalized(spec.order, theta)
        moments = moments_from_series(series)
        exponent_sum = None
        if asymptotic_condition is not None:
            alpha = prefactor.zero_exponent
            exponent_sum = (asymptotic_condition.exponent - alpha) / oracle.step
        return solve(
            moments,
            prefactor=prefactor,
            step=oracle.step,
            exponent_sum=exponent_sum,
            settings=settings,
        )

    def outer_residual(form: FactorForm) -> float:
        if asymptotic_condition is not None:
            return apply_asymptotic(form, asymptotic_condition)[0]
        return _point_residual(form, outer[0])

    def candidate(theta: tuple[float, ...]) -> ShootingCandidate | None:
        try:
            form = inner(theta)
            residuals = check_conditions(form, spec.conditions)
        except _EVALUATION_ERRORS as e:
            logfire.debug("Shooting candidate failed", theta=list(theta), error=str(e))
            return None
        if not _within(residuals, spec.conditions, settings.constraint_tolerance):
            return None
        return ShootingCandidate(form=form, theta=theta, residuals=tuple(residuals))

    if free == 0:
        found = candidate(())
        if found is None:
            raise NoSolutionError(
                "Approximant violates its conditions",
                {"order": spec.order, "conditions": len(spec.conditions)},
            )
        return ShootingResult(best=found)

    def g(theta: float) -> float:
        try:
            value = outer_residual(inner((theta,)))
        except _EVALUATION_ERRORS as e:
            raise _EvaluationFailed(str(e)) from e
        if not math.isfinite(value):
            raise _EvaluationFailed("non-finite residual")
        return value

    roots = _find_roots(g, spec, settings, seeds)
    candidates = []
    for theta in roots:
        found = candidate((theta,))
        if found is not None and not any(
            abs(theta - c.theta[0]) <= _DUPLICATE_TOLERANCE * max(1.0, abs(theta)) for c in candidates
        ):
            candidates.append(found)

    if not candidates:
        raise NoSolutionError(
            "No root of the shooting residual satisfies the conditions",
            {"order": spec.order, "root_candidates": len(roots), "seeds": [float(s) for s in seeds]},
        )

    candidates = _rank(candidates, ranker)
    logfire.info(
        "Shooting roots found",
        order=spec.order,
        roots=[c.theta[0] for c in candidates],
        best=candidates[0].theta[0],
    )
    return ShootingResult(best=candidates[0], alternates=tuple(candidates[1:]))


def _find_roots(
    g: Callable[[float], float],
    spec: ConstrainedSolveSpec,
    settings: SolverSettings,
    seeds: Sequence[float] = (),
) -> list[float]:
    """Roots of g: sign changes over the scanned brackets, refined windows and seeded secants.

    theta = 0 is always sampled. Each seed gets its own log-spaced window of
    +-_SEED_SPAN, a finite sample between two failed ones is resampled densely, and
    every run of finite samples starts a secant at its smallest |g|, so narrow
    intervals where the inner solve exists are not stepped over.
    """
    brackets = spec.parameter_brackets or ((settings.bracket_low, settings.bracket_high),)
    scans = [scan_points(b, settings.bracket_points) for b in brackets] + [np.zeros(1)]
    for seed in seeds:
        if seed != 0 and math.isfinite(seed):
            scans.append(scan_points((seed / _SEED_SPAN, seed * _SEED_SPAN), settings.bracket_points + 1))
    samples = _sample(g, np.unique(np.concatenate(scans)))

    roots = [theta for theta, value in samples if value == 0.0]
    roots += _bracketed_roots(g, samples)

    starts = [float(seed) for seed in seeds if math.isfinite(seed)]
    roots += starts
    for run in sorted(_finite_runs(samples), key=lambda r: min(abs(v) for _, v in r))[:_MAX_RUNS]:
        theta, _ = min(run, key=lambda sample: abs(sample[1]))
        starts.append(theta)
        if len(run) > 1:
            continue
        i = samples.index(run[0])
        low = samples[i - 1][0] if i > 0 else theta
        high = samples[i + 1][0] if i + 1 < len(samples) else theta
        dense = _sample(g, np.linspace(low, high, _DENSE_POINTS)[1:-1])
        roots += [t for t, v in dense if v == 0.0]
        roots += _bracketed_roots(g, dense)

    for start in starts:
        root = _secant(g, start)
        if root is not None:
            roots.append(root)
    return roots


def _finite_runs(samples: list[tuple[float, float]]) -> list[list[tuple[float, float]]]:
    runs: list[list[tuple[float, float]]] = []
    current: list[tuple[float, float]] = []
    for sample in samples:
        if math.isfinite(sample[1]):
            current.append(sample)
        elif current:
            runs.append(current)
            current = []
    if current:
        runs.append(current)
    return runs


def _sample(g: Callable[[float], float], points: np.ndarray) -> list[tuple[float, float]]:
    samples = []
    for theta in points:
        try:
            samples.append((float(theta), g(float(theta))))
        except _EvaluationFailed:
            samples.append((float(theta), math.nan))
    return samples


def _bracketed_roots(g: Callable[[float], float], samples: list[tuple[float, float]]) -> list[float]:
    roots = []
    for (a, ga), (b, gb) in zip(samples, samples[1:]):
        if not (math.isfinite(ga) and math.isfinite(gb)) or ga == 0.0 or gb == 0.0:
            continue
        if np.sign(ga) == np.sign(gb):
            continue
        try:
            root = brentq(g, a, b, xtol=_ROOT_XTOL * max(1.0, abs(a)), rtol=8.9e-16, maxiter=200)
        except (_EvaluationFailed, RuntimeError, ValueError) as e:
            logfire.debug("Bracket refinement failed", low=a, high=b, error=str(e))
            continue
        roots.append(float(root))
    return roots


def _secant(g: Callable[[float], float], start: float) -> float | None:
    """Damped secant from one point; steps into failed evaluations are halved.

    Returns the iterate with smallest |g| when the steps stall; callers verify it.
    """
    x0 = start
    h = _SECANT_STEP * max(abs(x0), 1e-3)
    try:
        g0 = g(x0)
    except _EvaluationFailed:
        return None
    for x1 in (x0 + h, x0 - h):
        try:
            g1 = g(x1)
            break
        except _EvaluationFailed:
            continue
    else:
        return None
    best = min((abs(g0), x0), (abs(g1), x1))
    for _ in range(_SECANT_ITERATIONS):
        if g1 == 0.0 or g1 == g0:
            return best[1]
        step = -g1 * (x1 - x0) / (g1 - g0)
        for _ in range(_SECANT_HALVINGS):
            try:
                x2 = x1 + step
                g2 = g(x2)
                break
            except _EvaluationFailed:
                step *= 0.5
        else:
            return best[1]
        best = min(best, (abs(g2), x2))
        if abs(x2 - x1) <= _ROOT_XTOL * max(1.0, abs(x2)):
            return best[1]
        x0, g0, x1, g1 = x1, g1, x2, g2
    logfire.debug("Seeded secant did not converge", start=start, last=x1)
    return best[1]


def _rank(candidates: list[ShootingCandidate], ranker: Ranker | None) -> list[ShootingCandidate]:
    if ranker is None or len(candidates) == 1:
        return sorted(candidates, key=lambda c: max(abs(r) for r in c.residuals) if c.residuals else 0.0)
    scored = []
    for c in candidates:
        try:
            quality = float(ranker(c.form))
        except ApproximantError:
            quality = math.inf
        scored.append(c.model_copy(update={"quality": quality if math.isfinite(quality) else None}))
    return sorted(scored, key=lambda c: (c.quality is None, c.quality if c.quality is not None else 0.0))
