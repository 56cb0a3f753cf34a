"""
Two-step solution of a benchmark problem.

Flow (solve_problem):
    [1] Series of the working equation, shot over the free coefficient when needed;
        roots of the lower orders seed the search, one order at a time from min_order
    [2] Moments -> factor approximant satisfying the working-variable conditions
    [3] Candidates ranked by their defect on a coarse native grid
    [4] Wrap the best form with the inverse variable transform (ProblemSolution)
"""

from dataclasses import dataclass

import logfire
import numpy as np

from config import SolverSettings, get_settings
from exceptions import ApproximantError, OrderTooLowError
from models.factor_models import FactorForm
from models.problem_models import ConditionKind, ProblemSpec, ShootingCandidate
from services.constraints import solve_constrained
from services.factor_evaluation import evaluate_with_derivatives

__all__ = ["ProblemSolution", "solve_problem", "native_values"]


def native_values(problem: ProblemSpec, form: FactorForm, t) -> tuple:
    """Native value and first two derivatives of `form` at native points t."""
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    s = problem.transform.to_working(t)
    f, f1, f2 = evaluate_with_derivatives(form, s)
    u, u1, u2 = problem.transform.compose(t, np.asarray(f), np.asarray(f1), np.asarray(f2))
    if scalar:
        return u[0], u1[0], u2[0]
    return u, u1, u2


@dataclass(frozen=True)
class ProblemSolution:
    """Factor approximant of a problem, evaluated in the native variable."""

    problem: ProblemSpec
    form: FactorForm
    theta: tuple[float, ...] = ()
    residuals: tuple[float, ...] = ()
    alternates: tuple[ShootingCandidate, ...] = ()

    @property
    def order(self) -> int:
        return self.form.order + self.problem.order_shift

    def evaluate_with_derivatives(self, t) -> tuple:
        return native_values(self.problem, self.form, t)

    def evaluate(self, t):
        return self.evaluate_with_derivatives(t)[0]

    def residual(self, t):
        """Native residual E[u*](t); points where the operator is singular give NaN."""
        t = np.asarray(t, dtype=float)
        u, u1, u2 = self.evaluate_with_derivatives(t)
        with np.errstate(all="ignore"):
            return self.problem.native_residual(t, u, u1, u2, self.problem.parameters)

    def condition_residuals(self) -> list[float]:
        """Residuals of the native-variable conditions."""
        residuals = []
        for condition in self.problem.native_conditions:
            value, first, _ = self.evaluate_with_derivatives(condition.location)
            observed = first if condition.kind is ConditionKind.DERIVATIVE_AT_POINT else value
            residuals.append(float(observed - condition.target))
        return residuals


def _coarse_defect(problem: ProblemSpec, form: FactorForm, points: int) -> float:
    values = np.abs(ProblemSolution(problem, form).residual(problem.grid(points)))
    finite = values[np.isfinite(values)]
    return float(np.max(finite)) if finite.size else np.inf


def _ranker(problem: ProblemSpec, settings: SolverSettings):
    return lambda form: _coarse_defect(problem, form, settings.ranking_grid_points)


def _lower_order_seeds(problem: ProblemSpec, order: int, settings: SolverSettings) -> tuple[float, ...]:
    """Shooting roots of orders min_order..k-1, each order seeded by the one below."""
    if not problem.parameter_names:
        return ()
    seeds: tuple[float, ...] = ()
    for lower in range(problem.min_order, order):
        try:
            result = solve_constrained(problem.constrained_spec(lower), settings, seeds=seeds)
        except ApproximantError as e:
            logfire.debug("Lower order gave no seed", problem=problem.name, order=lower, error=e.message)
            continue
        seeds = tuple(c.theta[0] for c in (result.best, *result.alternates))
    return seeds


def solve_problem(
    problem: ProblemSpec, order: int, settings: SolverSettings | None = None
) -> ProblemSolution:
    """Factor approximant of order k for `problem`, in native variables.

    Raises:
        OrderTooLowError: k below the smallest order that can satisfy the conditions
        ApproximantError: Propagated from series generation, moments or the constrained solve
    """
    settings = settings or get_settings()
    if order < problem.min_order:
        raise OrderTooLowError(
            f"Order {order} is below the minimum order {problem.min_order} for {problem.name}",
            {"problem": problem.name, "order": order, "min_order": problem.min_order},
        )

    result = solve_constrained(
        problem.constrained_spec(order),
        settings,
        ranker=_ranker(problem, settings),
        seeds=_lower_order_seeds(problem, order, settings),
    )
    solution = ProblemSolution(
        problem=problem,
        form=result.form,
        theta=result.best.theta,
        residuals=result.best.residuals,
        alternates=result.alternates,
    )
    logfire.info(
        "Problem solved",
        problem=problem.name,
        order=order,
        epsilon=problem.parameters.epsilon,
        theta=list(solution.theta),
        factors=len(result.form.factors),
        alternates=len(result.alternates),
    )
    return solution
