"""
Accuracy diagnostics: solution defect, solution error, numerical reference.

    D     = sup |E[y*]|        over the diagnostic grid
    Delta = sup |y* - y|       against the exact or numerical reference
    delta = Delta / D

Flow (compute_cell):
    [1] Build the problem at (eps, p0) and solve it at order k
    [2] Defect on the diagnostic grid (failed points excluded and counted)
    [3] Error against the reference when the table asks for it
    [4] Any ApproximantError becomes a null cell carrying its error_type
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Literal, Protocol, Sequence

import logfire
import numpy as np
import pandas as pd
from scipy.integrate import solve_ivp
from scipy.optimize import root_scalar

from config import SolverSettings, get_settings
from constants import CurveMetric
from exceptions import ApproximantError, ReferenceSolutionError, UnsupportedProblemError
from models.factor_models import FactorForm
from models.problem_models import ProblemSpec, ReferenceSetup
from models.report_models import DefectReport, TableCell
from services.problem_catalog import builtin
from services.problem_solver import ProblemSolution, solve_problem
from services.root_approximants import AVAILABLE_ORDERS, defect_of_root

__all__ = [
    "ClosedForm",
    "ReferenceSolution",
    "default_grid",
    "defect",
    "error",
    "exact_solution",
    "reference_solution",
    "compute_cell",
    "curve_frame",
    "table_frame",
    "epsilon_label",
]

_MIN_RTOL = 1e-13
_REFINEMENT = 1000.0


class NativeEvaluable(Protocol):
    def evaluate_with_derivatives(self, t) -> tuple: ...


@dataclass(frozen=True)
class ClosedForm:
    """Known solution u(t) with its first two derivatives."""

    function: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray, np.ndarray]]

    def evaluate_with_derivatives(self, t) -> tuple:
        return self.function(np.asarray(t, dtype=float))

    def evaluate(self, t):
        return self.evaluate_with_derivatives(t)[0]


@dataclass(frozen=True)
class ReferenceSolution:
    """Evaluable reference u(t) with its certified accuracy."""

    kind: Literal["closed_form", "ivp", "bvp"]
    function: Callable[[np.ndarray], np.ndarray]
    tolerance: float
    estimated_error: float = 0.0

    def __call__(self, t) -> np.ndarray:
        return self.function(np.asarray(t, dtype=float))


def default_grid(problem: ProblemSpec, points: int | None = None) -> np.ndarray:
    return problem.grid(points or get_settings().grid_points)


def exact_solution(problem: ProblemSpec) -> ClosedForm:
    if problem.exact is None:
        raise UnsupportedProblemError(
            "Problem has no closed-form solution", {"problem": problem.name}
        )
    return ClosedForm(problem.exact)


def _as_evaluable(problem: ProblemSpec, candidate) -> NativeEvaluable:
    if isinstance(candidate, FactorForm):
        return ProblemSolution(problem, candidate)
    return candidate


def _pointwise(fn: Callable[[np.ndarray], np.ndarray], grid: np.ndarray) -> np.ndarray:
    """Vectorised evaluation, falling back to point by point when a point fails."""
    try:
        return np.asarray(fn(grid), dtype=float)
    except ApproximantError:
        values = np.empty(grid.shape)
        for i, t in enumerate(grid):
            try:
                values[i] = float(np.asarray(fn(np.array([t])))[0])
            except ApproximantError:
                values[i] = np.nan
        return values


def _residual(problem: ProblemSpec, evaluable: NativeEvaluable, t: np.ndarray) -> np.ndarray:
    u, u1, u2 = evaluable.evaluate_with_derivatives(t)
    with np.errstate(all="ignore"):
        return problem.native_residual(t, u, u1, u2, problem.parameters)


def defect(problem: ProblemSpec, candidate, grid=None) -> DefectReport:
    """Pointwise |E[y*]| and its supremum over the grid.

    `candidate` is a FactorForm in working variables or anything evaluable in
    native variables (ProblemSolution, ClosedForm).
    """
    grid = default_grid(problem) if grid is None else np.asarray(grid, dtype=float)
    evaluable = _as_evaluable(problem, candidate)
    values = _pointwise(lambda t: _residual(problem, evaluable, t), grid)
    report = DefectReport.from_residuals(
        grid, values, order=getattr(candidate, "order", 0), epsilon=problem.parameters.epsilon
    )
    if report.warning_count:
        logfire.debug("Defect points excluded", problem=problem.name, excluded=report.warning_count)
    return report


def error(
    problem: ProblemSpec,
    candidate,
    reference: ReferenceSolution | ClosedForm,
    grid=None,
    report: DefectReport | None = None,
) -> DefectReport:
    """Defect report with |y* - y| filled in on the points where the defect is defined."""
    report = report or defect(problem, candidate, grid)
    points = np.asarray(report.grid, dtype=float)
    evaluable = _as_evaluable(problem, candidate)
    approx = _pointwise(lambda t: evaluable.evaluate_with_derivatives(t)[0], points)
    exact = reference.evaluate(points) if isinstance(reference, ClosedForm) else reference(points)
    return report.with_errors(np.abs(approx - exact))


# numerical reference


def _integrate(setup: ReferenceSetup, state: Sequence[float], span: tuple[float, float], rtol: float):
    solution = solve_ivp(
        setup.rhs,
        span,
        np.asarray(state, dtype=float),
        method="DOP853",
        rtol=rtol,
        atol=rtol * 1e-2,
        dense_output=True,
    )
    if solution.status != 0:
        raise ReferenceSolutionError(
            "Reference integration failed", {"message": solution.message, "rtol": rtol}
        )
    return solution


def _shoot(setup: ReferenceSetup, span: tuple[float, float], rtol: float):
    """Initial slope hitting u(right) = right_value, then the full dense solution."""

    def miss(slope: float) -> float:
        end = _integrate(setup, (setup.left_value, slope), span, rtol).y[0, -1]
        return float(end - setup.right_value)

    low, high = setup.slope_guesses
    try:
        result = root_scalar(miss, x0=low, x1=high, method="secant", xtol=1e-14, maxiter=50)
    except (RuntimeError, ValueError, ZeroDivisionError) as e:
        raise ReferenceSolutionError("Shooting for the reference diverged", {"error": str(e)}) from e
    if not result.converged:
        raise ReferenceSolutionError(
            "Shooting for the reference did not converge", {"iterations": result.iterations}
        )
    return _integrate(setup, (setup.left_value, result.root), span, rtol)


def _numerical_reference(problem: ProblemSpec, tolerance: float, points: int) -> ReferenceSolution:
    setup = problem.reference
    span = (float(problem.domain[0]), float(problem.domain[1]))
    fine_rtol = max(tolerance / _REFINEMENT, _MIN_RTOL)

    def run(rtol: float):
        if setup.kind == "bvp":
            return _shoot(setup, span, rtol)
        return _integrate(setup, setup.initial_state, span, rtol)

    coarse, fine = run(tolerance), run(fine_rtol)
    grid = np.linspace(*span, points)
    values = fine.sol(grid)[0]
    # error scales with rtol, so the coarse/fine gap bounds the fine error
    estimate = float(np.max(np.abs(coarse.sol(grid)[0] - values))) * fine_rtol / tolerance
    scale = max(1.0, float(np.max(np.abs(values))))
    if estimate > tolerance * scale:
        raise ReferenceSolutionError(
            "Reference solution could not be certified",
            {"problem": problem.name, "estimate": estimate, "tolerance": tolerance},
        )
    logfire.info(
        "Reference solution certified",
        problem=problem.name,
        kind=setup.kind,
        epsilon=problem.parameters.epsilon,
        estimate=estimate,
    )
    return ReferenceSolution(
        kind=setup.kind,
        function=lambda t: fine.sol(t)[0],
        tolerance=tolerance,
        estimated_error=estimate,
    )


def reference_solution(
    problem: ProblemSpec,
    tolerance: float | None = None,
    *,
    prefer_exact: bool = False,
    settings: SolverSettings | None = None,
) -> ReferenceSolution:
    """Numerical (or closed-form) reference solution of `problem`.

    Raises:
        UnsupportedProblemError: Neither a closed form nor an integrable setup exists
        ReferenceSolutionError: Integration or shooting failed, or certification missed
    """
    settings = settings or get_settings()
    tolerance = tolerance or settings.reference_tolerance
    if problem.exact is not None and (prefer_exact or problem.reference is None):
        exact = problem.exact
        return ReferenceSolution(kind="closed_form", function=lambda t: exact(t)[0], tolerance=0.0)
    if problem.reference is None:
        raise UnsupportedProblemError(
            "No reference solution on an infinite domain without a closed form",
            {"problem": problem.name},
        )
    return _numerical_reference(problem, tolerance, settings.ranking_grid_points)


@lru_cache(maxsize=32)
def _cached_reference(name: str, epsilon: float, p0: float | None, tolerance: float) -> ReferenceSolution:
    return reference_solution(builtin(name, epsilon, p0), tolerance, prefer_exact=True)


# table and curve assembly


def compute_cell(
    name: str,
    order: int,
    epsilon: float,
    *,
    p0: float | None = None,
    with_error: bool = False,
    with_root: bool = False,
    settings: SolverSettings | None = None,
) -> TableCell:
    """One table entry; failures are returned as null cells, never raised."""
    settings = settings or get_settings()
    try:
        problem = builtin(name, epsilon, p0)
        solution = solve_problem(problem, order, settings)
        grid = problem.grid(settings.grid_points)
        report = defect(problem, solution, grid)
        if with_error:
            reference = _cached_reference(name, epsilon, p0, settings.reference_tolerance)
            report = error(problem, solution, reference, report=report)
        root = None
        if with_root and order in AVAILABLE_ORDERS:
            root = defect_of_root(order, grid).max_defect
    except ApproximantError as e:
        logfire.warning(
            "Table cell failed",
            problem=name,
            order=order,
            epsilon=epsilon,
            error_type=e.error_type,
            error=e.message,
        )
        return TableCell(
            problem=name, order=order, epsilon=epsilon, error_type=e.error_type, message=e.message
        )
    return TableCell(
        problem=name,
        order=order,
        epsilon=epsilon,
        max_defect=report.max_defect,
        max_error=report.max_error,
        ratio=report.ratio,
        root_defect=root,
    )


def epsilon_label(epsilon: float) -> str:
    return f"eps{epsilon:g}"


def table_frame(
    cells: Sequence[TableCell],
    *,
    epsilons: Sequence[float],
    with_error: bool,
    with_root: bool = False,
) -> pd.DataFrame:
    """Rows k; columns D/Delta/delta (suffixed by eps when several), or D_factor/D_root."""
    orders = sorted({c.order for c in cells})
    by_key = {(c.order, c.epsilon): c for c in cells}
    rows = []
    for k in orders:
        row: dict[str, float | int | None] = {"k": k}
        for eps in epsilons:
            cell = by_key.get((k, eps))
            suffix = "" if len(epsilons) == 1 else f"_{epsilon_label(eps)}"
            if with_root:
                row["D_factor" + suffix] = None if cell is None else cell.max_defect
                row["D_root" + suffix] = None if cell is None else cell.root_defect
                continue
            row["D" + suffix] = None if cell is None else cell.max_defect
            if with_error:
                row["Delta" + suffix] = None if cell is None else cell.max_error
                row["delta" + suffix] = None if cell is None else cell.ratio
        rows.append(row)
    return pd.DataFrame(rows)


def curve_frame(
    problem: ProblemSpec,
    solutions: dict[int, ProblemSolution | None],
    *,
    metric: str = CurveMetric.DEFECT,
    grid=None,
    settings: SolverSettings | None = None,
) -> pd.DataFrame:
    """Per-point defect or error columns, one per order; failed orders are all-null."""
    settings = settings or get_settings()
    grid = problem.grid(settings.grid_points) if grid is None else np.asarray(grid, dtype=float)
    frame = pd.DataFrame({problem.native_variable: grid})
    reference = None
    if metric == CurveMetric.ERROR:
        reference = reference_solution(problem, prefer_exact=True, settings=settings)
    for k, solution in sorted(solutions.items()):
        column = f"{metric}_k{k}"
        if solution is None:
            frame[column] = np.nan
            continue
        residual = _pointwise(lambda t: _residual(problem, solution, t), grid)
        values = np.abs(residual)
        if reference is not None:
            approx = _pointwise(lambda t: solution.evaluate_with_derivatives(t)[0], grid)
            values = np.where(np.isfinite(residual), np.abs(approx - reference(grid)), np.nan)
        frame[column] = values
    return frame
