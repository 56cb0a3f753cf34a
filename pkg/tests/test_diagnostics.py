import numpy as np
import pytest

from constants import CurveMetric
from exceptions import UnsupportedProblemError
from models.report_models import DefectReport, TableCell
from services.diagnostics import (
    compute_cell,
    curve_frame,
    defect,
    epsilon_label,
    error,
    exact_solution,
    reference_solution,
    table_frame,
)
from services.problem_catalog import builtin
from services.problem_solver import solve_problem


def _ratio_identity(report: DefectReport) -> None:
    if report.ratio is not None:
        assert report.max_error == pytest.approx(report.ratio * report.max_defect, rel=1e-12)


@pytest.mark.parametrize("name", ["linear_singular", "carrier_transfer", "logistic", "kink", "bell"])
def test_exact_solution_has_no_defect(name):
    problem = builtin(name)
    report = defect(problem, exact_solution(problem), problem.grid(501))
    assert report.max_defect < 1e-10
    assert report.warning_count == 0


def test_exact_solution_is_unavailable_for_vortex():
    with pytest.raises(UnsupportedProblemError):
        exact_solution(builtin("gp_vortex"))
    with pytest.raises(UnsupportedProblemError):
        reference_solution(builtin("gp_vortex"))


@pytest.mark.parametrize("eps", [0.1, 1.0])
def test_numerical_reference_matches_closed_form(solver_settings, eps):
    problem = builtin("linear_singular", eps)
    reference = reference_solution(problem, 1e-10, settings=solver_settings)
    assert reference.kind == "ivp"
    t = problem.grid(201)
    assert np.max(np.abs(reference(t) - problem.exact(t)[0])) < 1e-8


def test_carrier_numerical_reference(solver_settings):
    problem = builtin("carrier_transfer", 1.0)
    reference = reference_solution(problem, 1e-10, settings=solver_settings)
    t = problem.grid(201)
    assert np.max(np.abs(reference(t) - problem.exact(t)[0])) < 1e-8


def test_boundary_layer_reference_meets_boundary_values(solver_settings):
    problem = builtin("boundary_layer", 1.0)
    reference = reference_solution(problem, 1e-10, settings=solver_settings)
    assert reference.kind == "bvp"
    assert reference(np.array([0.0, 1.0])) == pytest.approx([0.0, np.e], abs=1e-8)


def test_prefer_exact_returns_closed_form(solver_settings):
    reference = reference_solution(builtin("logistic"), prefer_exact=True, settings=solver_settings)
    assert reference.kind == "closed_form"


def test_error_of_exact_candidate_vanishes():
    problem = builtin("carrier_transfer", 0.5)
    exact = exact_solution(problem)
    report = error(problem, exact, exact, problem.grid(201))
    assert report.max_error < 1e-12
    _ratio_identity(report)


def test_defect_and_error_of_approximant(coarse_settings):
    problem = builtin("boundary_layer", 1.0)
    solution = solve_problem(problem, 4, coarse_settings)
    grid = problem.grid(coarse_settings.grid_points)
    reference = reference_solution(problem, settings=coarse_settings)
    report = error(problem, solution, reference, grid)
    assert report.max_defect > 0
    assert report.max_error is not None
    _ratio_identity(report)
    # weak ordering of successive orders
    higher = defect(problem, solve_problem(problem, 7, coarse_settings), grid)
    assert higher.max_defect < report.max_defect


def test_report_rejects_misaligned_values():
    with pytest.raises(ValueError):
        DefectReport(grid=(0.0, 1.0), defect_values=(0.0,), max_defect=0.0, order=1)


def test_from_residuals_excludes_non_finite_points():
    report = DefectReport.from_residuals(
        np.array([0.0, 1.0, 2.0]), np.array([np.nan, -0.5, 0.25]), order=2
    )
    assert report.grid == (1.0, 2.0)
    assert report.excluded_points == (0.0,)
    assert report.max_defect == 0.5


def test_compute_cell_reports_failure_as_null_cell(solver_settings):
    cell = compute_cell("logistic", 2, 1.0, settings=solver_settings)
    assert cell.failed
    assert cell.error_type == "order_too_low"
    assert cell.max_defect is None


def test_compute_cell_for_vortex_includes_root_defect(coarse_settings):
    cell = compute_cell("gp_vortex", 2, 1.0, with_root=True, settings=coarse_settings)
    assert not cell.failed
    assert cell.max_defect > 0
    assert cell.root_defect > 0


def test_table_frame_layout():
    cells = [
        TableCell(problem="p", order=4, epsilon=0.1, max_defect=1.0, max_error=0.1, ratio=0.1),
        TableCell(problem="p", order=4, epsilon=1.0, error_type="no_solution", message="x"),
        TableCell(problem="p", order=5, epsilon=0.1, max_defect=0.5, max_error=0.1, ratio=0.2),
    ]
    frame = table_frame(cells, epsilons=(0.1, 1.0), with_error=True)
    assert list(frame["k"]) == [4, 5]
    assert f"D_{epsilon_label(0.1)}" in frame.columns
    assert "delta_eps1" in frame.columns
    assert frame.loc[0, "D_eps1"] is None or np.isnan(frame.loc[0, "D_eps1"])
    # order 5 at eps = 1 was never computed
    assert frame.loc[1, "D_eps1"] is None or np.isnan(frame.loc[1, "D_eps1"])


def test_table_frame_with_root_columns():
    cells = [TableCell(problem="gp_vortex", order=6, epsilon=1.0, max_defect=0.002)]
    frame = table_frame(cells, epsilons=(1.0,), with_error=False, with_root=True)
    assert list(frame.columns) == ["k", "D_factor", "D_root"]


def test_curve_frame_columns(coarse_settings):
    problem = builtin("linear_singular", 1.0)
    solutions = {2: solve_problem(problem, 2, coarse_settings), 3: None}
    frame = curve_frame(problem, solutions, metric=CurveMetric.ERROR, settings=coarse_settings)
    assert list(frame.columns) == ["t", "error_k2", "error_k3"]
    assert len(frame) == coarse_settings.grid_points
    assert frame["error_k2"].max() < 1e-9
    assert frame["error_k3"].isna().all()


@pytest.mark.parametrize("name, k", [("boundary_layer", 5), ("gp_vortex", 3)])
def test_defect_is_stable_under_grid_refinement(solver_settings, name, k):
    problem = builtin(name, 1.0)
    solution = solve_problem(problem, k, solver_settings)
    coarse = defect(problem, solution, problem.grid(2001)).max_defect
    fine = defect(problem, solution, problem.grid(4001)).max_defect
    assert abs(fine - coarse) < 0.01 * fine
