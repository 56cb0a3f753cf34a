import math

import numpy as np
import pytest
from pydantic import ValidationError

from exceptions import (
    InvalidConditionError,
    NoSolutionError,
    ParameterCountError,
    UnsupportedProblemError,
)
from models.factor_models import Factor, FactorForm
from models.problem_models import Condition, ConstrainedSolveSpec
from models.series_models import Prefactor, SeriesOracle, TruncatedSeries
from services.constraints import (
    _find_roots,
    _EvaluationFailed,
    apply_asymptotic,
    check_conditions,
    scan_points,
    solve_constrained,
)
from services.factor_evaluation import evaluate_with_derivatives
from services.problem_catalog import builtin


def _unused_oracle(names: tuple[str, ...]) -> SeriesOracle:
    def generator(order, theta):
        raise AssertionError("oracle must not be queried")

    return SeriesOracle(generator=generator, parameter_names=names)


def test_asymptotic_condition_must_sit_at_infinity():
    with pytest.raises(ValidationError):
        Condition(kind="asymptotic_power", location=1.0, target=1.0, exponent=0.0)
    with pytest.raises(ValidationError):
        Condition(kind="asymptotic_power", location=math.inf, target=1.0)
    with pytest.raises(ValidationError):
        Condition(kind="value_at_point", location=math.inf, target=1.0)


def test_apply_asymptotic_residuals():
    # 2 r (1 + r^2/4)^(-1/2) -> 4 as r -> inf
    form = FactorForm(
        prefactor=Prefactor.power(2.0, 1), factors=(Factor.power(0.25, -0.5),), order=1, step=2
    )
    amplitude, exponent = apply_asymptotic(form, Condition.asymptotic(1.0, 0.0))
    assert amplitude == pytest.approx(3.0)
    assert exponent == pytest.approx(0.0)


def test_apply_asymptotic_needs_asymptotic_condition():
    form = FactorForm(factors=(Factor.power(1.0, 1.0),), order=1)
    with pytest.raises(InvalidConditionError):
        apply_asymptotic(form, Condition.value(0.0, 1.0))


def test_check_conditions_counts_asymptotic_twice():
    form = FactorForm(factors=(Factor.power(1.0, -1.0),), order=1)
    residuals = check_conditions(
        form, [Condition.value(0.0, 1.0), Condition.derivative(0.0, -1.0), Condition.asymptotic(1.0, -1.0)]
    )
    assert residuals == pytest.approx([0.0, 0.0, 0.0, 0.0], abs=1e-14)


def test_scan_points():
    positive = scan_points((1e-3, 10.0), 5)
    assert np.allclose(positive, np.geomspace(1e-3, 10.0, 5))
    negative = scan_points((-10.0, -1e-3), 5)
    assert np.all(negative < 0)
    assert np.allclose(np.sort(-negative), np.geomspace(1e-3, 10.0, 5))
    assert np.allclose(scan_points((-1.0, 1.0), 3), [-1.0, 0.0, 1.0])


def test_parameter_count_must_balance():
    spec = ConstrainedSolveSpec(
        oracle=_unused_oracle(("a1",)), conditions=(Condition.value(0.0, 1.0),), order=3
    )
    with pytest.raises(ParameterCountError):
        solve_constrained(spec)


def test_two_free_parameters_are_unsupported():
    spec = ConstrainedSolveSpec(
        oracle=_unused_oracle(("a1", "a2")),
        conditions=(Condition.value(1.0, 1.0), Condition.value(2.0, 1.0)),
        order=4,
    )
    with pytest.raises(UnsupportedProblemError):
        solve_constrained(spec)


def test_conditions_at_expansion_point_are_only_verified(solver_settings):
    result = solve_constrained(builtin("carrier_transfer").constrained_spec(4), solver_settings)
    assert result.theta == ()
    assert max(abs(r) for r in result.best.residuals) < 1e-12


def test_violated_builtin_condition_has_no_solution(solver_settings):
    spec = ConstrainedSolveSpec(
        oracle=builtin("linear_singular").oracle, conditions=(Condition.value(0.0, 3.0),), order=2
    )
    with pytest.raises(NoSolutionError):
        solve_constrained(spec, solver_settings)


def test_logistic_shooting_finds_the_initial_slope(solver_settings):
    result = solve_constrained(builtin("logistic", 1.0, 2.0).constrained_spec(3), solver_settings)
    assert result.theta[0] == pytest.approx(0.5, abs=1e-9)
    significant = [f for f in result.form.power_factors if abs(f.n) > 1e-8]
    assert len(significant) == 1
    assert abs(significant[0].A - (-0.5)) < 1e-9
    assert abs(significant[0].n - (-1.0)) < 1e-9


def test_asymptotic_exponent_is_imposed_in_the_moment_solve(solver_settings):
    result = solve_constrained(builtin("gp_vortex").constrained_spec(2), solver_settings)
    exponent = result.form.prefactor.zero_exponent + 2 * sum(f.n for f in result.form.power_factors)
    assert abs(exponent) < 1e-9
    amplitude, _ = apply_asymptotic(result.form, Condition.asymptotic(1.0, 0.0))
    assert abs(amplitude) < 1e-9


def test_series_oracle_normalizes():
    oracle = SeriesOracle(
        generator=lambda order, theta: TruncatedSeries(
            np.array([0.0, 3.0, 0.0, 1.5, 0.0][: order + 1], dtype=complex)
        ),
        step=2,
        leading_exponent=1,
    )
    prefactor, s = oracle.normalized(1)
    assert prefactor.leading_scale == pytest.approx(3.0)
    assert np.allclose(s.coefficients, [1.0, 0.5])


def _windowed(low: float, high: float, root: float):
    """Residual that exists only on [low, high], linear with a root inside."""

    def g(theta: float) -> float:
        if not low <= theta <= high:
            raise _EvaluationFailed("outside the window")
        return theta - root

    return g


def _bracket_spec() -> ConstrainedSolveSpec:
    return ConstrainedSolveSpec(
        oracle=_unused_oracle(("a1",)),
        conditions=(Condition.value(1.0, 0.0),),
        order=3,
        parameter_brackets=((1e-3, 10.0),),
    )


def _has_root(roots, root: float) -> bool:
    return any(abs(r - root) < 1e-10 for r in roots)


def test_narrow_window_between_scan_points_needs_a_seed(solver_settings):
    g = _windowed(0.575, 0.595, 0.583142)
    assert not _has_root(_find_roots(g, _bracket_spec(), solver_settings), 0.583142)
    roots = _find_roots(g, _bracket_spec(), solver_settings, seeds=(0.518840,))
    assert _has_root(roots, 0.583142)


def test_isolated_finite_sample_is_refined(solver_settings):
    theta = scan_points((1e-3, 10.0), solver_settings.bracket_points)[43]
    root = 1.001 * theta
    g = _windowed(0.997 * theta, 1.003 * theta, root)
    assert _has_root(_find_roots(g, _bracket_spec(), solver_settings), root)


def test_seeds_are_root_candidates(solver_settings):
    g = _windowed(2.0 - 1e-12, 2.0 + 1e-12, 2.0)
    assert _has_root(_find_roots(g, _bracket_spec(), solver_settings, seeds=(2.0,)), 2.0)


@pytest.mark.parametrize("eps", [1.0, 10.0])
@pytest.mark.parametrize("k", [4, 5, 6, 7])
def test_boundary_layer_conditions_hold_exactly(solver_settings, eps, k):
    result = solve_constrained(builtin("boundary_layer", eps).constrained_spec(k), solver_settings)
    assert max(abs(r) for r in result.best.residuals) < 1e-9
    for candidate in (result.best, *result.alternates):
        at_zero = evaluate_with_derivatives(candidate.form, 0.0)[0]
        at_one = evaluate_with_derivatives(candidate.form, 1.0)[0]
        assert abs(at_zero) < 1e-9
        assert abs(at_one - 1.0) < 1e-9
