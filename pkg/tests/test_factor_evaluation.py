import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from exceptions import BranchCutError, ConjugationBrokenError, InvalidConditionError
from models.factor_models import Factor, FactorForm
from models.series_models import Prefactor
from services.factor_evaluation import (
    detect_fixed_form,
    evaluate,
    evaluate_with_derivatives,
    limit_at_infinity,
)


# 2 r (1 + r^2/4)^(-1/2) (1 + 0.3 r^2)^(0.2)
ODD_FORM = FactorForm(
    prefactor=Prefactor.power(2.0, 1),
    factors=(Factor.power(0.25, -0.5), Factor.power(0.3, 0.2)),
    order=3,
    step=2,
)


@pytest.fixture
def odd_form() -> FactorForm:
    return ODD_FORM


def test_value_matches_closed_form(odd_form):
    r = np.linspace(0.0, 5.0, 11)
    expected = 2 * r * (1 + r**2 / 4) ** -0.5 * (1 + 0.3 * r**2) ** 0.2
    assert np.allclose(evaluate(odd_form, r), expected, rtol=1e-13)


@given(st.floats(min_value=0.05, max_value=4.0))
def test_derivatives_match_finite_differences(r):
    h = 1e-4
    value, first, second = evaluate_with_derivatives(ODD_FORM, r)
    plus, minus = evaluate(ODD_FORM, r + h), evaluate(ODD_FORM, r - h)
    assert first == pytest.approx((plus - minus) / (2 * h), rel=1e-6, abs=1e-8)
    assert second == pytest.approx((plus - 2 * value + minus) / h**2, rel=1e-5, abs=1e-5)


def test_derivatives_are_finite_at_origin(odd_form):
    value, first, second = evaluate_with_derivatives(odd_form, 0.0)
    assert value == 0.0
    assert first == pytest.approx(2.0)
    assert second == pytest.approx(0.0, abs=1e-14)


def test_exponential_factor():
    form = FactorForm(factors=(Factor.exponential(-2.0),), order=2)
    x = np.array([0.0, 0.5, 1.0])
    value, first, second = evaluate_with_derivatives(form, x)
    assert np.allclose(value, np.exp(-2 * x))
    assert np.allclose(first, -2 * np.exp(-2 * x))
    assert np.allclose(second, 4 * np.exp(-2 * x))


def test_limit_at_infinity(odd_form):
    amplitude, exponent = limit_at_infinity(odd_form)
    assert amplitude.real == pytest.approx(2.0 * 0.25**-0.5 * 0.3**0.2)
    assert exponent.real == pytest.approx(1 + 2 * (-0.5 + 0.2))


def test_limit_rejects_exponential_factor():
    form = FactorForm(factors=(Factor.exponential(1.0),), order=2)
    with pytest.raises(InvalidConditionError):
        limit_at_infinity(form)


def test_branch_cut_is_reported():
    form = FactorForm(factors=(Factor.power(-1.0, 0.5),), order=2)
    assert evaluate(form, 0.5) == pytest.approx(np.sqrt(0.5))
    with pytest.raises(BranchCutError):
        evaluate(form, 2.0)


def test_integer_exponent_crosses_the_cut():
    form = FactorForm(factors=(Factor.power(-1.0, -1.0),), order=2)
    assert evaluate(form, 3.0) == pytest.approx(-0.5)


def test_lone_complex_factor_breaks_conjugation():
    form = FactorForm(factors=(Factor.power(0.25 + 0.4j, 0.5),), order=2, real=True)
    with pytest.raises(ConjugationBrokenError):
        evaluate(form, 1.0)


def test_conjugate_pair_is_real():
    A = 0.25 + 0.4j
    form = FactorForm(
        factors=(Factor.power(A, 0.5), Factor.power(A.conjugate(), 0.5)), order=4, real=True
    )
    x = np.linspace(0, 3, 7)
    expected = np.sqrt(1 + 0.5 * x + abs(A) ** 2 * x**2)
    assert np.allclose(evaluate(form, x), expected)


def test_fixed_form_detection(odd_form):
    grid = np.linspace(0, 5, 51)
    assert detect_fixed_form([odd_form, odd_form, odd_form], grid).stabilized
    other = odd_form.model_copy(update={"factors": (Factor.power(0.25, -0.5),)})
    report = detect_fixed_form([odd_form, other], grid)
    assert not report.stabilized
    assert report.differences[0] > 1e-3


def test_fixed_form_needs_two_forms(odd_form):
    with pytest.raises(InvalidConditionError):
        detect_fixed_form([odd_form], np.linspace(0, 1, 3))
