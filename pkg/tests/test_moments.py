import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from exceptions import ApproximantError, NotNormalizedError, OrderTooLowError
from models.factor_models import Factor, FactorForm
from models.series_models import TruncatedSeries
from services.moments import factor_moments, moments_from_series
from services.problem_catalog import builtin

nodes = st.floats(min_value=-1.5, max_value=1.5, allow_nan=False).filter(lambda a: abs(a) > 0.05)
exponents = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False)


def test_moments_of_single_binomial():
    # (1 + 2x)^(1/2): B_m = (1/2) 2^m
    form = FactorForm(factors=(Factor.power(2.0, 0.5),), order=5)
    B = moments_from_series(form.expand(5))
    assert np.allclose(B.as_array(), [0.5 * 2**m for m in range(1, 6)])


def test_carrier_moments_sign_convention():
    _, s = builtin("carrier_transfer").oracle.normalized(2)
    B = moments_from_series(s)
    assert B.values[0] == pytest.approx(0.25)
    assert B.values[1] == pytest.approx(-0.125)


def test_exponential_series_has_single_moment():
    coeffs = [(-1.0) ** n / np.prod(range(1, n + 1)) for n in range(6)]
    B = moments_from_series(TruncatedSeries(np.array(coeffs, dtype=complex)))
    assert np.allclose(B.as_array(), [-1, 0, 0, 0, 0], atol=1e-13)


@given(st.lists(st.tuples(nodes, exponents), min_size=1, max_size=3))
def test_log_moments_match_power_sums(pairs):
    factors = tuple(Factor.power(A, n) for A, n in pairs)
    form = FactorForm(factors=factors, order=6)
    from_series = moments_from_series(form.expand(6)).as_array()
    direct = factor_moments(factors, 6).as_array()
    assert np.allclose(from_series, direct, rtol=1e-9, atol=1e-9)


def test_unnormalized_series_is_rejected():
    with pytest.raises(NotNormalizedError) as info:
        moments_from_series(TruncatedSeries(np.array([2.0, 1.0, 0.0], dtype=complex)))
    assert isinstance(info.value, ApproximantError)
    assert info.value.error_type == "not_normalized"


def test_order_zero_is_too_low():
    with pytest.raises(OrderTooLowError):
        moments_from_series(TruncatedSeries(np.array([1.0], dtype=complex)))


def test_exponential_factor_contributes_to_first_moment_only():
    B = factor_moments((Factor.exponential(-0.5), Factor.power(0.5, 2.0)), 3)
    assert np.allclose(B.as_array(), [-0.5 + 1.0, 0.5, 0.25])


tails = st.lists(st.floats(min_value=-0.5, max_value=0.5, allow_nan=False), min_size=5, max_size=5)


@given(tails, tails)
def test_moments_add_under_multiplication(head, tail):
    s = TruncatedSeries(np.array([1.0, *head], dtype=complex))
    t = TruncatedSeries(np.array([1.0, *tail], dtype=complex))
    combined = moments_from_series(s * t).as_array()
    separate = moments_from_series(s).as_array() + moments_from_series(t).as_array()
    assert np.allclose(combined, separate, rtol=1e-9, atol=1e-10)
