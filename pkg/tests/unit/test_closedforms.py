import math

import pytest

from fraccalc import closedforms, specfun
from fraccalc.closedforms import ClosedFormKind
from fraccalc.errors import DomainError, NoClosedFormError, ValidationError
from fraccalc.funcspace import AnalyticFunction


def test_lacroix_half_derivative_of_x():
    result = closedforms.rl_derivative_power(1.0, 0.5)
    assert result.kind is ClosedFormKind.SCALED_POWER
    assert result.exponent == pytest.approx(0.5)
    assert result.evaluate(math.pi) == pytest.approx(2.0, rel=1e-14)


def test_derivative_of_constant_is_not_zero():
    result = closedforms.rl_derivative_power(0.0, 0.5)
    assert result.evaluate(1.0) == pytest.approx(1.0 / math.sqrt(math.pi))


def test_zero_where_reciprocal_gamma_vanishes():
    assert closedforms.rl_derivative_power(1.0, 2.0).kind is ClosedFormKind.ZERO
    assert closedforms.rl_derivative_power(0.5, 1.5).evaluate(0.3) == 0.0


def test_power_rule_domain():
    with pytest.raises(DomainError):
        closedforms.rl_derivative_power(-1.0, 0.5)
    with pytest.raises(DomainError):
        closedforms.rl_integral_power(-1.5, 0.5)


def test_integral_of_power():
    result = closedforms.rl_integral_power(1.0, 0.5)
    assert result.evaluate(1.0) == pytest.approx(1.0 / specfun.gamma(2.5))
    assert closedforms.rl_integral_power(0.0, 1.0).evaluate(3.0) == pytest.approx(3.0)


def test_caputo_power_kills_low_integer_powers():
    assert closedforms.caputo_derivative_power(0.0, 0.5).kind is ClosedFormKind.ZERO
    assert closedforms.caputo_derivative_power(1.0, 1.5).kind is ClosedFormKind.ZERO
    assert closedforms.caputo_derivative_power(2.0, 0.5).evaluate(1.0) == pytest.approx(2.0 / specfun.gamma(2.5))
    with pytest.raises(DomainError):
        closedforms.caputo_derivative_power(0.5, 1.5)


def test_liouville_exponential():
    assert closedforms.liouville_exponential(2.0, 0.5, 0.3) == pytest.approx(math.sqrt(2.0) * math.exp(0.6))
    with pytest.raises(DomainError):
        closedforms.liouville_exponential(-1.0, 0.5, 0.3)


def test_exact_value_constant_any_terminal():
    f = AnalyticFunction.constant(5.0)
    assert closedforms.exact_value(f, "rl", 0.5, 1.0) == pytest.approx(5.0 / math.sqrt(math.pi))
    assert closedforms.exact_value(f, "caputo", 0.5, 1.0) == 0.0
    assert closedforms.exact_value(f, "integral", 1.0, 3.0, terminal=1.0) == pytest.approx(10.0)


def test_exact_value_polynomial_is_sum_of_powers():
    f = AnalyticFunction.polynomial([2.0, 0.0, 1.0])
    expected = 2.0 * closedforms.rl_derivative_power(0.0, 0.5).evaluate(0.7) + closedforms.rl_derivative_power(
        2.0, 0.5
    ).evaluate(0.7)
    assert closedforms.exact_value(f, "rl", 0.5, 0.7) == pytest.approx(expected)
    assert closedforms.exact_value(f, "caputo", 0.5, 0.7) == pytest.approx(
        closedforms.caputo_derivative_power(2.0, 0.5).evaluate(0.7)
    )


def test_exponential_oracles():
    lam, x = 1.3, 0.8
    f = AnalyticFunction.exponential(lam)
    # alpha = 1 reduces to the classical integral and derivative
    assert closedforms.exact_value(f, "integral", 1.0, x) == pytest.approx(math.expm1(lam * x) / lam, rel=1e-12)
    assert closedforms.exact_value(f, "rl", 1.0, x) == pytest.approx(lam * math.exp(lam * x), rel=1e-12)
    # RL and Caputo differ by the initial-value term x^-alpha / Gamma(1 - alpha)
    gap = closedforms.exact_value(f, "rl", 0.4, x) - closedforms.exact_value(f, "caputo", 0.4, x)
    assert gap == pytest.approx(x**-0.4 / specfun.gamma(0.6), rel=1e-10)


def test_no_closed_form():
    with pytest.raises(NoClosedFormError):
        closedforms.exact_value(AnalyticFunction.sinusoid(1.0), "rl", 0.5, 0.5)
    with pytest.raises(NoClosedFormError):
        closedforms.exact_value(AnalyticFunction.power(2.0), "rl", 0.5, 1.5, terminal=1.0)
    with pytest.raises(ValidationError):
        closedforms.exact_value(AnalyticFunction.power(2.0), "gl", 0.5, 0.5)
