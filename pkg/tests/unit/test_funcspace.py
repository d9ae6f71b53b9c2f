import io
import math

import numpy as np
import pytest

from fraccalc.errors import DomainError, GridMismatchError, OutOfDomainError, ValidationError
from fraccalc.funcspace import (
    AnalyticFunction,
    FractionalOrder,
    FunctionKind,
    GridFunction,
    interpolate,
    parse_function,
    read_grid_csv,
    sample,
    write_grid_csv,
)


def test_fractional_order_ceiling():
    assert FractionalOrder(0.5).n == 1
    assert FractionalOrder(1.0).n == 2
    assert FractionalOrder(1.7).n == 2
    assert FractionalOrder(2.0).is_integer
    assert not FractionalOrder(0.3).is_integer


@pytest.mark.parametrize("alpha", [0.0, -0.5, float("nan"), float("inf")])
def test_fractional_order_rejects(alpha):
    with pytest.raises(ValidationError):
        FractionalOrder(alpha)


def test_power_derivatives():
    f = AnalyticFunction.power(2.5)
    assert f.value(4.0) == pytest.approx(32.0)
    assert f.derivative(1, 4.0) == pytest.approx(2.5 * 4.0**1.5)
    assert f.derivative(2, 4.0) == pytest.approx(2.5 * 1.5 * 2.0)


def test_integer_power_derivatives_vanish():
    f = AnalyticFunction.power(3.0)
    np.testing.assert_array_equal(f.derivative(4, np.array([0.0, 1.0, 2.0])), 0.0)
    assert f.derivative(3, 0.0) == pytest.approx(6.0)


def test_polynomial_exponential_sinusoid():
    assert AnalyticFunction.polynomial([1.0, 2.0, 3.0]).derivative(1, 2.0) == pytest.approx(14.0)
    assert AnalyticFunction.exponential(-2.0).derivative(2, 0.5) == pytest.approx(4.0 * math.exp(-1.0))
    sin = AnalyticFunction.sinusoid(3.0)
    assert sin.derivative(1, 0.2) == pytest.approx(3.0 * math.cos(0.6))
    assert sin.derivative(3, 0.2) == pytest.approx(-27.0 * math.cos(0.6))
    assert AnalyticFunction.constant(7.0).derivative(1, 0.3) == 0.0


def test_combination_is_linear():
    f = AnalyticFunction.combination((2.0, AnalyticFunction.power(2.0)), (-1.0, AnalyticFunction.sinusoid(1.0)))
    assert f.kind is FunctionKind.COMBINATION
    assert f.value(0.5) == pytest.approx(0.5 - math.sin(0.5))
    assert f.derivative(2, 0.5) == pytest.approx(4.0 + math.sin(0.5))


def test_is_defined_on():
    assert AnalyticFunction.power(0.5).is_defined_on(0.0, 1.0)
    assert not AnalyticFunction.power(0.5).is_defined_on(0.0, 1.0, k=1)
    assert AnalyticFunction.power(0.5).is_defined_on(0.1, 1.0, k=3)
    assert not AnalyticFunction.power(-0.5).is_defined_on(0.0, 1.0)
    assert not AnalyticFunction.power(1.5).is_defined_on(-1.0, 1.0)
    assert AnalyticFunction.power(2.0).is_defined_on(-1.0, 1.0, k=5)


def test_sample_uniform_nodes():
    g = sample(AnalyticFunction.power(2.0), 0.0, 2.0, 5)
    assert g.h == pytest.approx(0.5)
    np.testing.assert_allclose(g.nodes, [0.0, 0.5, 1.0, 1.5, 2.0])
    np.testing.assert_allclose(g.values, [0.0, 0.25, 1.0, 2.25, 4.0])


def test_sample_rejects_singular_operand():
    with pytest.raises(DomainError):
        sample(AnalyticFunction.power(-0.5), 0.0, 1.0, 9)


def test_grid_function_is_read_only():
    g = GridFunction(0.0, 1.0, [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        g.values[0] = 5.0


@pytest.mark.parametrize("a, b, values", [(1.0, 0.0, [1.0, 2.0]), (0.0, 1.0, [1.0]), (0.0, 1.0, [1.0, np.nan])])
def test_grid_function_rejects(a, b, values):
    with pytest.raises(ValidationError):
        GridFunction(a, b, values)


def test_grid_arithmetic_and_reflection():
    f = GridFunction(0.0, 1.0, [0.0, 1.0, 2.0])
    g = GridFunction(0.0, 1.0, [1.0, 1.0, 1.0])
    np.testing.assert_array_equal(f.scaled(2.0).added(g, -1.0).values, [-1.0, 1.0, 3.0])
    np.testing.assert_array_equal(f.reflected().values, [2.0, 1.0, 0.0])
    with pytest.raises(GridMismatchError):
        f.added(GridFunction(0.0, 2.0, [1.0, 1.0, 1.0]))


def test_interpolate():
    g = sample(AnalyticFunction.polynomial([1.0, 3.0]), 0.0, 1.0, 5)
    assert interpolate(g, 0.3) == pytest.approx(1.9)
    assert interpolate(g, 1.0) == pytest.approx(4.0)
    with pytest.raises(OutOfDomainError):
        interpolate(g, 1.5)


def test_parse_function():
    assert parse_function("const:5") == AnalyticFunction.constant(5.0)
    assert parse_function("poly:1,0,2").params == (1.0, 0.0, 2.0)
    assert parse_function("exp:-1").kind is FunctionKind.EXPONENTIAL
    assert str(parse_function("pow:1.5")) == "pow:1.5"


@pytest.mark.parametrize("spec", ["pow", "pow:", "tan:1", "pow:1,2", "exp:x", "sin:inf"])
def test_parse_function_rejects(spec):
    with pytest.raises(ValidationError):
        parse_function(spec)


def test_grid_csv_keeps_full_precision():
    g = sample(AnalyticFunction.sinusoid(1.0), 0.0, 1.0, 17)
    buf = io.StringIO()
    write_grid_csv(g, buf)
    assert buf.getvalue().splitlines()[0] == "x,value"
    buf.seek(0)
    loaded = read_grid_csv(buf)
    assert loaded.same_grid(g)
    np.testing.assert_array_equal(loaded.values, g.values)


def test_grid_csv_rejects_bad_input():
    with pytest.raises(ValidationError):
        read_grid_csv(io.StringIO("t,f\n0,1\n1,2\n"))
    with pytest.raises(ValidationError):
        read_grid_csv(io.StringIO("x,value\n0,1\n0.1,2\n0.5,3\n"))
