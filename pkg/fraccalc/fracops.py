"""Riemann-Liouville and Caputo operators on sampled functions.

Every integral is a product-trapezoidal rule: the operand is replaced by its
piecewise-linear interpolant and the weakly singular kernel (x - t)^(alpha-1)
is integrated exactly against it panel by panel, so the endpoint singularity
needs no special treatment and smooth data converge at O(h^2). Derivatives
follow the RL definition literally: integer-order finite differences applied
to the (n - alpha) integral.
"""
import enum
import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import trapezoid

from fraccalc import specfun
from fraccalc.closedforms import ClosedFormResult, rl_derivative_power
from fraccalc.errors import (
    DerivativeUnavailableError,
    GridMismatchError,
    InsufficientClearanceError,
    OutOfDomainError,
    ValidationError,
)
from fraccalc.funcspace import AnalyticFunction, FractionalOrder, GridFunction, interpolate, sample

logger = logging.getLogger(__name__)

Grid = Tuple[float, float, int]
Operand = Union[GridFunction, AnalyticFunction]

# Points closer than this (in grid steps) to a node are treated as that node.
_SNAP = 1e-9


class OperatorKind(enum.Enum):
    RL_INTEGRAL = "rl-integral"
    RL_DERIVATIVE = "rl-derivative"
    CAPUTO = "caputo"
    GRUNWALD_LETNIKOV = "gl"

    @classmethod
    def from_method(cls, method: str) -> "OperatorKind":
        """Map the command-line names integral, rl, caputo and gl onto kinds."""
        kinds = {
            "integral": cls.RL_INTEGRAL,
            "rl": cls.RL_DERIVATIVE,
            "caputo": cls.CAPUTO,
            "gl": cls.GRUNWALD_LETNIKOV,
        }
        if method not in kinds:
            raise ValidationError(f"unknown method {method!r}; expected one of {', '.join(kinds)}")
        return kinds[method]


class Side(enum.Enum):
    LEFT = "left"
    RIGHT = "right"

    @property
    def sign(self) -> float:
        """Sign picked up per derivative: (d/dx) on the left, (-d/dx) on the right."""
        return 1.0 if self is Side.LEFT else -1.0


@dataclass(frozen=True)
class OperatorRequest:
    kind: OperatorKind
    side: Side
    order: FractionalOrder
    terminal: float

    @classmethod
    def on_grid(cls, kind: OperatorKind, side: Side, alpha: float, a: float, b: float) -> "OperatorRequest":
        return cls(kind, side, FractionalOrder(alpha), a if side is Side.LEFT else b)

    def check_point(self, x: float) -> None:
        if self.side is Side.LEFT and not x > self.terminal:
            raise OutOfDomainError(f"left operator needs x > {self.terminal:g}, got {x:g}")
        if self.side is Side.RIGHT and not x < self.terminal:
            raise OutOfDomainError(f"right operator needs x < {self.terminal:g}, got {x:g}")


def _expect(req: OperatorRequest, kind: OperatorKind, sides: Iterable[Side] = (Side.LEFT, Side.RIGHT)) -> None:
    if req.kind is not kind:
        raise ValidationError(f"expected a {kind.value} request, got {req.kind.value}")
    if req.side not in tuple(sides):
        raise ValidationError(f"{kind.value} request cannot use the {req.side.value} side here")


def _check_terminal(req: OperatorRequest, a: float, b: float) -> None:
    expected = a if req.side is Side.LEFT else b
    if req.terminal != expected:
        raise ValidationError(
            f"{req.side.value} terminal must be the grid end {expected:g}, got {req.terminal:g}"
        )


def _check_in_range(a: float, b: float, req: OperatorRequest, x: float) -> float:
    slack = 1e-12 * (b - a)
    if not a - slack <= x <= b + slack:
        raise OutOfDomainError(f"evaluation point outside domain: {x:g} not in [{a:g}, {b:g}]")
    req.check_point(x)
    return min(max(float(x), a), b)


def _power_difference(upper: np.ndarray, lower: np.ndarray, p: float) -> np.ndarray:
    """upper**p - lower**p without cancellation when the two are close."""
    with np.errstate(divide="ignore", invalid="ignore"):
        close = lower**p * np.expm1(p * np.log1p((upper - lower) / lower))
    return np.where(lower > 0.0, close, upper**p - lower**p)


def product_trapezoid_weights(u: np.ndarray, alpha: float) -> np.ndarray:
    """Weights w with sum(w * f) = integral of u^(alpha-1) times the linear interpolant of f.

    ``u`` holds the distances of the interpolation nodes from the kernel
    singularity, strictly decreasing and non-negative; the 1/Gamma(alpha)
    factor is left to the caller. All weights are non-negative.
    """
    u = np.asarray(u, dtype=float)
    upper, lower = u[:-1], u[1:]
    width = upper - lower
    if u.size < 2 or np.any(width <= 0.0) or lower[-1] < 0.0:
        raise ValidationError("kernel distances must be non-negative and strictly decreasing")
    moment0 = _power_difference(upper, lower, alpha) / alpha
    moment1 = _power_difference(upper, lower, alpha + 1.0) / (alpha + 1.0)
    weights = np.zeros_like(u)
    weights[:-1] += (moment1 - lower * moment0) / width
    weights[1:] += (upper * moment0 - moment1) / width
    return weights


def _left_integral(g: GridFunction, alpha: float, x: float) -> float:
    """I^alpha of g at x from the left terminal g.a; 0 at the terminal itself."""
    h = g.h
    pos = (x - g.a) / h
    j_near = int(round(pos))
    if abs(pos - j_near) <= _SNAP:
        if j_near == 0:
            return 0.0
        u = (j_near - np.arange(j_near + 1)) * h
        values = g.values[: j_near + 1]
    else:
        j = int(math.floor(pos))
        frac = pos - j
        u = np.append((pos - np.arange(j + 1)) * h, 0.0)
        at_x = g.values[j] + frac * (g.values[j + 1] - g.values[j])
        values = np.append(g.values[: j + 1], at_x)
    weights = product_trapezoid_weights(u, alpha)
    return float(np.dot(weights, values)) * specfun.rgamma(alpha)


def _integral_at(g: GridFunction, alpha: float, x: float, side: Side) -> float:
    if side is Side.LEFT:
        return _left_integral(g, alpha, x)
    # Right integral of f at x is the left integral of f(a + b - t) at a + b - x.
    return _left_integral(g.reflected(), alpha, g.a + g.b - x)


def rl_integral(f: GridFunction, req: OperatorRequest, x: float) -> float:
    """Left RL integral (1/Gamma(alpha)) int_a^x (x - t)^(alpha-1) f(t) dt."""
    _expect(req, OperatorKind.RL_INTEGRAL, (Side.LEFT,))
    _check_terminal(req, f.a, f.b)
    x = _check_in_range(f.a, f.b, req, x)
    return _left_integral(f, req.order.alpha, x)


def rl_integral_right(f: GridFunction, req: OperatorRequest, x: float) -> float:
    """Right RL integral (1/Gamma(alpha)) int_x^b (t - x)^(alpha-1) f(t) dt."""
    _expect(req, OperatorKind.RL_INTEGRAL, (Side.RIGHT,))
    _check_terminal(req, f.a, f.b)
    x = _check_in_range(f.a, f.b, req, x)
    return _integral_at(f, req.order.alpha, x, Side.RIGHT)


def rl_integral_on_grid(f: GridFunction, order: FractionalOrder, side: Side = Side.LEFT) -> GridFunction:
    """I^alpha f at every node, as a new GridFunction (zero at the terminal node)."""
    source = f if side is Side.LEFT else f.reflected()
    values = np.array([_left_integral(source, order.alpha, x) for x in source.nodes])
    result = GridFunction(f.a, f.b, values)
    return result if side is Side.LEFT else result.reflected()


def finite_difference_weights(offsets: Sequence[float], order: int) -> np.ndarray:
    """Weights w with sum(w_j F(x + s_j h)) / h^order approximating F^(order)(x).

    Solves the moment conditions sum_j w_j s_j^k = k! [k == order].
    """
    offsets = np.asarray(offsets, dtype=float)
    powers = np.arange(offsets.size)
    moments = np.vander(offsets, offsets.size, increasing=True).T
    rhs = np.where(powers == order, float(math.factorial(order)), 0.0)
    return np.linalg.solve(moments, rhs)


def _stencil(x: float, n: int, h: float, a: float, b: float, side: Side) -> np.ndarray:
    """Offsets (in steps of h) of an O(h^2) stencil for the n-th derivative that stays in [a, b].

    Central with spacing 2h when both neighbours fit, otherwise one-sided
    towards the terminal, whose integral data are always available.
    """
    slack = _SNAP * h
    if x - n * h >= a - slack and x + n * h <= b + slack:
        return np.arange(n, -n - 1, -2, dtype=float)
    one_sided = np.arange(n + 2, dtype=float)
    if side is Side.LEFT and x - (n + 1) * h >= a - slack:
        return -one_sided
    if side is Side.RIGHT and x + (n + 1) * h <= b + slack:
        return one_sided
    raise InsufficientClearanceError(
        f"derivative of order {n} at {x:g} needs {n} grid steps of clearance inside [{a:g}, {b:g}]"
    )


def _differentiate(F: Callable[[float], float], x: float, n: int, h: float, a: float, b: float, side: Side) -> float:
    offsets = _stencil(x, n, h, a, b, side)
    weights = finite_difference_weights(offsets, n)
    samples = np.array([F(min(max(x + s * h, a), b)) for s in offsets])
    return float(np.dot(weights, samples)) / h**n


def _rl_definition(f: GridFunction, integral_order: float, n_diff: int, x: float, side: Side) -> float:
    """(+-d/dx)^n_diff applied to I^integral_order f, evaluated at x."""
    F = lambda y: _integral_at(f, integral_order, y, side)
    return side.sign**n_diff * _differentiate(F, x, n_diff, f.h, f.a, f.b, side)


def rl_derivative(f: GridFunction, req: OperatorRequest, x: float) -> float:
    """RL derivative D^alpha f = (+-d/dx)^n I^(n-alpha) f with n = floor(alpha) + 1.

    Integer orders skip the integral and difference f itself.
    """
    _expect(req, OperatorKind.RL_DERIVATIVE)
    _check_terminal(req, f.a, f.b)
    x = _check_in_range(f.a, f.b, req, x)
    order = req.order
    if order.is_integer:
        k = int(order.alpha)
        F = lambda y: interpolate(f, y)
        return req.side.sign**k * _differentiate(F, x, k, f.h, f.a, f.b, req.side)
    return _rl_definition(f, order.n - order.alpha, order.n, x, req.side)


def caputo_derivative(f: Operand, req: OperatorRequest, grid: Grid, x: float) -> float:
    """Caputo derivative: the (n - alpha) RL integral of the exact n-th derivative of f.

    The right-sided form carries (-1)^n. Integer orders return the exact
    classical derivative.
    """
    _expect(req, OperatorKind.CAPUTO)
    if not isinstance(f, AnalyticFunction):
        raise DerivativeUnavailableError("Caputo derivative needs an analytic function with exact derivatives")
    a, b, n_points = grid
    _check_terminal(req, a, b)
    x = _check_in_range(a, b, req, x)

    order = req.order
    if order.is_integer:
        k = int(order.alpha)
        return req.side.sign**k * f.derivative(k, x)
    n = order.n
    if not f.is_defined_on(a, b, n):
        raise DerivativeUnavailableError(f"derivative {n} of {f} is unbounded on [{a:g}, {b:g}]")
    derivative_samples = sample(f, a, b, n_points, k=n)
    return req.side.sign**n * _integral_at(derivative_samples, n - order.alpha, x, req.side)


def gl_derivative(f: GridFunction, order: FractionalOrder, x: float, side: Side = Side.LEFT) -> float:
    """Grunwald-Letnikov sum h^-alpha sum_k (-1)^k C(alpha, k) f(x - k h), x on a node.

    Independent of the product rule, hence a cross-check for rl_derivative.
    """
    if side is Side.RIGHT:
        return gl_derivative(f.reflected(), order, f.a + f.b - x)
    pos = (x - f.a) / f.h
    k_max = int(round(pos))
    if abs(pos - k_max) > _SNAP or not f.contains(x):
        raise OutOfDomainError(f"Grunwald-Letnikov needs x on a grid node, got {x:g}")
    if k_max <= 0:
        raise OutOfDomainError(f"Grunwald-Letnikov needs x > {f.a:g}, got {x:g}")
    coefficients = specfun.generalized_binomial(order.alpha, k_max)
    coefficients[1::2] *= -1.0
    history = f.values[k_max::-1]
    return float(np.dot(coefficients, history)) / f.h**order.alpha


def closed_form_rl_derivative_power(m: float, order: FractionalOrder) -> ClosedFormResult:
    """Lacroix's rule D^alpha x^m = Gamma(m+1)/Gamma(m-alpha+1) x^(m-alpha), terminal 0."""
    return rl_derivative_power(m, order.alpha)


def apply_operator(req: OperatorRequest, f: Operand, x: float, grid: Grid = None) -> float:
    """Dispatch any request; analytic operands are sampled on ``grid`` where needed."""
    if req.kind is OperatorKind.CAPUTO:
        if grid is None:
            raise ValidationError("Caputo evaluation needs a grid (a, b, n_points)")
        return caputo_derivative(f, req, grid, x)
    if isinstance(f, AnalyticFunction):
        if grid is None:
            raise ValidationError("analytic operands need a grid (a, b, n_points) to be sampled on")
        f = sample(f, *grid)
    if req.kind is OperatorKind.RL_INTEGRAL:
        if req.side is Side.LEFT:
            return rl_integral(f, req, x)
        return rl_integral_right(f, req, x)
    if req.kind is OperatorKind.RL_DERIVATIVE:
        return rl_derivative(f, req, x)
    return gl_derivative(f, req.order, x, req.side)


def _combine(f: Operand, g: Operand, c: float, sign: float) -> Operand:
    if isinstance(f, GridFunction) and isinstance(g, GridFunction):
        return f.scaled(c).added(g, sign)
    if isinstance(f, AnalyticFunction) and isinstance(g, AnalyticFunction):
        return AnalyticFunction.combination((c, f), (sign, g))
    raise GridMismatchError("operands must both be grid functions or both analytic")


def check_linearity(
    op: OperatorRequest,
    f: Operand,
    g: Operand,
    c: float,
    x: Union[float, Sequence[float]],
    grid: Grid = None,
) -> float:
    """max |op(c f +- g) - (c op(f) +- op(g))| over the requested points and both signs."""
    if isinstance(f, GridFunction) and isinstance(g, GridFunction):
        f.check_same_grid(g)
    points = np.atleast_1d(np.asarray(x, dtype=float))
    deviation = 0.0
    for sign in (1.0, -1.0):
        combined = _combine(f, g, c, sign)
        for point in points:
            lhs = apply_operator(op, combined, point, grid)
            rhs = c * apply_operator(op, f, point, grid) + sign * apply_operator(op, g, point, grid)
            deviation = max(deviation, abs(lhs - rhs))
    return deviation


def check_semigroup(f: GridFunction, alpha: FractionalOrder, beta: FractionalOrder, x: float) -> float:
    """|I^alpha(I^beta f)(x) - I^(alpha+beta) f(x)|, inner integral taken on the whole grid first."""
    req = OperatorRequest(OperatorKind.RL_INTEGRAL, Side.LEFT, alpha, f.a)
    x = _check_in_range(f.a, f.b, req, x)
    inner = rl_integral_on_grid(f, beta)
    composed = _left_integral(inner, alpha.alpha, x)
    direct = _left_integral(f, alpha.alpha + beta.alpha, x)
    return abs(composed - direct)


def check_integration_by_parts(f: GridFunction, g: GridFunction, alpha: FractionalOrder) -> float:
    """|int_a^b (I_left^alpha f) g - int_a^b f (I_right^alpha g)|, both by the trapezoid rule."""
    f.check_same_grid(g)
    nodes = f.nodes
    left_side = trapezoid(rl_integral_on_grid(f, alpha, Side.LEFT).values * g.values, nodes)
    right_side = trapezoid(f.values * rl_integral_on_grid(g, alpha, Side.RIGHT).values, nodes)
    return float(abs(left_side - right_side))


def check_integer_recovery(
    f: AnalyticFunction,
    n: int,
    x: float,
    grid: Grid = (0.0, 1.0, 1025),
    side: Side = Side.LEFT,
) -> float:
    """Deviation of the RL definition at alpha = n from f^(n) (left) or (-1)^n f^(n) (right).

    Goes through the definition itself, (+-d/dx)^(n+1) I^1 f, rather than the
    integer shortcut of rl_derivative.
    """
    if n < 1 or int(n) != n:
        raise ValidationError(f"integer order must be a positive integer, got {n}")
    g = sample(f, *grid)
    req = OperatorRequest.on_grid(OperatorKind.RL_DERIVATIVE, side, float(n), g.a, g.b)
    x = _check_in_range(g.a, g.b, req, x)
    value = _rl_definition(g, 1.0, int(n) + 1, x, side)
    target = side.sign**n * f.derivative(int(n), x)
    return abs(value - target)


def check_zero_order_limit(
    f: GridFunction,
    x: float,
    p_sequence: Sequence[float],
    side: Side = Side.LEFT,
) -> np.ndarray:
    """|D^p f(x) - f(x)| for each p of a sequence decreasing towards 0."""
    p = np.asarray(p_sequence, dtype=float)
    if p.size == 0 or np.any(p <= 0.0) or np.any(p >= 1.0) or np.any(np.diff(p) >= 0.0):
        raise ValidationError("p_sequence must be strictly decreasing inside (0, 1)")
    target = interpolate(f, x)
    deviations = []
    for order in p:
        req = OperatorRequest.on_grid(OperatorKind.RL_DERIVATIVE, side, order, f.a, f.b)
        deviations.append(abs(rl_derivative(f, req, x) - target))
    return np.array(deviations)


def check_nonlocality(f: GridFunction, order: FractionalOrder, x: float, amplitude: float = 0.1) -> float:
    """Change of the left RL derivative at x when f is bumped only on [a, a + (x-a)/4]."""
    req = OperatorRequest(OperatorKind.RL_DERIVATIVE, Side.LEFT, order, f.a)
    x = _check_in_range(f.a, f.b, req, x)
    width = (x - f.a) / 4.0
    t = f.nodes - f.a
    bump = np.where(t <= width, amplitude * np.sin(np.pi * t / width) ** 2, 0.0)
    perturbed = GridFunction(f.a, f.b, f.values + bump)
    return abs(rl_derivative(perturbed, req, x) - rl_derivative(f, req, x))


def check_reflection(f: GridFunction, order: FractionalOrder, x: float) -> float:
    """|right integral of f at x - left integral of f(a+b-t) at a+b-x|; zero by construction."""
    right = rl_integral_right(f, OperatorRequest(OperatorKind.RL_INTEGRAL, Side.RIGHT, order, f.b), x)
    mirrored = f.reflected()
    left = rl_integral(
        mirrored, OperatorRequest(OperatorKind.RL_INTEGRAL, Side.LEFT, order, f.a), f.a + f.b - x
    )
    return abs(right - left)


def caputo_rl_relation_residual(
    f: AnalyticFunction,
    order: FractionalOrder,
    x: float,
    grid: Grid = (0.0, 1.0, 1025),
) -> float:
    """D^alpha f(x) - [C D^alpha f(x) + sum_{k<n} f^(k)(a) (x-a)^(k-alpha) / Gamma(k-alpha+1)]."""
    if order.is_integer:
        raise ValidationError("the Caputo-RL relation is checked for non-integer orders only")
    a, b, n_points = grid
    rl = rl_derivative(
        sample(f, a, b, n_points),
        OperatorRequest(OperatorKind.RL_DERIVATIVE, Side.LEFT, order, a),
        x,
    )
    caputo = caputo_derivative(f, OperatorRequest(OperatorKind.CAPUTO, Side.LEFT, order, a), grid, x)
    correction = math.fsum(
        f.derivative(k, a) * (x - a) ** (k - order.alpha) * specfun.rgamma(k - order.alpha + 1.0)
        for k in range(order.n)
    )
    return rl - (caputo + correction)
