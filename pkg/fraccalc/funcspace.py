"""Operand representations: uniform-grid samples and the analytic registry."""
import enum
import logging
import math
from dataclasses import dataclass, field
from typing import IO, Tuple, Union

import numpy as np
import pandas as pd
from numpy.polynomial import polynomial as P

from fraccalc.errors import DomainError, GridMismatchError, OutOfDomainError, ValidationError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

# Relative slack when deciding whether a point sits on the closed grid interval.
_EDGE_TOL = 1e-12


@dataclass(frozen=True)
class FractionalOrder:
    """A real order alpha > 0 and its integer ceiling n = floor(alpha) + 1."""

    alpha: float
    n: int = field(init=False)

    def __post_init__(self):
        alpha = float(self.alpha)
        if not math.isfinite(alpha):
            raise ValidationError(f"fractional order must be finite, got {alpha}")
        if alpha <= 0.0:
            raise ValidationError(f"fractional order must be positive, got {alpha:g}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "n", int(math.floor(alpha)) + 1)

    @property
    def is_integer(self) -> bool:
        return self.alpha == math.floor(self.alpha)

    def __str__(self):
        return f"{self.alpha:g}"


class FunctionKind(enum.Enum):
    POWER = "pow"
    POLYNOMIAL = "poly"
    EXPONENTIAL = "exp"
    SINUSOID = "sin"
    CONSTANT = "const"
    COMBINATION = "combination"


@dataclass(frozen=True)
class AnalyticFunction:
    """Closed-form function with exact derivatives of every order.

    Build instances through the class-method constructors; ``params`` holds
    m, the polynomial coefficients, lambda, omega or c depending on ``kind``,
    and ``terms`` the (coefficient, function) pairs of a combination.
    """

    kind: FunctionKind
    params: Tuple[float, ...] = ()
    terms: Tuple[Tuple[float, "AnalyticFunction"], ...] = ()

    @classmethod
    def power(cls, m: float) -> "AnalyticFunction":
        return cls(FunctionKind.POWER, (float(m),))

    @classmethod
    def polynomial(cls, coeffs) -> "AnalyticFunction":
        coeffs = tuple(float(c) for c in coeffs)
        if not coeffs:
            raise ValidationError("polynomial needs at least one coefficient")
        return cls(FunctionKind.POLYNOMIAL, coeffs)

    @classmethod
    def exponential(cls, lam: float) -> "AnalyticFunction":
        return cls(FunctionKind.EXPONENTIAL, (float(lam),))

    @classmethod
    def sinusoid(cls, omega: float) -> "AnalyticFunction":
        return cls(FunctionKind.SINUSOID, (float(omega),))

    @classmethod
    def constant(cls, c: float) -> "AnalyticFunction":
        return cls(FunctionKind.CONSTANT, (float(c),))

    @classmethod
    def combination(cls, *terms: Tuple[float, "AnalyticFunction"]) -> "AnalyticFunction":
        if not terms:
            raise ValidationError("combination needs at least one term")
        return cls(FunctionKind.COMBINATION, (), tuple((float(c), f) for c, f in terms))

    def value(self, x: ArrayLike) -> ArrayLike:
        return self.derivative(0, x)

    def derivative(self, k: int, x: ArrayLike) -> ArrayLike:
        if k < 0 or int(k) != k:
            raise ValidationError(f"derivative order must be a non-negative integer, got {k}")
        k = int(k)
        x = np.asarray(x, dtype=float)

        if self.kind is FunctionKind.POWER:
            m = self.params[0]
            if m == math.floor(m) and m >= 0 and k > m:
                result = np.zeros_like(x)
            else:
                # falling factorial m(m-1)...(m-k+1)
                coeff = float(np.prod(m - np.arange(k))) if k else 1.0
                with np.errstate(divide="ignore", invalid="ignore"):
                    result = coeff * np.power(x, m - k)
        elif self.kind is FunctionKind.POLYNOMIAL:
            coeffs = P.polyder(np.array(self.params), k) if k else np.array(self.params)
            result = P.polyval(x, coeffs)
        elif self.kind is FunctionKind.EXPONENTIAL:
            lam = self.params[0]
            result = lam ** k * np.exp(lam * x)
        elif self.kind is FunctionKind.SINUSOID:
            omega = self.params[0]
            phase = (np.sin, np.cos, lambda t: -np.sin(t), lambda t: -np.cos(t))[k % 4]
            result = omega ** k * phase(omega * x)
        elif self.kind is FunctionKind.CONSTANT:
            result = np.full_like(x, self.params[0] if k == 0 else 0.0)
        else:
            result = sum(c * np.asarray(f.derivative(k, x)) for c, f in self.terms)

        if np.ndim(result) == 0:
            return float(result)
        return result

    def is_defined_on(self, a: float, b: float, k: int = 0) -> bool:
        """Whether the k-th derivative is finite on the whole closed interval [a, b]."""
        if self.kind is FunctionKind.POWER:
            m = self.params[0]
            if m == math.floor(m):
                return m - k >= 0 or k > m >= 0 or not (a <= 0.0 <= b)
            # Non-integer powers live on x > 0; x = 0 is admitted while the exponent stays >= 0.
            if a < 0.0:
                return False
            return a > 0.0 or m - k >= 0
        if self.kind is FunctionKind.COMBINATION:
            return all(f.is_defined_on(a, b, k) for _, f in self.terms)
        return True

    def __str__(self):
        if self.kind is FunctionKind.COMBINATION:
            return "+".join(f"{c:g}*({f})" for c, f in self.terms)
        return f"{self.kind.value}:" + ",".join(f"{p:g}" for p in self.params)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples values[i] = f(a + i*h) on a uniform grid of [a, b]."""

    a: float
    b: float
    values: np.ndarray

    def __post_init__(self):
        a, b = float(self.a), float(self.b)
        if not (math.isfinite(a) and math.isfinite(b)) or b <= a:
            raise ValidationError(f"grid needs finite a < b, got [{a:g}, {b:g}]")
        values = np.array(self.values, dtype=float)
        if values.ndim != 1 or values.size < 2:
            raise ValidationError("grid needs a one-dimensional array of at least 2 samples")
        if not np.all(np.isfinite(values)):
            raise DomainError("grid samples must all be finite")
        values.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "values", values)

    @property
    def n_points(self) -> int:
        return int(self.values.size)

    @property
    def h(self) -> float:
        return (self.b - self.a) / (self.n_points - 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.a, self.b, self.n_points)

    def same_grid(self, other: "GridFunction") -> bool:
        return self.a == other.a and self.b == other.b and self.n_points == other.n_points

    def check_same_grid(self, other: "GridFunction") -> None:
        if not self.same_grid(other):
            raise GridMismatchError(
                f"grids differ: [{self.a:g}, {self.b:g}]/{self.n_points} "
                f"vs [{other.a:g}, {other.b:g}]/{other.n_points}"
            )

    def contains(self, x: float) -> bool:
        slack = _EDGE_TOL * (self.b - self.a)
        return self.a - slack <= x <= self.b + slack

    def scaled(self, c: float) -> "GridFunction":
        return GridFunction(self.a, self.b, c * self.values)

    def added(self, other: "GridFunction", sign: float = 1.0) -> "GridFunction":
        self.check_same_grid(other)
        return GridFunction(self.a, self.b, self.values + sign * other.values)

    def reflected(self) -> "GridFunction":
        """Samples of t -> f(a + b - t) on the same grid."""
        return GridFunction(self.a, self.b, self.values[::-1])


def sample(f: AnalyticFunction, a: float, b: float, n_points: int, k: int = 0) -> GridFunction:
    """Sample f (or its exact k-th derivative) at the n_points uniform nodes of [a, b]."""
    if n_points < 2:
        raise ValidationError(f"n_points must be at least 2, got {n_points}")
    if not b > a:
        raise ValidationError(f"grid needs a < b, got [{a:g}, {b:g}]")
    if not f.is_defined_on(a, b, k):
        what = "f" if k == 0 else f"derivative {k} of f"
        raise DomainError(f"{what} = {f} is undefined somewhere on [{a:g}, {b:g}]")
    nodes = np.linspace(a, b, n_points)
    values = np.asarray(f.derivative(k, nodes), dtype=float)
    if not np.all(np.isfinite(values)):
        raise DomainError(f"{f} produced non-finite samples on [{a:g}, {b:g}]")
    return GridFunction(a, b, values)


def interpolate(g: GridFunction, x: float) -> float:
    """Piecewise-linear reconstruction of g at x; exact at nodes and for affine data."""
    if not g.contains(x):
        raise OutOfDomainError(f"evaluation point {x:g} outside domain [{g.a:g}, {g.b:g}]")
    x = min(max(float(x), g.a), g.b)
    return float(np.interp(x, g.nodes, g.values))


def parse_function(spec: str) -> AnalyticFunction:
    """Parse the ``kind:params`` mini-language (const:c, pow:m, poly:c0,c1,..., exp:l, sin:w)."""
    kind, sep, raw = spec.partition(":")
    if not sep or not raw:
        raise ValidationError(f"function spec must look like kind:params, got {spec!r}")
    try:
        params = [float(p) for p in raw.split(",")]
    except ValueError:
        raise ValidationError(f"function parameters must be numbers, got {raw!r}")
    if not all(math.isfinite(p) for p in params):
        raise ValidationError(f"function parameters must be finite, got {raw!r}")

    if kind == "poly":
        return AnalyticFunction.polynomial(params)
    constructors = {
        "const": AnalyticFunction.constant,
        "pow": AnalyticFunction.power,
        "exp": AnalyticFunction.exponential,
        "sin": AnalyticFunction.sinusoid,
    }
    if kind not in constructors:
        raise ValidationError(f"unknown function kind {kind!r}; expected const, pow, poly, exp or sin")
    if len(params) != 1:
        raise ValidationError(f"{kind} takes exactly one parameter, got {len(params)}")
    return constructors[kind](params[0])


def write_grid_csv(g: GridFunction, path_or_buf: Union[str, IO[str]]) -> None:
    frame = pd.DataFrame({"x": g.nodes, "value": g.values})
    frame.to_csv(path_or_buf, index=False, float_format="%.17g")


def read_grid_csv(path_or_buf: Union[str, IO[str]]) -> GridFunction:
    """Load the ``x,value`` CSV form back into a GridFunction, checking uniform spacing."""
    try:
        frame = pd.read_csv(path_or_buf, float_precision="round_trip")
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise ValidationError(f"cannot read grid CSV: {exc}")
    if list(frame.columns) != ["x", "value"]:
        raise ValidationError(f"grid CSV header must be x,value, got {','.join(map(str, frame.columns))}")
    if len(frame) < 2:
        raise ValidationError("grid CSV needs at least 2 rows")
    x = frame["x"].to_numpy(dtype=float)
    steps = np.diff(x)
    h = (x[-1] - x[0]) / (len(x) - 1)
    if h <= 0 or not np.allclose(steps, h, rtol=1e-9, atol=0.0):
        raise ValidationError("grid CSV abscissae must be uniformly spaced and increasing")
    logger.info(f"Loaded grid function with {len(x)} nodes on [{x[0]:g}, {x[-1]:g}]")
    return GridFunction(x[0], x[-1], frame["value"].to_numpy(dtype=float))
