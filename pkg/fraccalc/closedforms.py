"""Exact operator values used as oracles.

Power laws follow Lacroix's Gamma-ratio rule, exponentials go through the
Mittag-Leffler function, and Liouville's first definition covers the
exponential with terminal at minus infinity. Everything here is for the left
side with terminal 0 unless stated otherwise.
"""
import enum
import logging
import math
from dataclasses import dataclass

from fraccalc import specfun
from fraccalc.errors import DomainError, NoClosedFormError, ValidationError
from fraccalc.funcspace import AnalyticFunction, FunctionKind

logger = logging.getLogger(__name__)

OPERATORS = ("integral", "rl", "caputo")


class ClosedFormKind(enum.Enum):
    POWER_LAW = "power-law"
    ZERO = "zero"
    SCALED_POWER = "scaled-power"


@dataclass(frozen=True)
class ClosedFormResult:
    """coefficient * (x - terminal) ** exponent."""

    kind: ClosedFormKind
    coefficient: float
    exponent: float
    terminal: float = 0.0

    @classmethod
    def of(cls, coefficient: float, exponent: float, terminal: float = 0.0) -> "ClosedFormResult":
        if coefficient == 0.0:
            kind = ClosedFormKind.ZERO
        elif coefficient == 1.0:
            kind = ClosedFormKind.POWER_LAW
        else:
            kind = ClosedFormKind.SCALED_POWER
        return cls(kind, float(coefficient), float(exponent), float(terminal))

    def evaluate(self, x: float) -> float:
        if self.kind is ClosedFormKind.ZERO:
            return 0.0
        return self.coefficient * (x - self.terminal) ** self.exponent


def _check_power(m: float) -> None:
    if not m > -1.0:
        raise DomainError(f"power-law rules need m > -1, got {m:g}")


def rl_integral_power(m: float, alpha: float) -> ClosedFormResult:
    """I^alpha x^m = Gamma(m+1)/Gamma(m+alpha+1) x^(m+alpha)."""
    _check_power(m)
    return ClosedFormResult.of(specfun.gamma_ratio(m + 1.0, m + alpha + 1.0), m + alpha)


def rl_derivative_power(m: float, alpha: float) -> ClosedFormResult:
    """D^alpha x^m = Gamma(m+1)/Gamma(m-alpha+1) x^(m-alpha); zero where 1/Gamma vanishes."""
    _check_power(m)
    return ClosedFormResult.of(specfun.gamma_ratio(m + 1.0, m - alpha + 1.0), m - alpha)


def caputo_derivative_power(m: float, alpha: float) -> ClosedFormResult:
    _check_power(m)
    if alpha == math.floor(alpha):
        return rl_derivative_power(m, alpha)
    n = int(math.floor(alpha)) + 1
    if m == math.floor(m) and m < n:
        return ClosedFormResult.of(0.0, m - alpha)
    if m <= n - 1:
        raise DomainError(f"Caputo derivative of x^{m:g} of order {alpha:g} has a non-integrable integrand")
    return rl_derivative_power(m, alpha)


def liouville_exponential(lam: float, alpha: float, x: float) -> float:
    """D^alpha e^(lam x) = lam^alpha e^(lam x) with the terminal at minus infinity, lam > 0."""
    if not lam > 0.0:
        raise DomainError(f"Liouville's exponential rule needs lam > 0, got {lam:g}")
    return lam**alpha * math.exp(lam * x)


def _power_rule(operator: str, m: float, alpha: float) -> ClosedFormResult:
    if operator == "integral":
        return rl_integral_power(m, alpha)
    if operator == "rl":
        return rl_derivative_power(m, alpha)
    return caputo_derivative_power(m, alpha)


def _exponential(operator: str, lam: float, alpha: float, x: float) -> float:
    z = lam * x
    if operator == "integral":
        return x**alpha * specfun.mittag_leffler(1.0, 1.0 + alpha, z)
    if alpha == math.floor(alpha):
        return lam**alpha * math.exp(z)
    if operator == "rl":
        return x ** (-alpha) * specfun.mittag_leffler(1.0, 1.0 - alpha, z)
    n = int(math.floor(alpha)) + 1
    return lam**n * x ** (n - alpha) * specfun.mittag_leffler(1.0, n - alpha + 1.0, z)


def exact_value(f: AnalyticFunction, operator: str, alpha: float, x: float, terminal: float = 0.0) -> float:
    """Exact left-sided ``operator`` (integral, rl or caputo) of order alpha applied to f, at x."""
    if operator not in OPERATORS:
        raise ValidationError(f"operator must be one of {', '.join(OPERATORS)}, got {operator!r}")
    if not x > terminal:
        raise DomainError(f"closed forms need x > terminal {terminal:g}, got {x:g}")

    if f.kind is FunctionKind.CONSTANT:
        c = f.params[0]
        if operator == "caputo":
            return 0.0
        order = alpha if operator == "integral" else -alpha
        return c * (x - terminal) ** order * specfun.rgamma(order + 1.0)
    if f.kind is FunctionKind.COMBINATION:
        return math.fsum(c * exact_value(term, operator, alpha, x, terminal) for c, term in f.terms)
    if f.kind is FunctionKind.SINUSOID:
        raise NoClosedFormError(f"no closed form for {f}")
    if terminal != 0.0:
        raise NoClosedFormError(f"closed forms for {f} need terminal 0, got {terminal:g}")

    if f.kind is FunctionKind.POWER:
        return _power_rule(operator, f.params[0], alpha).evaluate(x)
    if f.kind is FunctionKind.POLYNOMIAL:
        return math.fsum(
            c * _power_rule(operator, float(k), alpha).evaluate(x) for k, c in enumerate(f.params) if c != 0.0
        )
    return _exponential(operator, f.params[0], alpha, x)
