"""Named property suites behind ``verify``.

Each suite is a step that measures one deviation and compares it with a
bound; the run passes only when every step does. Bounds are calibrated for
the default verification grid of 257 points.
"""
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable, Dict, IO, List, Optional, Sequence

import numpy as np
from scipy.integrate import quad

from fraccalc import falva, specfun
from fraccalc.config import VerifyParameters
from fraccalc.errors import ValidationError
from fraccalc.fracops import (
    OperatorKind,
    OperatorRequest,
    Side,
    caputo_derivative,
    caputo_rl_relation_residual,
    check_integer_recovery,
    check_integration_by_parts,
    check_linearity,
    check_nonlocality,
    check_reflection,
    check_semigroup,
    check_zero_order_limit,
    closed_form_rl_derivative_power,
    gl_derivative,
    product_trapezoid_weights,
    rl_derivative,
)
from fraccalc.funcspace import AnalyticFunction, FractionalOrder, sample

logger = logging.getLogger(__name__)

_RELATIONS = {
    "<=": lambda d, b: d <= b,
    "<": lambda d, b: d < b,
    ">=": lambda d, b: d >= b,
}


@dataclass(frozen=True)
class PropertyResult:
    name: str
    deviation: float
    bound: float
    passed: bool
    relation: str = "<="

    @classmethod
    def compare(cls, name: str, deviation: float, bound: float, relation: str = "<=") -> "PropertyResult":
        deviation = float(deviation)
        passed = math.isfinite(deviation) and bool(_RELATIONS[relation](deviation, bound))
        return cls(name, deviation, float(bound), passed, relation)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{self.name:<22} {status}  deviation={self.deviation:.3e}  bound {self.relation} {self.bound:.3e}"


Suite = Callable[[VerifyParameters], PropertyResult]
SUITES: Dict[str, Suite] = {}


def suite(name: str) -> Callable[[Suite], Suite]:
    def register(fn: Suite) -> Suite:
        SUITES[name] = fn
        return fn

    return register


# 1. Special functions


@suite("gamma-recurrence")
def gamma_recurrence(params: VerifyParameters) -> PropertyResult:
    xs = np.random.default_rng(params.seed).uniform(0.1, 20.0, 200)
    worst = max(abs(specfun.gamma(x + 1.0) - x * specfun.gamma(x)) / specfun.gamma(x + 1.0) for x in xs)
    return PropertyResult.compare("gamma-recurrence", worst, 1e-12)


@suite("beta-identity")
def beta_identity(params: VerifyParameters) -> PropertyResult:
    pairs = np.random.default_rng(params.seed).uniform(0.6, 5.0, (100, 2))
    worst = 0.0
    for p, q in pairs:
        value = specfun.beta(p, q)
        oracle, _ = quad(lambda s: 1.0, 0.0, 1.0, weight="alg", wvar=(p - 1.0, q - 1.0), epsabs=0.0, epsrel=1e-13)
        worst = max(worst, abs(value - oracle) / oracle)
    return PropertyResult.compare("beta-identity", worst, 1e-8)


# 2. Operators against closed forms


@suite("lacroix")
def lacroix(params: VerifyParameters) -> PropertyResult:
    f = sample(AnalyticFunction.power(1.0), 0.0, 4.0, params.grid)
    req = OperatorRequest.on_grid(OperatorKind.RL_DERIVATIVE, Side.LEFT, 0.5, 0.0, 4.0)
    return PropertyResult.compare("lacroix", abs(rl_derivative(f, req, math.pi) - 2.0), 1e-3)


@suite("power-law")
def power_law(params: VerifyParameters) -> PropertyResult:
    worst = 0.0
    for m in (1.0, 2.0, 3.0):
        f = sample(AnalyticFunction.power(m), 0.0, 1.0, params.grid)
        for alpha in (0.25, 0.5, 0.75):
            req = OperatorRequest.on_grid(OperatorKind.RL_DERIVATIVE, Side.LEFT, alpha, 0.0, 1.0)
            exact = closed_form_rl_derivative_power(m, FractionalOrder(alpha)).evaluate(0.7)
            worst = max(worst, abs(rl_derivative(f, req, 0.7) - exact))
    return PropertyResult.compare("power-law", worst, 1e-2)


@suite("grunwald-letnikov")
def grunwald_letnikov(params: VerifyParameters) -> PropertyResult:
    worst = 0.0
    for m in (1.0, 2.0, 3.0):
        f = sample(AnalyticFunction.power(m), 0.0, 0.7, params.grid)
        for alpha in (0.25, 0.5, 0.75):
            exact = closed_form_rl_derivative_power(m, FractionalOrder(alpha)).evaluate(0.7)
            worst = max(worst, abs(gl_derivative(f, FractionalOrder(alpha), 0.7) - exact))
    return PropertyResult.compare("grunwald-letnikov", worst, 5e-2)


@suite("rl-constant")
def rl_constant(params: VerifyParameters) -> PropertyResult:
    f = sample(AnalyticFunction.constant(5.0), 0.0, 1.0, params.grid)
    req = OperatorRequest.on_grid(OperatorKind.RL_DERIVATIVE, Side.LEFT, 0.5, 0.0, 1.0)
    return PropertyResult.compare("rl-constant", abs(rl_derivative(f, req, 1.0) - 5.0 / math.sqrt(math.pi)), 1e-2)


@suite("caputo-constant")
def caputo_constant(params: VerifyParameters) -> PropertyResult:
    f = AnalyticFunction.constant(5.0)
    worst = 0.0
    for alpha in (0.3, 0.5, 1.7):
        req = OperatorRequest.on_grid(OperatorKind.CAPUTO, Side.LEFT, alpha, 0.0, 1.0)
        for x in (0.25, 0.5, 1.0):
            worst = max(worst, abs(caputo_derivative(f, req, (0.0, 1.0, params.grid), x)))
    return PropertyResult.compare("caputo-constant", worst, 0.0)


@suite("caputo-rl-relation")
def caputo_rl_relation(params: VerifyParameters) -> PropertyResult:
    f = AnalyticFunction.polynomial([1.0, 1.0])
    residual = caputo_rl_relation_residual(f, FractionalOrder(0.5), 1.0, (0.0, 1.0, params.grid))
    return PropertyResult.compare("caputo-rl-relation", abs(residual), 1e-2)


# 3. Structural identities


@suite("semigroup")
def semigroup(params: VerifyParameters) -> PropertyResult:
    f = sample(AnalyticFunction.power(2.0), 0.0, 1.0, params.grid)
    deviation = check_semigroup(f, FractionalOrder(0.3), FractionalOrder(0.4), 1.0)
    return PropertyResult.compare("semigroup", deviation, 5e-5)


@suite("integration-by-parts")
def integration_by_parts(params: VerifyParameters) -> PropertyResult:
    f = sample(AnalyticFunction.power(1.0), 0.0, 1.0, params.grid)
    g = sample(AnalyticFunction.polynomial([1.0, -1.0]), 0.0, 1.0, params.grid)
    return PropertyResult.compare("integration-by-parts", check_integration_by_parts(f, g, FractionalOrder(0.5)), 1e-3)


@suite("linearity")
def linearity(params: VerifyParameters) -> PropertyResult:
    points = (0.25, 0.5, 0.75)
    f, g = AnalyticFunction.power(2.0), AnalyticFunction.sinusoid(3.0)
    sampled_f, sampled_g = sample(f, 0.0, 1.0, params.grid), sample(g, 0.0, 1.0, params.grid)
    worst = 0.0
    for kind in (OperatorKind.RL_INTEGRAL, OperatorKind.RL_DERIVATIVE):
        for side in (Side.LEFT, Side.RIGHT):
            req = OperatorRequest.on_grid(kind, side, 0.6, 0.0, 1.0)
            worst = max(worst, check_linearity(req, sampled_f, sampled_g, 2.5, points))
    caputo = OperatorRequest.on_grid(OperatorKind.CAPUTO, Side.LEFT, 0.6, 0.0, 1.0)
    worst = max(worst, check_linearity(caputo, f, g, 2.5, points, grid=(0.0, 1.0, params.grid)))
    return PropertyResult.compare("linearity", worst, 1e-10)


@suite("reflection")
def reflection(params: VerifyParameters) -> PropertyResult:
    f = sample(AnalyticFunction.exponential(1.5), 0.0, 1.0, params.grid)
    worst = max(check_reflection(f, FractionalOrder(0.4), x) for x in (0.1, 0.3, 0.5))
    return PropertyResult.compare("reflection", worst, 1e-12)


@suite("integer-recovery")
def integer_recovery(params: VerifyParameters) -> PropertyResult:
    f = AnalyticFunction.power(3.0)
    worst = max(
        check_integer_recovery(f, n, 0.5, (0.0, 1.0, params.grid), side)
        for n in (1, 2)
        for side in (Side.LEFT, Side.RIGHT)
    )
    return PropertyResult.compare("integer-recovery", worst, 1e-3)


@suite("zero-order-limit")
def zero_order_limit(params: VerifyParameters) -> PropertyResult:
    f = sample(AnalyticFunction.power(1.0), 0.0, 1.0, params.grid)
    deviations = check_zero_order_limit(f, 1.0, (0.4, 0.2, 0.1, 0.05, 0.025))
    # largest step-to-step change; strictly negative when the deviations decrease
    return PropertyResult.compare("zero-order-limit", np.max(np.diff(deviations)), 0.0, "<")


@suite("nonlocality")
def nonlocality(params: VerifyParameters) -> PropertyResult:
    f = sample(AnalyticFunction.power(1.0), 0.0, 1.0, params.grid)
    return PropertyResult.compare("nonlocality", check_nonlocality(f, FractionalOrder(0.5), 0.8), 1e-4, ">=")


# 4. FALVA


@suite("action-weights")
def action_weights(params: VerifyParameters) -> PropertyResult:
    rng = np.random.default_rng(params.seed)
    lowest = math.inf
    for alpha in np.linspace(0.05, 1.0, 20):
        u = np.append(np.unique(rng.uniform(0.0, 2.0, params.grid))[::-1], 0.0)
        lowest = min(lowest, float(np.min(product_trapezoid_weights(u, alpha))))
    return PropertyResult.compare("action-weights", lowest, 0.0, ">=")


def _oscillator_problem(alpha: float, **kwargs) -> falva.FalvaProblem:
    return falva.FalvaProblem(falva.oscillator_model(1.0), alpha, q0=1.0, v0=0.0, **kwargs)


@suite("falva-classical-limit")
def falva_classical_limit(params: VerifyParameters) -> PropertyResult:
    problem = _oscillator_problem(1.0, a=0.0, t=2.0 * math.pi, steps=4096)
    path, reference = falva.simulate(problem), falva.classical_reference(problem)
    deviation = max(float(np.max(np.abs(path.qs - reference.qs))), abs(path.qs[-1, 0] - 1.0))
    return PropertyResult.compare("falva-classical-limit", deviation, 1e-6)


@suite("falva-continuity")
def falva_continuity(params: VerifyParameters) -> PropertyResult:
    base = _oscillator_problem(1.0, a=0.0, t=2.0, epsilon=2e-3, steps=1024)
    classical = falva.simulate(base)
    distances = [
        float(np.max(np.abs(falva.simulate(base.with_alpha(alpha)).qs - classical.qs))) for alpha in (0.99, 0.999)
    ]
    return PropertyResult.compare("falva-continuity", distances[1] - distances[0], 0.0, "<")


@suite("falva-residual")
def falva_residual(params: VerifyParameters) -> PropertyResult:
    problem = _oscillator_problem(0.9, a=0.0, t=10.0, epsilon=1e-3, steps=8192)
    return PropertyResult.compare("falva-residual", falva.max_interior_residual(problem, falva.simulate(problem)), 1e-3)


@suite("rayleigh")
def rayleigh(params: VerifyParameters) -> PropertyResult:
    rng = np.random.default_rng(params.seed)
    worst = 0.0
    for _ in range(5):
        alpha = rng.uniform(0.1, 1.0)
        q0, v0 = rng.uniform(-2.0, 2.0, 2)
        problem = falva.FalvaProblem(falva.oscillator_model(1.0), alpha, 0.0, 2.0, q0, v0, steps=2048)
        path = falva.simulate(problem)
        taus = rng.uniform(problem.a, problem.end, 20)
        inside = taus[(taus > path.taus[0]) & (taus < path.taus[-1])]
        worst = max([worst] + [falva.rayleigh_residual_equivalence(problem, path, tau) for tau in inside])
    return PropertyResult.compare("rayleigh", worst, 1e-12)


@suite("stationarity")
def stationarity(params: VerifyParameters) -> PropertyResult:
    amplitudes = (1e-2, 1e-3, 1e-4)
    slopes = []
    for alpha in (1.0, 0.8):
        problem = _oscillator_problem(
            alpha, a=0.0, t=2.0, steps=1024, convention=falva.FrictionConvention.VARIATIONAL
        )
        path = falva.simulate(problem)
        differences = falva.stationarity_check(problem, path, falva.sine_bump(problem, path.taus), amplitudes)
        slopes.append(falva.loglog_slope(amplitudes, differences))
    return PropertyResult.compare("stationarity", min(slopes), 1.8, ">=")


def run_suites(params: VerifyParameters, only: Optional[Sequence[str]] = None) -> List[PropertyResult]:
    """Run the selected suites (all by default) in registry order."""
    names = list(SUITES) if not only else list(only)
    unknown = [name for name in names if name not in SUITES]
    if unknown:
        raise ValidationError(f"unknown property {', '.join(unknown)}; expected one of {', '.join(SUITES)}")
    logger.info(f"Running {len(names)} property suites on a {params.grid}-point grid")
    with ThreadPoolExecutor(max_workers=params.workers) as executor:
        return list(executor.map(lambda name: SUITES[name](params), names))


def write_report(results: Sequence[PropertyResult], params: VerifyParameters, fp: IO[str]) -> None:
    report_dict = {
        "parameters": asdict(params),
        "properties": {r.name: asdict(r) for r in results},
        "passed": all(r.passed for r in results),
    }
    json.dump(report_dict, fp, indent=2)
