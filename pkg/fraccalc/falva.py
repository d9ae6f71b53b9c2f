"""Fractional action-like variational approach (FALVA).

A classical Lagrangian L = 1/2 v^T M v - V(q) is integrated against the
Riemann-Liouville weight (t - tau)^(alpha-1) / Gamma(alpha) over observer time
tau in [a, t - epsilon]. Its Euler-Lagrange equation gains the time-dependent
friction term (alpha - 1)/(t - tau) * M q'. The coefficient blows up at
tau = t, hence the standoff epsilon.
"""
import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, IO, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import linalg
from scipy.integrate import solve_ivp

from fraccalc import specfun
from fraccalc.errors import (
    NonFiniteStateError,
    PathDomainError,
    SingularCoefficientError,
    StepSizeError,
    ValidationError,
)
from fraccalc.fracops import product_trapezoid_weights

logger = logging.getLogger(__name__)

# Fixed seed of the potential-gradient self-check.
GRADIENT_CHECK_SEED = 1729
MIN_STEPS = 16
DEFAULT_MARGIN = 0.05

Vector = Union[float, Sequence[float], np.ndarray]


class FrictionConvention(enum.Enum):
    """Sign of the friction term in the fractional Euler-Lagrange equation.

    AS_WRITTEN uses dL/dq - d/dtau dL/dq' - (alpha-1)/(t-tau) dL/dq' = 0.
    VARIATIONAL flips the last sign, which is what varying the weighted action
    actually yields; its solutions are the stationary paths of falva_action.
    The two coincide at alpha = 1.
    """

    AS_WRITTEN = "as-written"
    VARIATIONAL = "variational"


@dataclass(frozen=True, eq=False)
class LagrangianModel:
    """L(q, v) = 1/2 v^T M v - V(q), with no explicit time dependence."""

    name: str
    mass: np.ndarray
    potential: Callable[[np.ndarray], float]
    potential_gradient: Callable[[np.ndarray], np.ndarray]
    dim: int = field(init=False)
    _factor: Tuple[np.ndarray, bool] = field(init=False, repr=False)

    def __post_init__(self):
        mass = np.atleast_2d(np.asarray(self.mass, dtype=float))
        if mass.ndim != 2 or mass.shape[0] != mass.shape[1]:
            raise ValidationError(f"mass matrix must be square, got shape {mass.shape}")
        if not np.all(np.isfinite(mass)) or not np.allclose(mass, mass.T, rtol=1e-12, atol=0.0):
            raise ValidationError("mass matrix must be finite and symmetric")
        mass = 0.5 * (mass + mass.T)
        try:
            factor = linalg.cho_factor(mass)
        except linalg.LinAlgError:
            raise ValidationError("mass matrix must be positive definite")
        mass.setflags(write=False)
        object.__setattr__(self, "mass", mass)
        object.__setattr__(self, "dim", mass.shape[0])
        object.__setattr__(self, "_factor", factor)
        self._check_gradient()

    def _check_gradient(self, step: float = 1e-5, tol: float = 1e-6) -> None:
        q = np.random.default_rng(GRADIENT_CHECK_SEED).uniform(-1.0, 1.0, self.dim)
        grad = np.asarray(self.potential_gradient(q), dtype=float)
        if grad.shape != (self.dim,):
            raise ValidationError(f"potential gradient must have shape ({self.dim},), got {grad.shape}")
        numeric = np.empty(self.dim)
        for i in range(self.dim):
            e = np.zeros(self.dim)
            e[i] = step
            numeric[i] = (self.potential(q + e) - self.potential(q - e)) / (2.0 * step)
        if np.max(np.abs(numeric - grad)) > tol * max(1.0, float(np.max(np.abs(grad)))):
            raise ValidationError(f"potential gradient of model {self.name!r} disagrees with its potential")

    def kinetic(self, v: np.ndarray) -> float:
        return 0.5 * float(v @ self.mass @ v)

    def lagrangian(self, q: np.ndarray, v: np.ndarray) -> float:
        return self.kinetic(v) - float(self.potential(q))

    def momentum(self, v: np.ndarray) -> np.ndarray:
        """dL/dq' = M v."""
        return self.mass @ v

    def force(self, q: np.ndarray) -> np.ndarray:
        """dL/dq = -grad V."""
        return -np.asarray(self.potential_gradient(q), dtype=float)

    def solve_mass(self, rhs: np.ndarray) -> np.ndarray:
        return linalg.cho_solve(self._factor, rhs)


def oscillator_model(omega: float = 1.0, dim: int = 1) -> LagrangianModel:
    if not omega > 0.0:
        raise ValidationError(f"oscillator frequency must be positive, got {omega:g}")
    w2 = omega * omega
    return LagrangianModel(
        f"oscillator:{omega:g}",
        np.eye(dim),
        lambda q: 0.5 * w2 * float(q @ q),
        lambda q: w2 * np.asarray(q, dtype=float),
    )


def free_particle_model(dim: int = 1) -> LagrangianModel:
    return LagrangianModel("freeparticle", np.eye(dim), lambda q: 0.0, lambda q: np.zeros(dim))


def double_well_model(k: float = 1.0, dim: int = 1) -> LagrangianModel:
    """V(q) = k/4 sum (q_i^2 - 1)^2."""
    if not k > 0.0:
        raise ValidationError(f"double-well stiffness must be positive, got {k:g}")
    return LagrangianModel(
        f"well:{k:g}",
        np.eye(dim),
        lambda q: 0.25 * k * float(np.sum((np.asarray(q) ** 2 - 1.0) ** 2)),
        lambda q: k * np.asarray(q, dtype=float) * (np.asarray(q, dtype=float) ** 2 - 1.0),
    )


def parse_model(spec: str, dim: int = 1) -> LagrangianModel:
    """Parse ``oscillator:omega``, ``freeparticle`` or ``well:k``."""
    kind, _, raw = spec.partition(":")
    if kind == "freeparticle" and not raw:
        return free_particle_model(dim)
    if kind not in ("oscillator", "well"):
        raise ValidationError(f"unknown model {spec!r}; expected oscillator:omega, freeparticle or well:k")
    try:
        param = float(raw) if raw else 1.0
    except ValueError:
        raise ValidationError(f"model parameter must be a number, got {raw!r}")
    if not math.isfinite(param):
        raise ValidationError(f"model parameter must be finite, got {raw!r}")
    return oscillator_model(param, dim) if kind == "oscillator" else double_well_model(param, dim)


def _as_state(x: Vector, dim: int, name: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.size == 1 and dim > 1:
        arr = np.full(dim, float(arr[0]))
    if arr.shape != (dim,) or not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} must be a finite vector of length {dim}")
    return arr


@dataclass(frozen=True, eq=False)
class FalvaProblem:
    """An initial-value FALVA problem on [a, t - epsilon].

    ``epsilon`` defaults to 1e-3 (t - a) for alpha < 1 and to 0 at alpha = 1,
    where the friction coefficient vanishes identically.
    """

    model: LagrangianModel
    alpha: float
    a: float
    t: float
    q0: Vector
    v0: Vector
    epsilon: Optional[float] = None
    steps: int = 1024
    convention: FrictionConvention = FrictionConvention.AS_WRITTEN

    def __post_init__(self):
        alpha, a, t = float(self.alpha), float(self.a), float(self.t)
        if not 0.0 < alpha <= 1.0:
            raise ValidationError(f"alpha must lie in (0,1], got {alpha:g}")
        if not (math.isfinite(a) and math.isfinite(t)) or t <= a:
            raise ValidationError(f"horizon needs finite a < t, got [{a:g}, {t:g}]")
        epsilon = self.epsilon
        if epsilon is None:
            epsilon = 0.0 if alpha == 1.0 else 1e-3 * (t - a)
        epsilon = float(epsilon)
        if not 0.0 <= epsilon < (t - a) / 10.0:
            raise ValidationError(f"epsilon must lie in [0, (t-a)/10), got {epsilon:g}")
        if alpha < 1.0 and epsilon == 0.0:
            raise ValidationError("epsilon must be positive when alpha < 1")
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValidationError(f"steps must be a positive integer, got {self.steps}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "epsilon", epsilon)
        object.__setattr__(self, "steps", int(self.steps))
        object.__setattr__(self, "q0", _as_state(self.q0, self.model.dim, "q0"))
        object.__setattr__(self, "v0", _as_state(self.v0, self.model.dim, "v0"))

    @property
    def end(self) -> float:
        return self.t - self.epsilon

    @property
    def step(self) -> float:
        return (self.end - self.a) / self.steps

    @property
    def taus(self) -> np.ndarray:
        taus = self.a + self.step * np.arange(self.steps + 1)
        taus[-1] = self.end
        return taus

    def friction(self, tau: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        """Coefficient c(tau) of the residual term -c M q'; identically zero at alpha = 1."""
        if self.alpha == 1.0:
            return np.zeros_like(tau) if isinstance(tau, np.ndarray) else 0.0
        c = (self.alpha - 1.0) / (self.t - tau)
        return c if self.convention is FrictionConvention.AS_WRITTEN else -c

    def with_alpha(self, alpha: float) -> "FalvaProblem":
        return FalvaProblem(
            self.model, alpha, self.a, self.t, self.q0, self.v0, self.epsilon, self.steps, self.convention
        )


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Samples q(tau) and q'(tau) on strictly increasing observer times."""

    taus: np.ndarray
    qs: np.ndarray
    vs: np.ndarray

    def __post_init__(self):
        taus = np.asarray(self.taus, dtype=float)
        qs = np.asarray(self.qs, dtype=float)
        vs = np.asarray(self.vs, dtype=float)
        qs = qs.reshape(-1, 1) if qs.ndim == 1 else qs
        vs = vs.reshape(-1, 1) if vs.ndim == 1 else vs
        if taus.ndim != 1 or taus.size < 3:
            raise ValidationError("trajectory needs at least 3 observer times")
        if qs.shape[0] != taus.size or vs.shape != qs.shape:
            raise ValidationError("trajectory arrays must have equal lengths")
        if np.any(np.diff(taus) <= 0.0):
            raise ValidationError("trajectory times must be strictly increasing")
        object.__setattr__(self, "taus", taus)
        object.__setattr__(self, "qs", qs)
        object.__setattr__(self, "vs", vs)

    @property
    def dim(self) -> int:
        return int(self.qs.shape[1])

    def perturbed(self, bump: "Trajectory", s: float) -> "Trajectory":
        if bump.taus.shape != self.taus.shape or not np.array_equal(bump.taus, self.taus):
            raise PathDomainError("perturbation must share the trajectory's observer times")
        return Trajectory(self.taus, self.qs + s * bump.qs, self.vs + s * bump.vs)


def _check_spans(problem: FalvaProblem, path: Trajectory) -> None:
    slack = 1e-9 * (problem.t - problem.a)
    if abs(path.taus[0] - problem.a) > slack or abs(path.taus[-1] - problem.end) > slack:
        raise PathDomainError(
            f"path spans [{path.taus[0]:g}, {path.taus[-1]:g}], expected [{problem.a:g}, {problem.end:g}]"
        )
    if path.dim != problem.model.dim:
        raise PathDomainError(f"path dimension {path.dim} differs from model dimension {problem.model.dim}")


def lagrangian(problem: FalvaProblem, path: Trajectory) -> np.ndarray:
    """L(q(tau), q'(tau)) at every node of the path."""
    model = problem.model
    return np.array([model.lagrangian(q, v) for q, v in zip(path.qs, path.vs)])


def falva_action(problem: FalvaProblem, path: Trajectory) -> float:
    """(1/Gamma(alpha)) int_a^(t-eps) L (t - tau)^(alpha-1) dtau, kernel integrated exactly per panel."""
    _check_spans(problem, path)
    u = np.maximum(problem.t - path.taus, 0.0)
    weights = product_trapezoid_weights(u, problem.alpha)
    return float(np.dot(weights, lagrangian(problem, path))) * specfun.rgamma(problem.alpha)


def _accelerations(path: Trajectory) -> np.ndarray:
    return np.gradient(path.vs, path.taus, axis=0, edge_order=2)


def _state_at(path: Trajectory, tau: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    acc = _accelerations(path)
    interp = lambda arr: np.array([np.interp(tau, path.taus, arr[:, i]) for i in range(path.dim)])
    return interp(path.qs), interp(path.vs), interp(acc)


def _check_tau(problem: FalvaProblem, path: Trajectory, tau: float) -> None:
    # t - end can differ from epsilon by rounding; end is the standoff edge.
    slack = 1e-9 * (problem.t - problem.a)
    within_standoff = problem.epsilon > 0.0 and tau >= problem.end - slack
    if within_standoff or problem.t - tau <= problem.epsilon or tau >= problem.t:
        raise SingularCoefficientError(
            f"tau = {tau:g} lies within the standoff {problem.epsilon:g} of t = {problem.t:g}"
        )
    if not path.taus[0] < tau < path.taus[-1] or not problem.a < tau:
        raise PathDomainError(f"tau = {tau:g} is not interior to the path on [{path.taus[0]:g}, {path.taus[-1]:g}]")


def _residual(model: LagrangianModel, q: np.ndarray, v: np.ndarray, acc: np.ndarray, c: float) -> np.ndarray:
    friction = c * model.momentum(v)
    return model.force(q) - model.mass @ acc - friction


def el_residual(problem: FalvaProblem, path: Trajectory, tau: float) -> np.ndarray:
    """dL/dq - d/dtau dL/dq' - c(tau) dL/dq' at tau, with q'' from central differences of the velocities."""
    _check_tau(problem, path, tau)
    q, v, acc = _state_at(path, tau)
    return _residual(problem.model, q, v, acc, problem.friction(tau))


def el_residual_profile(
    problem: FalvaProblem, path: Trajectory, margin: float = DEFAULT_MARGIN
) -> Tuple[np.ndarray, np.ndarray]:
    """Residuals at the interior nodes: not the first or last, and at least margin (t - a) away from t."""
    if not 0.0 <= margin < 1.0:
        raise ValidationError(f"margin must lie in [0, 1), got {margin:g}")
    acc = _accelerations(path)
    taus = path.taus
    keep = np.zeros(taus.size, dtype=bool)
    keep[1:-1] = True
    keep &= (problem.t - taus) >= margin * (problem.t - problem.a)
    keep &= (problem.t - taus) > problem.epsilon
    keep &= taus > problem.a
    index = np.flatnonzero(keep)
    residuals = np.array(
        [_residual(problem.model, path.qs[i], path.vs[i], acc[i], problem.friction(taus[i])) for i in index]
    ).reshape(-1, path.dim)
    return taus[index], residuals


def max_interior_residual(problem: FalvaProblem, path: Trajectory, margin: float = DEFAULT_MARGIN) -> float:
    _, residuals = el_residual_profile(problem, path, margin)
    if residuals.size == 0:
        raise ValidationError("path has no interior nodes to check")
    return float(np.max(np.abs(residuals)))


def rayleigh_dissipation(problem: FalvaProblem, v: Vector, tau: float) -> float:
    """F(q', tau) = -1/2 c(tau) q'^T M q'."""
    v = _as_state(v, problem.model.dim, "velocity")
    return -0.5 * problem.friction(tau) * float(v @ problem.model.mass @ v)


def rayleigh_residual_equivalence(problem: FalvaProblem, path: Trajectory, tau: float) -> float:
    """Max-norm gap between el_residual and dL/dq - d/dtau dL/dq' + dF/dq'."""
    _check_tau(problem, path, tau)
    model = problem.model
    q, v, acc = _state_at(path, tau)
    # gradient of -1/2 c v^T M v
    dF_dv = -0.5 * problem.friction(tau) * ((model.mass + model.mass.T) @ v)
    rayleigh_form = model.force(q) - model.mass @ acc + dF_dv
    return float(np.max(np.abs(rayleigh_form - el_residual(problem, path, tau))))


def _rhs(problem: FalvaProblem) -> Callable[[float, np.ndarray], np.ndarray]:
    model, dim = problem.model, problem.model.dim

    def rhs(tau: float, y: np.ndarray) -> np.ndarray:
        q, v = y[:dim], y[dim:]
        force = model.force(q)
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(force))):
            raise NonFiniteStateError(f"state became non-finite at tau = {tau:g}")
        acc = model.solve_mass(force) - problem.friction(tau) * v
        return np.concatenate([v, acc])

    return rhs


def _rk4(y_n: np.ndarray, t_n: float, f: Callable[[float, np.ndarray], np.ndarray], h: float) -> np.ndarray:
    k_1 = h * f(t_n, y_n)
    k_2 = h * f(t_n + h / 2.0, y_n + k_1 / 2.0)
    k_3 = h * f(t_n + h / 2.0, y_n + k_2 / 2.0)
    k_4 = h * f(t_n + h, y_n + k_3)
    return y_n + 1 / 6.0 * (k_1 + 2 * k_2 + 2 * k_3 + k_4)


def simulate(problem: FalvaProblem) -> Trajectory:
    """Integrate M q'' = -grad V - c(tau) M q' from (q0, v0) at a to t - epsilon with fixed-step RK4."""
    if problem.steps < MIN_STEPS:
        raise ValidationError(f"steps must be at least {MIN_STEPS}, got {problem.steps}")
    h = problem.step
    if problem.alpha < 1.0 and h * (1.0 - problem.alpha) / problem.epsilon > 1.0:
        raise StepSizeError(
            f"step {h:g} too coarse for the friction rate {(1.0 - problem.alpha) / problem.epsilon:g} "
            f"near t; increase steps or epsilon"
        )
    logger.info(
        f"Simulating FALVA problem ({problem.model.name}, alpha={problem.alpha:g}) with {problem.steps} steps"
    )

    dim = problem.model.dim
    f = _rhs(problem)
    taus = problem.taus
    states = np.empty((taus.size, 2 * dim))
    states[0] = np.concatenate([problem.q0, problem.v0])
    for i in range(problem.steps):
        states[i + 1] = _rk4(states[i], taus[i], f, taus[i + 1] - taus[i])
        if not np.all(np.isfinite(states[i + 1])):
            raise NonFiniteStateError(f"state became non-finite at tau = {taus[i + 1]:g}")
    return Trajectory(taus, states[:, :dim], states[:, dim:])


def classical_reference(problem: FalvaProblem) -> Trajectory:
    """The same dynamics by scipy's adaptive DOP853 at rtol = atol = 1e-12, sampled on simulate's grid."""
    dim = problem.model.dim
    taus = problem.taus
    solution = solve_ivp(
        _rhs(problem),
        (problem.a, problem.end),
        np.concatenate([problem.q0, problem.v0]),
        method="DOP853",
        t_eval=taus,
        rtol=1e-12,
        atol=1e-12,
    )
    if not solution.success:
        raise NonFiniteStateError(f"reference integration failed: {solution.message}")
    return Trajectory(taus, solution.y[:dim].T, solution.y[dim:].T)


def sine_bump(problem: FalvaProblem, taus: np.ndarray, amplitude: float = 1.0) -> Trajectory:
    """eta(tau) = amplitude sin(pi (tau - a)/(end - a)) in every component, with its exact derivative."""
    length = problem.end - problem.a
    phase = np.pi * (np.asarray(taus, dtype=float) - problem.a) / length
    qs = amplitude * np.sin(phase)
    vs = amplitude * np.pi / length * np.cos(phase)
    ones = np.ones(problem.model.dim)
    return Trajectory(taus, np.outer(qs, ones), np.outer(vs, ones))


def stationarity_check(
    problem: FalvaProblem, path: Trajectory, bump: Trajectory, amplitudes: Sequence[float]
) -> np.ndarray:
    """|S[path + s bump] - S[path]| for every amplitude s."""
    scale = max(1.0, float(np.max(np.abs(bump.qs))))
    if np.max(np.abs(bump.qs[0])) > 1e-12 * scale or np.max(np.abs(bump.qs[-1])) > 1e-12 * scale:
        raise ValidationError("bump must vanish at both ends of the path")
    base = falva_action(problem, path)
    return np.array([abs(falva_action(problem, path.perturbed(bump, s)) - base) for s in amplitudes])


def loglog_slope(amplitudes: Sequence[float], differences: Sequence[float]) -> float:
    """Least-squares slope of log(differences) against log(amplitudes)."""
    s = np.asarray(amplitudes, dtype=float)
    d = np.asarray(differences, dtype=float)
    if s.size < 2 or np.any(s <= 0.0) or np.any(d <= 0.0):
        raise ValidationError("log-log slope needs at least 2 positive amplitudes and differences")
    slope, _ = np.polyfit(np.log(s), np.log(d), 1)
    return float(slope)


def trajectory_frame(path: Trajectory) -> pd.DataFrame:
    columns = {"tau": path.taus}
    for i in range(path.dim):
        columns[f"q_{i + 1}"] = path.qs[:, i]
    for i in range(path.dim):
        columns[f"v_{i + 1}"] = path.vs[:, i]
    return pd.DataFrame(columns)


def write_trajectory_csv(path: Trajectory, path_or_buf: Union[str, IO[str]]) -> None:
    trajectory_frame(path).to_csv(path_or_buf, index=False, float_format="%.17g")
