import io
import math

import numpy as np
import pytest

from fraccalc import falva
from fraccalc.errors import (
    NonFiniteStateError,
    PathDomainError,
    SingularCoefficientError,
    StepSizeError,
    ValidationError,
)
from fraccalc.falva import FalvaProblem, FrictionConvention, Trajectory

AMPLITUDES = (1e-2, 1e-3, 1e-4)


def oscillator(alpha, t=2.0, **kwargs):
    return FalvaProblem(falva.oscillator_model(1.0), alpha, 0.0, t, 1.0, 0.0, **kwargs)


def test_problem_defaults():
    assert oscillator(0.5, t=10.0).epsilon == pytest.approx(0.01)
    assert oscillator(1.0).epsilon == 0.0
    assert oscillator(1.0, epsilon=1e-3).end == pytest.approx(2.0 - 1e-3)
    np.testing.assert_array_equal(oscillator(0.5).q0, [1.0])


@pytest.mark.parametrize("alpha", [0.0, 1.5, -0.2])
def test_alpha_must_lie_in_unit_interval(alpha):
    with pytest.raises(ValidationError, match=r"alpha must lie in \(0,1\]"):
        oscillator(alpha)


@pytest.mark.parametrize("kwargs", [{"epsilon": 0.5}, {"epsilon": 0.0}, {"steps": 0}])
def test_problem_rejects(kwargs):
    with pytest.raises(ValidationError):
        oscillator(0.5, **kwargs)


def test_model_validation():
    with pytest.raises(ValidationError):
        falva.LagrangianModel("bad", [[1.0, 2.0], [2.0, 1.0]], lambda q: 0.0, lambda q: np.zeros(2))
    with pytest.raises(ValidationError):
        falva.LagrangianModel("bad", [[1.0]], lambda q: float(q @ q), lambda q: np.asarray(q))
    assert falva.double_well_model(2.0, dim=3).dim == 3


def test_parse_model():
    assert falva.parse_model("oscillator:2").name == "oscillator:2"
    assert falva.parse_model("freeparticle", dim=2).dim == 2
    assert falva.parse_model("well:3").potential(np.array([0.0])) == pytest.approx(0.75)
    for spec in ("spring:1", "well:x", "freeparticle:1"):
        with pytest.raises(ValidationError):
            falva.parse_model(spec)


def test_action_of_uniform_motion():
    problem = FalvaProblem(falva.free_particle_model(), 1.0, 0.0, 1.0, 0.0, 1.0)
    taus = np.linspace(0.0, 1.0, 101)
    path = Trajectory(taus, taus, np.ones_like(taus))
    assert falva.falva_action(problem, path) == pytest.approx(0.5, rel=1e-12)


def test_action_integrates_the_weight_exactly():
    constant = falva.LagrangianModel("constant", [[1.0]], lambda q: -1.0, lambda q: np.zeros(1))
    problem = FalvaProblem(constant, 0.5, 0.0, 1.0, 0.0, 0.0, epsilon=1e-6)
    taus = np.linspace(0.0, problem.end, 1001)
    path = Trajectory(taus, np.zeros_like(taus), np.zeros_like(taus))
    expected = 2.0 * (1.0 - math.sqrt(1e-6)) / math.sqrt(math.pi)
    assert falva.falva_action(problem, path) == pytest.approx(expected, rel=1e-12)


def test_action_of_rest_at_the_minimum_is_zero():
    problem = oscillator(0.7)
    taus = problem.taus
    assert falva.falva_action(problem, Trajectory(taus, np.zeros_like(taus), np.zeros_like(taus))) == 0.0


def test_action_needs_the_whole_domain():
    problem = oscillator(0.7)
    taus = np.linspace(0.0, 1.0, 11)
    with pytest.raises(PathDomainError):
        falva.falva_action(problem, Trajectory(taus, taus, taus))


def test_residual_vanishes_on_classical_solutions():
    problem = FalvaProblem(falva.free_particle_model(), 1.0, 0.0, 1.0, 0.5, 2.0)
    taus = problem.taus
    path = Trajectory(taus, 0.5 + 2.0 * taus, np.full_like(taus, 2.0))
    np.testing.assert_allclose(falva.el_residual(problem, path, 0.37), [0.0], atol=1e-12)

    rest = oscillator(0.6)
    taus = rest.taus
    still = Trajectory(taus, np.zeros_like(taus), np.zeros_like(taus))
    np.testing.assert_array_equal(falva.el_residual(rest, still, 1.0), [0.0])


def test_residual_of_power_path():
    problem = FalvaProblem(falva.free_particle_model(), 0.5, 0.0, 2.0, 0.0, 0.0, steps=4000)
    taus = problem.taus
    path = Trajectory(taus, (2.0 - taus) ** 1.5, -1.5 * (2.0 - taus) ** 0.5)
    assert falva.el_residual(problem, path, 1.0)[0] == pytest.approx(-1.5, abs=1e-5)
    # with the friction sign obtained from varying the action the same path is a solution
    variational = FalvaProblem(
        falva.free_particle_model(), 0.5, 0.0, 2.0, 0.0, 0.0, steps=4000, convention=FrictionConvention.VARIATIONAL
    )
    assert falva.el_residual(variational, path, 1.0)[0] == pytest.approx(0.0, abs=1e-5)


def test_residual_refuses_the_standoff():
    problem = oscillator(0.5)
    path = falva.simulate(problem)
    with pytest.raises(SingularCoefficientError):
        falva.el_residual(problem, path, problem.end)
    with pytest.raises(SingularCoefficientError):
        falva.el_residual(problem, path, problem.t - 0.5 * problem.epsilon)
    with pytest.raises(PathDomainError):
        falva.el_residual(problem, path, 0.0)


def test_classical_oscillator_period():
    problem = oscillator(1.0, t=2.0 * math.pi, steps=4096)
    path = falva.simulate(problem)
    assert path.qs[-1, 0] == pytest.approx(1.0, abs=1e-6)
    reference = falva.classical_reference(problem)
    assert np.max(np.abs(path.qs - reference.qs)) <= 1e-6
    assert np.max(np.abs(path.vs - reference.vs)) <= 1e-6


def test_free_particle_moves_in_a_straight_line():
    problem = FalvaProblem(falva.free_particle_model(dim=2), 1.0, 0.0, 3.0, [1.0, -1.0], [0.5, 2.0], steps=64)
    path = falva.simulate(problem)
    expected = np.array([1.0, -1.0]) + np.outer(path.taus, [0.5, 2.0])
    np.testing.assert_allclose(path.qs, expected, atol=1e-12)


def test_fractional_residual_self_consistency():
    residuals = []
    for steps in (2048, 4096, 8192):
        problem = oscillator(0.9, t=10.0, epsilon=1e-3, steps=steps)
        residuals.append(falva.max_interior_residual(problem, falva.simulate(problem)))
    assert residuals[-1] <= 1e-3
    assert np.all(np.log2(np.array(residuals[:-1]) / np.array(residuals[1:])) >= 1.0)


def test_continuity_in_alpha():
    base = oscillator(1.0, epsilon=2e-3, steps=1024)
    classical = falva.simulate(base)
    distances = [np.max(np.abs(falva.simulate(base.with_alpha(a)).qs - classical.qs)) for a in (0.99, 0.999)]
    assert distances[0] > distances[1] > 0.0


def test_simulate_rejects_coarse_steps():
    with pytest.raises(ValidationError):
        falva.simulate(oscillator(1.0, steps=8))
    with pytest.raises(StepSizeError):
        falva.simulate(oscillator(0.5, t=1.0, epsilon=1e-4, steps=16))


def test_simulate_aborts_on_blow_up():
    problem = FalvaProblem(falva.double_well_model(1.0), 1.0, 0.0, 1.0, 1e150, 0.0, steps=16)
    with np.errstate(all="ignore"), pytest.raises(NonFiniteStateError):
        falva.simulate(problem)


def test_reference_aborts_on_blow_up():
    problem = FalvaProblem(falva.double_well_model(1.0), 1.0, 0.0, 1.0, 1e150, 0.0, steps=16)
    with np.errstate(all="ignore"), pytest.raises(NonFiniteStateError):
        falva.classical_reference(problem)


def test_rayleigh_equivalence():
    problem = oscillator(0.5, steps=2048)
    path = falva.simulate(problem)
    taus = np.random.default_rng(7).uniform(0.0, problem.end, 100)
    taus = taus[(taus > path.taus[0]) & (taus < path.taus[-1])]
    assert max(falva.rayleigh_residual_equivalence(problem, path, tau) for tau in taus) <= 1e-12


def test_rayleigh_dissipation():
    problem = oscillator(0.5)
    assert falva.rayleigh_dissipation(problem, [2.0], 1.0) == pytest.approx(0.5 * 0.5 / 1.0 * 4.0)
    assert falva.rayleigh_dissipation(oscillator(1.0), [2.0], 1.0) == 0.0


@pytest.mark.parametrize("alpha", [1.0, 0.8])
def test_stationarity(alpha):
    problem = oscillator(alpha, steps=1024, convention=FrictionConvention.VARIATIONAL)
    path = falva.simulate(problem)
    differences = falva.stationarity_check(problem, path, falva.sine_bump(problem, path.taus), AMPLITUDES)
    assert falva.loglog_slope(AMPLITUDES, differences) >= 1.8


def test_as_written_paths_are_not_stationary():
    problem = oscillator(0.8, steps=1024)
    path = falva.simulate(problem)
    differences = falva.stationarity_check(problem, path, falva.sine_bump(problem, path.taus), AMPLITUDES)
    assert falva.loglog_slope(AMPLITUDES, differences) < 1.5


def test_stationarity_of_zero_bump():
    problem = oscillator(0.8, steps=256)
    path = falva.simulate(problem)
    zero = falva.sine_bump(problem, path.taus, amplitude=0.0)
    np.testing.assert_array_equal(falva.stationarity_check(problem, path, zero, AMPLITUDES), 0.0)


def test_stationarity_needs_vanishing_bump():
    problem = oscillator(1.0, steps=256)
    path = falva.simulate(problem)
    taus = path.taus
    with pytest.raises(ValidationError):
        falva.stationarity_check(problem, path, Trajectory(taus, np.ones_like(taus), np.zeros_like(taus)), AMPLITUDES)


def test_loglog_slope():
    s = np.array(AMPLITUDES)
    assert falva.loglog_slope(s, 3.0 * s**2) == pytest.approx(2.0)
    with pytest.raises(ValidationError):
        falva.loglog_slope(s, np.zeros(3))


def test_trajectory_validation():
    with pytest.raises(ValidationError):
        Trajectory([0.0, 0.5, 0.4], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0])
    with pytest.raises(ValidationError):
        Trajectory([0.0, 0.5, 1.0], [0.0, 0.0], [0.0, 0.0])


def test_trajectory_csv():
    problem = FalvaProblem(falva.oscillator_model(1.0, dim=2), 1.0, 0.0, 1.0, [1.0, 0.0], [0.0, 1.0], steps=16)
    buf = io.StringIO()
    falva.write_trajectory_csv(falva.simulate(problem), buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "tau,q_1,q_2,v_1,v_2"
    assert len(lines) == 18
    assert lines[1] == "0,1,0,0,1"
