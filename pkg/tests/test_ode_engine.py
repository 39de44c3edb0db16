import math

import numpy as np
import pytest

from backend.errors import ConfigurationError, IntegrationError, StepBudgetError
from backend.ode_engine import SolverConfig, SolverStats, integrate, pid_controller, tsit5_step


def decay(t, y):
    return -y


# ============================================================================
# PAS ÉLÉMENTAIRE
# ============================================================================

def test_zero_field_leaves_state_unchanged():
    y0 = np.array([1.0, -2.0, 3.5])
    y5, y_err = tsit5_step(lambda t, y: np.zeros_like(y), 0.0, y0, 0.1)
    np.testing.assert_array_equal(y5, y0)
    np.testing.assert_array_equal(y_err, np.zeros(3))


def test_single_step_matches_exponential():
    y5, _ = tsit5_step(decay, 0.0, 1.0, 0.1)
    assert abs(y5[0] - math.exp(-0.1)) <= 1e-8


def test_local_error_is_sixth_order():
    dts = np.array([0.1, 0.05, 0.025])
    errors = [abs(tsit5_step(decay, 0.0, 1.0, dt)[0][0] - math.exp(-dt)) for dt in dts]
    slope = np.polyfit(np.log(dts), np.log(errors), 1)[0]
    assert slope == pytest.approx(6.0, abs=0.3)


def test_embedded_error_estimate_is_small_and_nonzero():
    _, y_err = tsit5_step(decay, 0.0, 1.0, 0.1)
    assert 0.0 < abs(y_err[0]) < 1e-5


def test_non_positive_step_rejected():
    with pytest.raises(ConfigurationError):
        tsit5_step(decay, 0.0, 1.0, 0.0)


def test_non_finite_derivative_reports_time_and_component():
    def bad(t, y):
        out = -y.copy()
        out[1] = np.nan
        return out

    with pytest.raises(IntegrationError) as info:
        tsit5_step(bad, 0.25, np.ones(3), 0.1)
    assert info.value.index == 1
    assert info.value.t == pytest.approx(0.25)


# ============================================================================
# CONTRÔLEUR
# ============================================================================

def test_neutral_error_keeps_step_up_to_safety():
    cfg = SolverConfig()
    assert pid_controller(1.0, (1.0, 1.0), 1e-3, cfg) == pytest.approx(cfg.safety * 1e-3)


def test_huge_error_clamps_to_minimum_step():
    cfg = SolverConfig(dt_min=1e-6, dt_init=1e-5)
    assert pid_controller(1e6, (1.0, 1.0), 1.5e-6, cfg) == cfg.dt_min


def test_rejected_step_always_shrinks():
    cfg = SolverConfig()
    for err in (1.01, 2.0, 50.0):
        assert pid_controller(err, (0.01, 0.01), 1e-3, cfg) < 1e-3


def test_step_never_exceeds_maximum():
    cfg = SolverConfig(dt_max=0.01)
    assert pid_controller(1e-9, (1e-9, 1e-9), 0.009, cfg) == cfg.dt_max


def test_mostly_accepted_steps_on_decay():
    stats = SolverStats()
    integrate(decay, 0.0, 10.0, [1.0], cfg=SolverConfig(), stats=stats)
    assert stats.accepted / stats.steps >= 0.8


# ============================================================================
# INTÉGRATION
# ============================================================================

def test_zero_field_over_interval():
    y0 = np.array([0.3, 0.7])
    np.testing.assert_array_equal(integrate(lambda t, y: np.zeros_like(y), 0.0, 1.0, y0), y0)


def test_breakpoint_is_hit_exactly():
    times = []
    integrate(decay, 0.0, 1.0, [1.0], breakpoints=[0.5, 2.0, -1.0],
              observer=lambda outcome: times.append(outcome.t_new))
    assert 0.5 in times
    assert times[-1] == 1.0


def test_steps_never_straddle_breakpoints():
    stops = [0.1, 0.37, 0.5, 0.81]
    times = [0.0]
    integrate(decay, 0.0, 1.0, [1.0], breakpoints=stops,
              cfg=SolverConfig(dt_init=0.05, dt_max=0.3),
              observer=lambda outcome: times.append(outcome.t_new))
    for b in stops:
        assert b in times
    for a, b in zip(times[:-1], times[1:]):
        assert not any(a < s < b for s in stops)


def test_stiff_diagonal_system_within_tolerance():
    lam = np.array([-1.0 / 0.01, -1.0 / 10.0])
    cfg = SolverConfig(max_steps=1_000_000)
    y = integrate(lambda t, y: lam * y, 0.0, 1.0, [1.0, 1.0], cfg=cfg)
    exact = np.exp(lam)
    bound = 10.0 * (cfg.atol + cfg.rtol * np.abs(exact))
    assert np.all(np.abs(y - exact) <= bound)


def test_global_error_is_fifth_order_in_fixed_step_mode():
    dts = np.array([0.1, 0.05, 0.025, 0.0125])
    errors = []
    for dt in dts:
        cfg = SolverConfig(dt_init=dt, dt_min=dt / 10, dt_max=dt, fixed_step=True)
        errors.append(abs(integrate(decay, 0.0, 1.0, [1.0], cfg=cfg)[0] - math.exp(-1.0)))
    errors = np.array(errors)
    # à dt = 0.0125 l'erreur (~3e-14) touche l'arrondi : hors de la pente
    above_floor = errors > 1e-13
    assert above_floor.sum() >= 3
    assert errors[-1] < 1e-12
    slope = np.polyfit(np.log(dts[above_floor]), np.log(errors[above_floor]), 1)[0]
    assert slope == pytest.approx(5.0, abs=0.3)


def test_integration_is_deterministic():
    rhs = lambda t, y: np.array([y[1], -y[0] + 0.1 * math.sin(3 * t)])
    a = integrate(rhs, 0.0, 5.0, [1.0, 0.0], breakpoints=[1.0, 2.5])
    b = integrate(rhs, 0.0, 5.0, [1.0, 0.0], breakpoints=[1.0, 2.5])
    np.testing.assert_array_equal(a, b)


def test_fsal_matches_recomputed_first_stage():
    rhs = lambda t, y: np.array([y[1], -4.0 * y[0]])
    runs = {}
    for fsal in (True, False):
        states = []
        integrate(rhs, 0.0, 2.0, [1.0, 0.0], cfg=SolverConfig(fsal=fsal),
                  observer=lambda outcome: states.append(outcome.state_new))
        runs[fsal] = np.array(states)
    assert runs[True].shape == runs[False].shape
    np.testing.assert_allclose(runs[True], runs[False], rtol=0, atol=1e-12)


def test_fsal_saves_derivative_evaluations():
    counts = {}
    for fsal in (True, False):
        stats = SolverStats()
        integrate(decay, 0.0, 1.0, [1.0], cfg=SolverConfig(fsal=fsal), stats=stats)
        counts[fsal] = stats.rhs_evals
    assert counts[True] < counts[False]


def test_observer_can_replace_state():
    y = integrate(lambda t, y: np.ones_like(y), 0.0, 1.0, [0.0],
                  breakpoints=[0.5], observer=lambda outcome: np.zeros(1))
    assert y[0] == 0.0


def test_step_budget_reports_progress():
    with pytest.raises(StepBudgetError) as info:
        integrate(decay, 0.0, 100.0, [1.0], cfg=SolverConfig(max_steps=3))
    assert 0.0 <= info.value.progress < 1.0
    assert info.value.max_steps == 3


def test_non_finite_state_raises_integration_error():
    with pytest.raises(IntegrationError):
        integrate(lambda t, y: np.full_like(y, np.inf), 0.0, 1.0, [1.0])


def test_reversed_interval_rejected():
    with pytest.raises(ConfigurationError):
        integrate(decay, 1.0, 1.0, [1.0])


def test_input_state_not_modified():
    y0 = np.array([1.0, 2.0])
    integrate(decay, 0.0, 1.0, y0)
    np.testing.assert_array_equal(y0, [1.0, 2.0])


def test_inconsistent_step_bounds_rejected():
    with pytest.raises(ValueError):
        SolverConfig(dt_init=1.0, dt_max=0.1)
    with pytest.raises(ValueError):
        SolverConfig(safety=1.0)
