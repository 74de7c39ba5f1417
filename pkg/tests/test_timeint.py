"""Unit tests for the low-storage Runge-Kutta integrator."""

import numpy as np
import pytest

from freestream.timeint import (
    LowStorageRK,
    SolverDivergenceError,
    carpenter_kennedy_rk4,
    integrate,
)


def observed_order(errors, steps):
    """Least-squares slope of log(error) against log(dt)."""
    dts = 1.0 / np.asarray(steps, dtype=float)
    return np.polyfit(np.log(dts), np.log(errors), 1)[0]


def test_scheme_shape_and_consistency():
    scheme = carpenter_kennedy_rk4()
    assert scheme.num_stages == 5
    assert scheme.order == 4
    assert scheme.a[0] == 0.0
    assert scheme.c[0] == 0.0
    # b-weights of a consistent scheme telescope to a unit full step
    assert np.isfinite(scheme.b).all()
    u = np.array([1.0])
    scheme.step(lambda y, t: np.ones_like(y), u, 0.0, 0.25)
    assert u[0] == pytest.approx(1.25, rel=1e-15)


def test_step_is_exact_for_constant_rhs():
    """u' = const has no truncation error for any consistent scheme."""
    scheme = carpenter_kennedy_rk4()
    u = np.array([2.0, -1.0])
    rate = np.array([3.0, 0.5])
    scheme.step(lambda y, t: rate, u, 0.0, 0.1)
    assert np.allclose(u, [2.3, -0.95], atol=1e-14)


def test_time_argument_reaches_rhs_at_stage_offsets():
    seen = []
    scheme = carpenter_kennedy_rk4()
    scheme.step(lambda y, t: (seen.append(t), np.zeros_like(y))[1], np.zeros(1), 1.0, 0.5)
    assert seen == [1.0 + c * 0.5 for c in scheme.c]


def test_linear_decay_order_four():
    errors, steps = [], [20, 40, 80, 160]
    for n in steps:
        u, taken = integrate(lambda y, t: -y, np.array([1.0]), 2.0, 2.0 / n)
        # rounding in the time accumulator may cost one tiny extra step
        assert taken in (n, n + 1)
        errors.append(abs(u[0] - np.exp(-2.0)))
    slope = observed_order(errors, steps)
    assert abs(slope - 4.0) <= 0.1, slope


def test_nonlinear_ode_order_four():
    """u' = -u^2, u(0) = 1 has the closed form 1 / (1 + t)."""
    errors, steps = [], [20, 40, 80, 160]
    for n in steps:
        u, _ = integrate(lambda y, t: -y * y, np.array([1.0]), 1.5, 1.5 / n)
        errors.append(abs(u[0] - 1.0 / 2.5))
    slope = observed_order(errors, steps)
    assert abs(slope - 4.0) <= 0.1, slope


def test_nonautonomous_rhs_sees_stage_times():
    """u' = cos(t) integrates to sin(t); wrong c-coefficients would break order."""
    errors, steps = [], [10, 20, 40]
    for n in steps:
        u, _ = integrate(lambda y, t: np.array([np.cos(t)]), np.zeros(1), 1.0, 1.0 / n)
        errors.append(abs(u[0] - np.sin(1.0)))
    slope = observed_order(errors, steps)
    assert abs(slope - 4.0) <= 0.15, slope


def test_zero_end_time_returns_copy():
    u0 = np.array([3.0, 4.0])
    u, steps = integrate(lambda y, t: -y, u0, 0.0, 0.1)
    assert steps == 0
    assert np.array_equal(u, u0)
    u += 1.0
    assert np.array_equal(u0, [3.0, 4.0])  # the input array is untouched


def test_final_step_truncates_to_end_time():
    """u' = 1 makes the reached time readable off the solution."""
    u, steps = integrate(lambda y, t: np.ones_like(y), np.zeros(1), 1.0, 0.3)
    assert steps == 4
    assert u[0] == pytest.approx(1.0, abs=1e-14)


def test_callable_dt_is_consulted_every_step():
    calls = []

    def dt(u, t):
        calls.append(t)
        return 0.25

    u, steps = integrate(lambda y, t: np.ones_like(y), np.zeros(1), 1.0, dt)
    assert steps == 4
    assert len(calls) == 4
    assert u[0] == pytest.approx(1.0, abs=1e-14)


def test_negative_end_time_rejected():
    with pytest.raises(ValueError):
        integrate(lambda y, t: -y, np.ones(1), -1.0, 0.1)


def test_bad_time_step_raises():
    with pytest.raises(SolverDivergenceError):
        integrate(lambda y, t: -y, np.ones(1), 1.0, 0.0)
    with pytest.raises(SolverDivergenceError):
        integrate(lambda y, t: -y, np.ones(1), 1.0, np.nan)


def test_step_budget_raises_with_location():
    with pytest.raises(SolverDivergenceError) as excinfo:
        integrate(lambda y, t: -y, np.ones(1), 1.0, 1e-6, max_steps=10)
    assert excinfo.value.step == 10
    assert excinfo.value.time == pytest.approx(1e-5, rel=1e-9)


def test_divergence_detected_and_reported():
    """Unstable dt on a stiff linear problem must surface, not return junk."""
    with pytest.raises(SolverDivergenceError) as excinfo:
        integrate(lambda y, t: 1e8 * y, np.ones(1), 1.0, 0.1)
    assert excinfo.value.step is not None
    assert excinfo.value.time is not None


def test_custom_scheme_is_honoured():
    euler = LowStorageRK(a=(0.0,), b=(1.0,), c=(0.0,), order=1)
    u, steps = integrate(lambda y, t: -y, np.array([1.0]), 1.0, 0.5, scheme=euler)
    assert steps == 2
    assert u[0] == pytest.approx(0.25, abs=1e-15)  # (1 - 0.5)^2


def test_scheme_coefficients_are_frozen():
    scheme = carpenter_kennedy_rk4()
    with pytest.raises(AttributeError):
        scheme.b = (1.0,)
