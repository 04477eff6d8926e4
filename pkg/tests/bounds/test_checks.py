import math

import numpy as np
import pytest

from flockdelay.bounds import checks
from flockdelay.bounds.checks import CheckResult
from flockdelay.models.influence import PowerLawInfluence


def _two_agent_series(series_factory, times, gap):
    """Two agents on a line with velocities +gap/2 and -gap/2."""
    gap = np.asarray(gap, dtype=float)
    velocities = np.stack([gap / 2, -gap / 2], axis=1)[..., None]
    positions = np.zeros_like(velocities)
    return series_factory(times, positions, velocities)


def test_from_margins():
    result = CheckResult.from_margins("demo", np.array([1.0, -0.5, 2.0, -1.0]), np.array([0.0, 1.0, 2.0, 3.0]))
    assert not result.passed
    assert result.worst_margin == -1.0
    assert result.at == 3.0
    assert result.first_violation == 1.0
    empty = CheckResult.from_margins("demo", np.empty(0), np.empty(0))
    assert empty.passed and empty.worst_margin == math.inf


def test_unavailable_result_fails():
    result = CheckResult.unavailable("decay_envelope", "no persistence declaration")
    assert not result.passed
    assert not result.available
    assert result.to_dict()["detail"] == "no persistence declaration"


def test_increasing_sequence_fails_monotonicity_first():
    diameters = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
    results = checks.check_sequence_properties(diameters, np.zeros(5), diameters, 1.0, 1.0)
    monotone = next(r for r in results if r.name == "diameter_monotone")
    assert not monotone.passed
    assert monotone.first_violation == 1.0


def test_vanishing_sequence_passes_every_property():
    diameters = np.zeros(6)
    results = checks.check_sequence_properties(diameters, np.full(6, 0.1), diameters, 1.0, 1.0)
    assert [r.name for r in results] == ["diameter_monotone", "one_step_contraction", "three_step_contraction"]
    assert all(r.passed for r in results)
    assert checks.check_two_step_estimate(diameters, np.full(6, 0.2), diameters).passed


def test_exponential_sequence_contracts():
    diameters = np.exp(-2.0 * np.arange(8))
    contraction = np.full(8, math.exp(-2.0))
    results = checks.check_sequence_properties(diameters, contraction, diameters, 1.0, 1.0)
    assert all(r.passed for r in results)
    assert checks.check_two_step_estimate(diameters, np.full(8, math.exp(-1.0)), diameters).passed


def test_velocity_bound(series_factory):
    times = np.linspace(0.0, 2.0, 21)
    series = _two_agent_series(series_factory, times, np.exp(-times))
    assert checks.check_velocity_bound(series, 0.5).passed
    failing = checks.check_velocity_bound(series, 0.4)
    assert not failing.passed
    assert failing.first_violation == 0.0


def test_window_bound(series_factory):
    times = np.linspace(0.0, 3.0, 31)
    series = _two_agent_series(series_factory, times, np.exp(-times))
    assert checks.check_window_bound(series, np.exp(-np.arange(4.0)), 1.0, 0.0).passed
    assert not checks.check_window_bound(series, np.array([1.0, 0.1, 0.01, 0.001]), 1.0, 0.0).passed


def test_decay_envelope_with_equal_velocities(series_factory):
    times = np.linspace(0.0, 5.0, 51)
    series = _two_agent_series(series_factory, times, np.zeros(51))
    assert checks.check_decay_envelope(series, 0.0, 0.1, 1.0).passed


def test_decay_envelope_violation_is_located(series_factory):
    times = np.linspace(0.0, 10.0, 101)
    series = _two_agent_series(series_factory, times, np.ones(101))
    result = checks.check_decay_envelope(series, 1.0, 0.5, 1.0)
    assert not result.passed
    assert result.first_violation == pytest.approx(3.1)
    assert result.at == pytest.approx(10.0)
    assert result.worst_margin == pytest.approx(math.exp(-3.5) * (1 + 1e-6) - 1.0)


def test_decay_envelope_holds_for_the_exact_solution(series_factory):
    times = np.linspace(0.0, 10.0, 1001)
    series = _two_agent_series(series_factory, times, np.exp(-2 * times))
    assert checks.check_decay_envelope(series, 1.0, 0.0233557, 1.0).passed
    assert not checks.check_decay_envelope(series, 1.0, 0.0233557, 1.0, scale=1e-3).passed


def test_half_space_invariance(series_factory):
    times = np.linspace(0.0, 3.0, 31)
    shrinking = _two_agent_series(series_factory, times, np.exp(-times))
    assert checks.check_half_space_invariance(shrinking, 0.5, 0.5, count=1).passed
    growing = _two_agent_series(series_factory, times, 1 + times)
    result = checks.check_half_space_invariance(growing, 0.5, 2.0, count=1)
    assert not result.passed


def test_diameter_growth(series_factory):
    times = np.linspace(0.0, 1.0, 11)
    velocities = np.broadcast_to(np.array([[0.5], [-0.5]]), (11, 2, 1))
    positions = times[:, None, None] * velocities
    series = series_factory(times, positions, velocities)
    assert checks.check_diameter_growth(series, 1.0, 1.0).passed
    jumping = series_factory(times, positions * 3, velocities)
    assert not checks.check_diameter_growth(jumping, 1.0, 1.0).passed


def test_lyapunov_monotone():
    from flockdelay.bounds.lyapunov import LyapunovSeries

    times = np.linspace(0.0, 4.0, 41)
    decreasing = LyapunovSeries(times, np.zeros(41), 2.0 - 0.1 * times, np.zeros(41))
    assert checks.check_lyapunov_monotone(decreasing, 1.0).passed
    bumped = 2.0 - 0.1 * times
    bumped[30] += 0.5
    result = checks.check_lyapunov_monotone(LyapunovSeries(times, np.zeros(41), bumped, np.zeros(41)), 1.0)
    assert not result.passed
    assert result.first_violation == pytest.approx(3.0)
    short = LyapunovSeries(times[:5], np.zeros(5), np.zeros(5), np.zeros(5))
    assert checks.check_lyapunov_monotone(short, 1.0).passed


def _planar_series(series_factory, times, second_velocity):
    """Agent 0 holds velocity (1, 0) while agent 1 follows ``second_velocity(t)``; both stay at fixed spots."""
    velocities = np.stack([np.broadcast_to([1.0, 0.0], (len(times), 2)), second_velocity(times)], axis=1)
    positions = np.broadcast_to(np.array([[0.0, 0.0], [1.0, 0.0]]), velocities.shape)
    return series_factory(times, positions, velocities)


def test_half_space_invariance_in_the_plane(series_factory):
    times = np.linspace(0.0, 3.0, 31)
    converging = _planar_series(series_factory, times, lambda t: np.stack([t / 3, 1 - t / 3], axis=1))
    assert checks.check_half_space_invariance(converging, 0.5, 1.0).passed
    escaping = _planar_series(series_factory, times, lambda t: np.where((t >= 1.5)[:, None], [2.0, 2.0], [0.0, 1.0]))
    result = checks.check_half_space_invariance(escaping, 0.5, 3.0)
    assert not result.passed
    assert result.first_violation == 0.0
    # along the axes the escape overshoots the window range by exactly one
    result = checks.check_half_space_invariance(escaping, 0.5, 3.0, count=2)
    assert result.worst_margin == pytest.approx(-1.0, rel=1e-6)


def test_delayed_distance(series_factory):
    times = np.linspace(0.0, 1.0, 11)
    series = _two_agent_series(series_factory, times, np.zeros(11))
    series.positions[:, 1, 0] = 1.0
    series.d_x[:] = 1.0
    # tau_bar C_0 + M_0 + d_X = 0.4 * 0.5 + 1 + 1
    largest = np.full(11, 2.2)
    assert checks.check_delayed_distance(series, largest, 0.5, 1.0, 0.4).passed
    largest[6] = 2.5
    result = checks.check_delayed_distance(series, largest, 0.5, 1.0, 0.4)
    assert not result.passed
    assert result.first_violation == pytest.approx(0.6)
    assert result.worst_margin == pytest.approx(-0.3, rel=1e-6)


def test_rate_floor(series_factory):
    psi = PowerLawInfluence(1.0, 1.0)
    times = np.linspace(0.0, 1.0, 11)
    series = _two_agent_series(series_factory, times, np.zeros(11))
    series.d_x[:] = 1.0
    smallest = np.full(11, float(psi(2.0)))
    assert checks.check_rate_floor(series, smallest, psi, 0.5, 1.0, 0.4).passed
    smallest[3] = float(psi(2.5))
    result = checks.check_rate_floor(series, smallest, psi, 0.5, 1.0, 0.4)
    assert not result.passed
    assert result.first_violation == pytest.approx(0.3)
