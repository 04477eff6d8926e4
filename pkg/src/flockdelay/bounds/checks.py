"""Certification checks run against a recorded trajectory.

Every check reports its worst margin, the bound minus the observed value, so a
negative margin is a violation.
"""

from __future__ import annotations

import dataclasses as dc
import math
from typing import TYPE_CHECKING, Any

import numpy as np

from flockdelay.bounds.series import TIME_TOLERANCE, window_reduce
from flockdelay.models.delays import PointwiseDelay
from flockdelay.utils import unit_vectors

if TYPE_CHECKING:
    from flockdelay._types import FloatArray
    from flockdelay.bounds.lyapunov import LyapunovSeries
    from flockdelay.bounds.series import TrajectorySeries
    from flockdelay.history import TrajectoryHistory
    from flockdelay.models.influence import InfluenceFunction
    from flockdelay.models.system import SystemConfig

#: checks that need a persistence declaration
THEORY_CHECKS = (
    "diameter_window_bound",
    "diameter_monotone",
    "one_step_contraction",
    "three_step_contraction",
    "two_step_estimate",
    "decay_envelope",
    "lyapunov_monotone",
)
ALL_CHECKS = (
    "velocity_bound",
    *THEORY_CHECKS,
    "delayed_distance",
    "rate_floor",
    "half_space_invariance",
    "diameter_growth",
)

SEQUENCE_TOLERANCE = 1e-8


@dc.dataclass(frozen=True)
class CheckResult:
    """The outcome of one check.

    ``at`` is the time (or the sequence index) of the worst margin and
    ``first_violation`` the earliest failing one.
    """

    name: str
    passed: bool
    worst_margin: float
    at: float | None = None
    first_violation: float | None = None
    detail: str = ""
    available: bool = True

    @classmethod
    def unavailable(cls, name: str, reason: str) -> CheckResult:
        return cls(name, False, math.nan, detail=reason, available=False)

    @classmethod
    def from_margins(cls, name: str, margins: FloatArray, where: FloatArray, detail: str = "") -> CheckResult:
        if len(margins) == 0:
            return cls(name, True, math.inf, detail=detail or "nothing to check")
        worst = int(np.argmin(margins))
        failing = np.flatnonzero(margins < 0)
        first = float(where[failing[0]]) if len(failing) else None
        return cls(name, not len(failing), float(margins[worst]), float(where[worst]), first, detail)

    def to_dict(self) -> dict[str, Any]:
        return dc.asdict(self)


def check_velocity_bound(series: TrajectorySeries, bound: float) -> CheckResult:
    """max_i |v_i(t)| <= C_0 for t >= 0."""
    start = series.start
    margins = bound + 1e-8 - series.speeds()[start:]
    return CheckResult.from_margins("velocity_bound", margins, series.times[start:], f"bound {bound:.6g}")


def check_window_bound(series: TrajectorySeries, diameters: FloatArray, window: float, tau_bar: float) -> CheckResult:
    """d_V(t) <= D_n whenever t >= nT - tau_bar."""
    start = series.start
    times = series.times[start:]
    reached = np.floor((times + tau_bar) / window + TIME_TOLERANCE).astype(int)
    smallest = np.minimum.accumulate(diameters)[np.clip(reached, 0, len(diameters) - 1)]
    margins = smallest + SEQUENCE_TOLERANCE * diameters[0] - series.d_v[start:]
    return CheckResult.from_margins("diameter_window_bound", margins, times)


def check_sequence_properties(
    diameters: FloatArray, contraction: FloatArray, d_v_at_ends: FloatArray, sup_norm: float, window: float
) -> list[CheckResult]:
    """Monotonicity, one step and three step contraction of the diameter sequence.

    Args:
        diameters: D_0, D_1, ...
        contraction: C_n for the same indices
        d_v_at_ends: d_V(nT) for the same indices
    """
    tol = SEQUENCE_TOLERANCE * float(diameters[0])
    following = np.arange(1, len(diameters), dtype=float)
    damping = math.exp(-sup_norm * window)
    monotone = diameters[:-1] + tol - diameters[1:]
    one_step = damping * d_v_at_ends[:-1] + (1 - damping) * diameters[:-1] + tol - diameters[1:]
    n = np.arange(2, len(diameters) - 1)
    three_step = (1 - contraction[n]) * diameters[n - 2] + tol - diameters[n + 1]
    return [
        CheckResult.from_margins("diameter_monotone", monotone, following),
        CheckResult.from_margins("one_step_contraction", one_step, following),
        CheckResult.from_margins("three_step_contraction", three_step, (n + 1).astype(float)),
    ]


def check_two_step_estimate(
    diameters: FloatArray, contraction_star: FloatArray, d_v_at_ends: FloatArray
) -> CheckResult:
    """d_V(nT) <= (1 - C*_n) D_{n-2} for n >= 2."""
    tol = SEQUENCE_TOLERANCE * float(diameters[0])
    n = np.arange(2, len(diameters))
    margins = (1 - contraction_star[n]) * diameters[n - 2] + tol - d_v_at_ends[n]
    return CheckResult.from_margins("two_step_estimate", margins, n.astype(float))


def check_decay_envelope(
    series: TrajectorySeries, d0: float, rate: float, window: float, scale: float = 1.0
) -> CheckResult:
    """d_V(t) <= scale D_0 e^{-mu (t - 3T)} for t >= 0."""
    start = series.start
    times = series.times[start:]
    envelope = scale * d0 * np.exp(-rate * (times - 3 * window)) * (1 + 1e-6)
    return CheckResult.from_margins(
        "decay_envelope", envelope - series.d_v[start:], times, f"mu {rate:.6g}, scale {scale:g}"
    )


def delayed_distances(
    cfg: SystemConfig, history: TrajectoryHistory, series: TrajectorySeries
) -> tuple[FloatArray, FloatArray]:
    """Largest delayed distance |x_i(t) - x_j(t - lag)| and smallest psi of it, per record time t >= 0.

    The distributed model uses every quadrature node as a lag.
    """
    start = series.start
    times = series.times[start:]
    positions = series.positions[start:]
    largest = np.empty(len(times))
    smallest_rate = np.empty(len(times))
    n_agents = cfg.n_agents
    off_diagonal = ~np.eye(n_agents, dtype=bool)
    for k, (t, x) in enumerate(zip(times, positions)):
        if isinstance(cfg.delay, PointwiseDelay):
            lags = np.atleast_1d(cfg.delay.lag(t))
        else:
            lags, _ = cfg.delay.quadrature(float(t))
        delayed, _ = history.sample_many(np.clip(t - lags, -cfg.tau_bar, history.t_now))
        gaps = np.linalg.norm(x[None, :, None, :] - delayed[:, None, :, :], axis=-1)[:, off_diagonal]
        largest[k] = gaps.max()
        smallest_rate[k] = cfg.influence(gaps).min()
    return largest, smallest_rate


def check_delayed_distance(
    series: TrajectorySeries, largest: FloatArray, velocity_bound: float, position_spread: float, tau_bar: float
) -> CheckResult:
    """|x_i(t) - x_j(t - lag)| <= tau_bar C_0 + M_0 + max_{s <= t} d_X(s)."""
    start = series.start
    running = np.maximum.accumulate(series.d_x)[start:]
    bound = tau_bar * velocity_bound + position_spread + running
    margins = bound * (1 + 1e-9) + 1e-12 - largest
    return CheckResult.from_margins("delayed_distance", margins, series.times[start:])


def check_rate_floor(
    series: TrajectorySeries,
    smallest_rate: FloatArray,
    psi: InfluenceFunction,
    velocity_bound: float,
    position_spread: float,
    tau_bar: float,
) -> CheckResult:
    """(N - 1) b_ij(t) >= phi(t), with phi(t) the minimum of psi up to the delayed distance bound."""
    start = series.start
    running = np.maximum.accumulate(series.d_x)[start:]
    reach = tau_bar * velocity_bound + position_spread + running
    floor = np.array([psi.min_on(r * (1 + 1e-9) + 1e-12) for r in reach])
    margins = smallest_rate - floor + 1e-10 * psi.sup_norm
    return CheckResult.from_margins("rate_floor", margins, series.times[start:])


def check_half_space_invariance(
    series: TrajectorySeries, tau_bar: float, velocity_bound: float, count: int = 8, seed: int = 0, samples: int = 500
) -> CheckResult:
    """Velocity projections never leave the range they span on a window [S - tau_bar, S].

    Checked along the coordinate axes and seeded random unit vectors, for up to
    ``samples`` window ends S >= 0.
    """
    dim = series.velocities.shape[-1]
    start = series.start
    ends = np.arange(start, len(series.times))
    if len(ends) > samples:
        ends = ends[np.linspace(0, len(ends) - 1, samples).astype(int)]
    lows = np.searchsorted(series.times, series.times[ends] - tau_bar - TIME_TOLERANCE, side="left")
    tol = 1e-8 * max(1.0, velocity_bound)
    margins = np.full(len(ends), math.inf)
    for vector in unit_vectors(dim, count, seed):
        projections = series.velocities @ vector
        upper, lower = projections.max(axis=1), projections.min(axis=1)
        later_upper = np.maximum.accumulate(upper[::-1])[::-1]
        later_lower = np.minimum.accumulate(lower[::-1])[::-1]
        window_upper = window_reduce(upper, lows, ends, np.maximum)
        window_lower = window_reduce(lower, lows, ends, np.minimum)
        margins = np.minimum(margins, window_upper + tol - later_upper[lows])
        margins = np.minimum(margins, later_lower[lows] + tol - window_lower)
    return CheckResult.from_margins("half_space_invariance", margins, series.times[ends], f"{count} directions")


def check_diameter_growth(series: TrajectorySeries, sup_norm: float, d0: float) -> CheckResult:
    """The running maximum of d_X grows no faster than the velocity diameter allows."""
    start = series.start
    times = series.times[start:]
    running = np.maximum.accumulate(series.d_x[start:])
    d_v = series.d_v[start:]
    dt = np.diff(times)
    allowed = dt * (np.maximum(d_v[:-1], d_v[1:]) + 2 * sup_norm * d0 * dt)
    margins = allowed * (1 + 1e-6) + 1e-12 * max(1.0, float(running[-1])) - np.diff(running)
    return CheckResult.from_margins("diameter_growth", margins, times[1:])


def check_lyapunov_monotone(lyapunov: LyapunovSeries, window: float) -> CheckResult:
    """W is nonincreasing on t >= 2T."""
    late = np.flatnonzero(lyapunov.times >= 2 * window - TIME_TOLERANCE)
    if len(late) < 2:
        return CheckResult("lyapunov_monotone", True, math.inf, detail="record too short for W")
    values = lyapunov.functional[late]
    tol = 1e-6 * abs(float(values[0]))
    margins = values[:-1] + tol - values[1:]
    detail = ""
    if lyapunov.seam_flags:
        detail = "E jumps up at t = " + ", ".join(f"{t:g}" for t in lyapunov.seam_flags)
    return CheckResult.from_margins("lyapunov_monotone", margins, lyapunov.times[late][1:], detail)
