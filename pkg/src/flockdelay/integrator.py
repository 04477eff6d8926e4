"""Method of steps with classical RK4.

Steps never straddle a discontinuity of alpha, so alpha is constant on each step.
Delayed lookups that land beyond the last committed time are served from a
prediction of the current step and refined by fixed point sweeps.
"""

from __future__ import annotations

import math
from typing import TYPE_CHECKING

import numpy as np

from flockdelay import signals
from flockdelay.exceptions import ConfigError, DegenerateScheduleError, IntegrationError
from flockdelay.history import TrajectoryHistory, hermite_basis
from flockdelay.models.delays import PointwiseDelay
from flockdelay.models.dynamics import rhs
from flockdelay.termui import logger

if TYPE_CHECKING:
    from typing import Callable, Iterable

    from numpy.typing import ArrayLike

    from flockdelay._types import FloatArray, State
    from flockdelay.models.system import SystemConfig
    from flockdelay.schedules import WeightSchedule

DEGENERATE_SPACING = 1e-12


def align_breakpoints(
    schedule: WeightSchedule, h_step: float, t_end: float, extra: Iterable[float] = ()
) -> FloatArray:
    """Step times from 0 to ``t_end`` containing every breakpoint of the schedule.

    Each interval between consecutive breakpoints is split uniformly into steps no
    longer than ``h_step``. ``extra`` times are included too, unless they coincide
    with a breakpoint or with another extra time up to rounding.
    """
    if not h_step > 0:
        raise ConfigError(f"h_step must be positive, got {h_step}")
    if not t_end > 0:
        raise ConfigError(f"t_end must be positive, got {t_end}")
    breaks = np.asarray(schedule.breakpoints(t_end), dtype=float)
    points = np.unique(np.concatenate([[0.0, t_end], breaks[(breaks > 0) & (breaks < t_end)]]))
    spacing = np.diff(points)
    if np.any(spacing < DEGENERATE_SPACING):
        where = float(points[int(np.argmin(spacing))])
        raise DegenerateScheduleError(f"schedule breakpoints closer than {DEGENERATE_SPACING} near t = {where}")
    added: list[float] = []
    for t in sorted(float(t) for t in extra):
        tolerance = 1e-9 * max(1.0, abs(t))
        if not 0 < t < t_end or np.min(np.abs(points - t)) <= tolerance:
            continue
        # extras are sorted, so the last accepted one is the nearest
        if added and t - added[-1] <= tolerance:
            continue
        added.append(t)
    if added:
        points = np.unique(np.concatenate([points, added]))
    pieces = []
    for start, stop in zip(points[:-1], points[1:]):
        count = max(1, math.ceil((stop - start) / h_step - 1e-9))
        pieces.append(np.linspace(start, stop, count + 1)[:-1])
    pieces.append([t_end])
    return np.concatenate(pieces)


def _hermite_state(
    s: float, start: float, stop: float, first: tuple[FloatArray, ...], last: tuple[FloatArray, ...]
) -> State:
    """Evaluate the cubic of one step, ``first``/``last`` are (x, v, acceleration) at its ends."""
    width = stop - start
    h00, h10, h01, h11 = hermite_basis(np.asarray((s - start) / width))
    x0, v0, a0 = first
    x1, v1, a1 = last
    positions = h00 * x0 + h10 * width * v0 + h01 * x1 + h11 * width * v1
    velocities = h00 * v0 + h10 * width * a0 + h01 * v1 + h11 * width * a1
    return positions, velocities


class _StepLookup:
    """Delayed state lookups during one step."""

    def __init__(self, history: TrajectoryHistory) -> None:
        self.history = history
        self.overlapped = False
        # (start, stop, first, last) of the current predicted step
        self.pending: tuple[float, float, tuple[FloatArray, ...], tuple[FloatArray, ...]] | None = None

    def _ahead(self, s: float) -> State:
        if self.pending is None:
            return self.history.extrapolate(s)
        return _hermite_state(s, *self.pending)

    def sample_many(self, times: ArrayLike) -> tuple[FloatArray, FloatArray]:
        s = np.atleast_1d(np.asarray(times, dtype=float))
        ahead = s > self.history.t_now
        if not ahead.any():
            return self.history.sample_many(s)
        self.overlapped = True
        positions = np.empty((len(s), self.history.n_agents, self.history.dim))
        velocities = np.empty_like(positions)
        if (~ahead).any():
            positions[~ahead], velocities[~ahead] = self.history.sample_many(s[~ahead])
        for index in np.flatnonzero(ahead):
            positions[index], velocities[index] = self._ahead(float(s[index]))
        return positions, velocities

    def sample(self, s: float) -> State:
        positions, velocities = self.sample_many([s])
        return positions[0], velocities[0]


def rk4_step(
    cfg: SystemConfig, history: TrajectoryHistory, start: float, stop: float, alpha: float
) -> tuple[State, tuple[FloatArray, FloatArray]]:
    """Advance the committed state from ``start`` to ``stop``.

    Returns the new state and the accelerations at both ends of the step.
    """
    h = stop - start
    x0, v0 = history.last_state
    lookup = _StepLookup(history)

    def f(t: float, x: FloatArray, v: FloatArray) -> State:
        return rhs(t, (x, v), lookup, cfg, alpha)

    def sweep() -> tuple[FloatArray, FloatArray, FloatArray, FloatArray]:
        k1x, k1v = f(start, x0, v0)
        k2x, k2v = f(start + h / 2, x0 + h / 2 * k1x, v0 + h / 2 * k1v)
        k3x, k3v = f(start + h / 2, x0 + h / 2 * k2x, v0 + h / 2 * k2v)
        k4x, k4v = f(stop, x0 + h * k3x, v0 + h * k3v)
        x1 = x0 + h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x)
        v1 = v0 + h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)
        _, a1 = f(stop, x1, v1)
        return x1, v1, k1v, a1

    x1, v1, a0, a1 = sweep()
    if lookup.overlapped:
        for _ in range(cfg.settings.overlap_iterations):
            lookup.pending = (start, stop, (x0, v0, a0), (x1, v1, a1))
            x1, v1, a0, a1 = sweep()
    return (x1, v1), (a0, a1)


def step_plan(cfg: SystemConfig) -> FloatArray:
    extra: list[float] = []
    if cfg.schedule.window is not None:
        window = cfg.schedule.window
        extra.extend(window * k for k in range(1, int(cfg.t_end / window) + 1))
    if isinstance(cfg.delay, PointwiseDelay):
        extra.extend(cfg.delay.discontinuity_times(cfg.t_end))
    return align_breakpoints(cfg.schedule, cfg.h_step, cfg.t_end, extra)


def run(cfg: SystemConfig, callback: Callable[[float], None] | None = None) -> TrajectoryHistory:
    """Integrate the system up to its horizon.

    Args:
        cfg: the system to integrate
        callback: called with the time of every committed step
    """
    plan = step_plan(cfg)
    history = TrajectoryHistory(cfg.initial, cfg.tau_bar, capacity=len(plan))
    logger.info(
        "Integrating %d agents (%s delay) over [0, %g] in %d steps",
        cfg.n_agents,
        "distributed" if cfg.distributed else "pointwise",
        cfg.t_end,
        len(plan) - 1,
    )
    signals.pre_integrate.send(cfg, plan=plan)
    for start, stop in zip(plan[:-1], plan[1:]):
        alpha = float(cfg.schedule.value(0.5 * (start + stop)))
        state, derivatives = rk4_step(cfg, history, float(start), float(stop), alpha)
        if not (np.isfinite(state[0]).all() and np.isfinite(state[1]).all()):
            logger.debug("Non-finite state after the step [%g, %g]", start, stop)
            raise IntegrationError("the state became non-finite", float(stop))
        history.append(float(stop), state, derivatives)
        if callback is not None:
            callback(float(stop))
    logger.info("Integration finished at t = %g", history.t_now)
    signals.post_integrate.send(cfg, history=history)
    return history
