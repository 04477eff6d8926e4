from __future__ import annotations

import dataclasses as dc
import math
from typing import TYPE_CHECKING

import numpy as np

from flockdelay.utils import pairwise_maximum

if TYPE_CHECKING:
    from typing import Iterable

    from flockdelay._types import FloatArray
    from flockdelay.history import TrajectoryHistory

# time comparisons on the record grid
TIME_TOLERANCE = 1e-9


@dc.dataclass(frozen=True, eq=False)
class TrajectorySeries:
    """Recorded samples from -tau_bar to t_end with their position and velocity diameters."""

    times: FloatArray
    positions: FloatArray
    velocities: FloatArray
    d_x: FloatArray
    d_v: FloatArray

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    @property
    def start(self) -> int:
        """Index of the first sample at t >= 0."""
        return int(np.searchsorted(self.times, -TIME_TOLERANCE, side="right"))

    def index_at(self, t: float) -> int:
        """Index of the sample closest to ``t``."""
        return int(np.argmin(np.abs(self.times - t)))

    def window(self, a: float, b: float) -> tuple[int, int]:
        """Inclusive index range of the samples within [a, b]."""
        lo = int(np.searchsorted(self.times, a - TIME_TOLERANCE, side="left"))
        hi = int(np.searchsorted(self.times, b + TIME_TOLERANCE, side="right")) - 1
        return lo, max(lo, hi)

    def speeds(self) -> FloatArray:
        return np.linalg.norm(self.velocities, axis=-1).max(axis=1)


def window_reduce(values: FloatArray, lo: FloatArray, hi: FloatArray, ufunc: np.ufunc = np.maximum) -> FloatArray:
    """Reduce ``values`` along the first axis over each inclusive index range [lo_k, hi_k]."""
    padded = np.concatenate([values, values[-1:]])
    indices = np.empty(2 * len(lo), dtype=int)
    indices[0::2] = lo
    indices[1::2] = np.asarray(hi) + 1
    return ufunc.reduceat(padded, indices, axis=0)[0::2]


def initial_segment_times(tau_bar: float, spacing: float) -> FloatArray:
    if tau_bar <= 0:
        return np.empty(0)
    count = max(1, math.ceil(tau_bar / spacing - 1e-9))
    return np.linspace(-tau_bar, 0.0, count + 1)[:-1]


def build_series(
    history: TrajectoryHistory, stride: int = 1, anchors: Iterable[float] = (), spacing: float | None = None
) -> TrajectorySeries:
    """Sample the history on its record grid, the initial segment included.

    Args:
        history: the completed trajectory
        stride: keep every k-th committed step
        anchors: times that are kept regardless of the stride
        spacing: grid spacing on the initial segment, defaults to the stride times the first step
    """
    indices = history.record_indices(stride, anchors)
    if spacing is None:
        spacing = float(history.times[1] - history.times[0]) if len(history) > 1 else history.tau_bar or 1.0
    before = initial_segment_times(history.tau_bar, spacing * stride)
    x_before, v_before = history.initial.at(before) if len(before) else (
        np.empty((0, history.n_agents, history.dim)),
        np.empty((0, history.n_agents, history.dim)),
    )
    times = np.concatenate([before, history.times[indices]])
    positions = np.concatenate([x_before, history.positions[indices]])
    velocities = np.concatenate([v_before, history.velocities[indices]])
    d_x = np.array([pairwise_maximum(row) for row in positions])
    d_v = np.array([pairwise_maximum(row) for row in velocities])
    return TrajectorySeries(times, positions, velocities, d_x, d_v)
