"""Dense trajectory record on [-tau_bar, t_now].

Times in [-tau_bar, 0] are answered by the initial functions. From t = 0 on the
record holds one sample per committed step, and every cell between two samples
carries the acceleration at both of its ends, so a jump of alpha at a breakpoint
stays on its own side of the grid point.
"""

from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np

from flockdelay.exceptions import HistoryRangeError, OrderingError

if TYPE_CHECKING:
    from typing import Iterable

    from numpy.typing import ArrayLike

    from flockdelay._types import FloatArray, State
    from flockdelay.models.initial import InitialData

# relative slack allowed at both ends of the covered interval
RANGE_TOLERANCE = 1e-12


def hermite_basis(theta: FloatArray) -> tuple[FloatArray, FloatArray, FloatArray, FloatArray]:
    theta2 = theta * theta
    theta3 = theta2 * theta
    return (
        2 * theta3 - 3 * theta2 + 1,
        theta3 - 2 * theta2 + theta,
        -2 * theta3 + 3 * theta2,
        theta3 - theta2,
    )


class TrajectoryHistory:
    """Append-only record of all agent states.

    Args:
        initial: the initial functions serving s <= 0
        tau_bar: the maximal lag, lookups before -tau_bar are rejected
        capacity: initial number of sample slots, doubled on demand
    """

    def __init__(self, initial: InitialData, tau_bar: float, capacity: int = 1024) -> None:
        self.initial = initial
        self.tau_bar = tau_bar
        shape = (max(capacity, 2), initial.n_agents, initial.dim)
        self._times = np.empty(shape[0])
        self._x = np.empty(shape)
        self._v = np.empty(shape)
        self._acc_start = np.empty(shape)
        self._acc_end = np.empty(shape)
        x0, v0 = initial.state(0.0)
        self._times[0] = 0.0
        self._x[0], self._v[0] = x0, v0
        self._size = 1

    def __len__(self) -> int:
        return self._size

    def __repr__(self) -> str:
        return f"<TrajectoryHistory agents={self.n_agents} samples={self._size} t_now={self.t_now}>"

    @property
    def n_agents(self) -> int:
        return self.initial.n_agents

    @property
    def dim(self) -> int:
        return self.initial.dim

    @property
    def t_now(self) -> float:
        return float(self._times[self._size - 1])

    @property
    def times(self) -> FloatArray:
        return self._times[: self._size]

    @property
    def positions(self) -> FloatArray:
        return self._x[: self._size]

    @property
    def velocities(self) -> FloatArray:
        return self._v[: self._size]

    @property
    def last_state(self) -> State:
        return self._x[self._size - 1].copy(), self._v[self._size - 1].copy()

    def _grow(self) -> None:
        for name in ("_times", "_x", "_v", "_acc_start", "_acc_end"):
            old = getattr(self, name)
            new = np.empty((2 * len(old), *old.shape[1:]))
            new[: len(old)] = old
            setattr(self, name, new)

    def append(self, t_new: float, state: State, derivatives: tuple[FloatArray, FloatArray]) -> None:
        """Commit the state at ``t_new``.

        ``derivatives`` are the accelerations at the start and at the end of the new cell.
        """
        if not t_new > self.t_now:
            raise OrderingError(f"cannot append t = {t_new} after t_now = {self.t_now}")
        if self._size == len(self._times):
            self._grow()
        cell = self._size - 1
        self._acc_start[cell], self._acc_end[cell] = derivatives
        self._times[self._size] = t_new
        self._x[self._size], self._v[self._size] = state
        self._size += 1

    def _check_range(self, times: FloatArray) -> None:
        slack = RANGE_TOLERANCE * max(1.0, self.t_now, self.tau_bar)
        low, high = float(times.min()), float(times.max())
        if low < -self.tau_bar - slack or high > self.t_now + slack:
            bad = low if low < -self.tau_bar - slack else high
            raise HistoryRangeError(f"lookup at s = {bad} outside [-{self.tau_bar}, {self.t_now}]")

    def _interpolate(self, times: FloatArray, cells: FloatArray) -> tuple[FloatArray, FloatArray]:
        start, end = self._times[cells], self._times[cells + 1]
        width = (end - start)[:, None, None]
        theta = ((times - start) / (end - start))[:, None, None]
        h00, h10, h01, h11 = hermite_basis(theta)
        x0, x1 = self._x[cells], self._x[cells + 1]
        v0, v1 = self._v[cells], self._v[cells + 1]
        positions = h00 * x0 + h10 * width * v0 + h01 * x1 + h11 * width * v1
        velocities = h00 * v0 + h10 * width * self._acc_start[cells] + h01 * v1 + h11 * width * self._acc_end[cells]
        return positions, velocities

    def _cells(self, times: FloatArray) -> FloatArray:
        cells = np.searchsorted(self.times, times, side="right") - 1
        return np.clip(cells, 0, self._size - 2)

    def sample_many(self, times: ArrayLike) -> tuple[FloatArray, FloatArray]:
        """States at every time in ``times``, shaped (K, N, d) each."""
        s = np.atleast_1d(np.asarray(times, dtype=float))
        if s.size == 0:
            empty = np.empty((0, self.n_agents, self.dim))
            return empty, empty.copy()
        self._check_range(s)
        positions = np.empty((len(s), self.n_agents, self.dim))
        velocities = np.empty_like(positions)
        past = s <= 0.0
        if past.any():
            positions[past], velocities[past] = self.initial.at(np.maximum(s[past], -self.tau_bar))
        if (~past).any():
            later = np.minimum(s[~past], self.t_now)
            if self._size < 2:
                positions[~past], velocities[~past] = self._x[0], self._v[0]
            else:
                positions[~past], velocities[~past] = self._interpolate(later, self._cells(later))
        return positions, velocities

    def sample(self, s: float) -> State:
        """The state of all agents at time ``s`` in [-tau_bar, t_now]."""
        positions, velocities = self.sample_many([s])
        return positions[0], velocities[0]

    def extrapolate(self, s: float) -> State:
        """Predict the state beyond t_now by extending the last cell's Hermite cubic."""
        if s <= self.t_now:
            return self.sample(s)
        if self._size < 2:
            x0, v0 = self.last_state
            return x0 + (s - self.t_now) * v0, v0
        cells = np.array([self._size - 2])
        positions, velocities = self._interpolate(np.array([s]), cells)
        return positions[0], velocities[0]

    def record_indices(self, stride: int = 1, anchors: Iterable[float] = ()) -> FloatArray:
        """Indices of every ``stride``-th sample plus the last one and samples closest to ``anchors``."""
        picked = set(range(0, self._size, stride))
        picked.add(self._size - 1)
        times = self.times
        for anchor in anchors:
            index = int(np.argmin(np.abs(times - anchor)))
            if abs(times[index] - anchor) <= 1e-9 * max(1.0, abs(anchor)):
                picked.add(index)
        return np.array(sorted(picked), dtype=int)

    def to_csv(self, path: str | Path, stride: int = 1) -> None:
        """Dump one row per agent per recorded time: t, agent, x..., v..."""
        indices = self.record_indices(stride)
        n_agents, dim = self.n_agents, self.dim
        rows = np.empty((len(indices) * n_agents, 2 + 2 * dim))
        rows[:, 0] = np.repeat(self._times[indices], n_agents)
        rows[:, 1] = np.tile(np.arange(n_agents), len(indices))
        rows[:, 2 : 2 + dim] = self._x[indices].reshape(-1, dim)
        rows[:, 2 + dim :] = self._v[indices].reshape(-1, dim)
        header = ",".join(["t", "agent", *(f"x{k}" for k in range(dim)), *(f"v{k}" for k in range(dim))])
        formats = ["%.17g", "%d", *(["%.17g"] * (2 * dim))]
        np.savetxt(Path(path), rows, fmt=formats, delimiter=",", header=header, comments="")
