"""Communication weight schedules alpha(t) in [0, 1] and the persistence of excitation check.

Every schedule is piecewise constant and right-continuous at its breakpoints.
"""

from __future__ import annotations

import abc
import dataclasses as dc
import math
from typing import TYPE_CHECKING, ClassVar, NamedTuple

import numpy as np

from flockdelay.exceptions import ConfigError, DomainError, PersistenceError

if TYPE_CHECKING:
    from typing import Any

    from numpy.typing import ArrayLike

    from flockdelay._types import FloatArray

PE_TOLERANCE = 1e-12


class Profile(abc.ABC):
    """The shape of alpha, without any persistence declaration."""

    family: ClassVar[str]

    @abc.abstractmethod
    def __call__(self, t: ArrayLike) -> FloatArray: ...

    @abc.abstractmethod
    def breakpoints(self, horizon: float) -> FloatArray:
        """Discontinuities of alpha in (0, horizon], sorted and deduplicated."""

    def to_dict(self) -> dict[str, Any]:
        return {"family": self.family, **dc.asdict(self)}  # type: ignore[call-overload]


@dc.dataclass(frozen=True)
class AlwaysOn(Profile):
    family: ClassVar[str] = "always-on"

    def __call__(self, t: ArrayLike) -> FloatArray:
        return np.ones(np.shape(t))

    def breakpoints(self, horizon: float) -> FloatArray:
        return np.empty(0)


@dc.dataclass(frozen=True)
class SquareWave(Profile):
    """On during the first ``duty`` fraction of every period, shifted by ``phase``."""

    family: ClassVar[str] = "square-wave"

    period: float
    duty: float
    phase: float = 0.0

    def __post_init__(self) -> None:
        if not self.period > 0:
            raise ConfigError(f"square wave needs a positive period, got {self.period}")
        if not 0 < self.duty <= 1:
            raise ConfigError(f"square wave duty must lie in (0, 1], got {self.duty}")

    def __call__(self, t: ArrayLike) -> FloatArray:
        offset = np.mod(np.asarray(t, dtype=float) - self.phase, self.period)
        return np.where(offset < self.duty * self.period, 1.0, 0.0)

    def breakpoints(self, horizon: float) -> FloatArray:
        if self.duty >= 1:
            return np.empty(0)
        first = math.floor(-self.phase / self.period)
        last = math.ceil((horizon - self.phase) / self.period)
        starts = self.phase + self.period * np.arange(first, last + 1)
        points = np.concatenate([starts, starts + self.duty * self.period])
        return np.unique(points[(points > 0) & (points <= horizon)])


@dc.dataclass(frozen=True)
class BlackoutList(Profile):
    """Off on each listed interval [a, b), on elsewhere. ``b`` may be infinite."""

    family: ClassVar[str] = "blackout"

    intervals: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        intervals = tuple(sorted((float(a), float(b)) for a, b in self.intervals))
        for a, b in intervals:
            if not 0 <= a < b:
                raise ConfigError(f"blackout interval [{a}, {b}] must satisfy 0 <= a < b")
        for (_, b), (a, _) in zip(intervals, intervals[1:]):
            if a < b:
                raise ConfigError("blackout intervals must not overlap")
        object.__setattr__(self, "intervals", intervals)

    def __call__(self, t: ArrayLike) -> FloatArray:
        t = np.asarray(t, dtype=float)
        off = np.zeros(t.shape, dtype=bool)
        for a, b in self.intervals:
            off |= (t >= a) & (t < b)
        return np.where(off, 0.0, 1.0)

    def breakpoints(self, horizon: float) -> FloatArray:
        points = np.array([edge for interval in self.intervals for edge in interval], dtype=float)
        return np.unique(points[(points > 0) & (points <= horizon)])

    def to_dict(self) -> dict[str, Any]:
        return {"family": self.family, "intervals": [list(interval) for interval in self.intervals]}


@dc.dataclass(frozen=True)
class SeededRandomBlackouts(Profile):
    """One random blackout per period, lasting at most ``1 - min_duty`` of it."""

    family: ClassVar[str] = "random-blackouts"

    period: float
    min_duty: float
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.period > 0:
            raise ConfigError(f"random blackouts need a positive period, got {self.period}")
        if not 0 < self.min_duty <= 1:
            raise ConfigError(f"min_duty must lie in (0, 1], got {self.min_duty}")

    def blackout(self, index: int) -> tuple[float, float]:
        """The off interval of period ``index``, drawn from its own seeded stream."""
        rng = np.random.default_rng([self.seed, index])
        length = rng.uniform(0.0, 1.0 - self.min_duty) * self.period
        start = index * self.period + rng.uniform(0.0, self.period - length)
        return start, start + length

    def _blackouts(self, horizon: float) -> list[tuple[float, float]]:
        count = math.ceil(horizon / self.period) + 1
        return [interval for interval in map(self.blackout, range(count)) if interval[1] > interval[0]]

    def __call__(self, t: ArrayLike) -> FloatArray:
        t = np.asarray(t, dtype=float)
        if t.size == 0:
            return np.ones(t.shape)
        return BlackoutList(tuple(self._blackouts(float(t.max())))).__call__(t)

    def breakpoints(self, horizon: float) -> FloatArray:
        return BlackoutList(tuple(self._blackouts(horizon))).breakpoints(horizon)


PROFILES: dict[str, type[Profile]] = {
    cls.family: cls for cls in (AlwaysOn, SquareWave, BlackoutList, SeededRandomBlackouts)
}


class PEResult(NamedTuple):
    passed: bool
    worst_integral: float
    worst_start: float


@dc.dataclass(frozen=True)
class WeightSchedule:
    """A weight profile plus its optional persistence of excitation declaration.

    When declared, every window ``[t, t + window]`` integrates alpha to at least
    ``alpha_tilde``.
    """

    profile: Profile = dc.field(default_factory=AlwaysOn)
    window: float | None = None
    alpha_tilde: float | None = None

    def __post_init__(self) -> None:
        if (self.window is None) != (self.alpha_tilde is None):
            raise ConfigError("a persistence declaration needs both window and alpha_tilde")
        if self.window is not None and self.alpha_tilde is not None:
            if not self.window > 0 or not self.alpha_tilde > 0:
                raise ConfigError("persistence window and alpha_tilde must be positive")
            if self.alpha_tilde > self.window:
                raise ConfigError(f"alpha_tilde {self.alpha_tilde} cannot exceed the window {self.window}")

    @property
    def pe_declared(self) -> bool:
        return self.window is not None

    def value(self, t: ArrayLike) -> FloatArray:
        return self.profile(t)

    def breakpoints(self, horizon: float) -> FloatArray:
        return self.profile.breakpoints(horizon)

    def verify_declared(self, horizon: float) -> PEResult:
        """Verify the declared pair on ``[0, horizon]``, raising when it fails."""
        assert self.window is not None and self.alpha_tilde is not None
        result = verify_pe(self, self.window, self.alpha_tilde, max(horizon, self.window))
        if not result.passed:
            raise PersistenceError(
                f"declared persistence (T={self.window}, alpha_tilde={self.alpha_tilde}) fails: "
                f"window starting at t={result.worst_start:.6g} integrates to {result.worst_integral:.6g}"
            )
        return result

    def to_dict(self) -> dict[str, Any]:
        data = self.profile.to_dict()
        if self.pe_declared:
            data["pe"] = {"window": self.window, "alpha_tilde": self.alpha_tilde}
        return data


def eval_alpha(schedule: WeightSchedule, t: float) -> float:
    if t < 0:
        raise DomainError(f"the weight schedule starts at t = 0, got t = {t}")
    return float(schedule.value(t))


def breakpoints(schedule: WeightSchedule, horizon: float) -> FloatArray:
    return schedule.breakpoints(horizon)


def cumulative_weight(schedule: WeightSchedule, horizon: float) -> tuple[FloatArray, FloatArray]:
    """Nodes and values of A(t), the integral of alpha over [0, t], on [0, horizon].

    A is piecewise linear between the returned nodes.
    """
    nodes = np.unique(np.concatenate([[0.0, horizon], schedule.breakpoints(horizon)]))
    values = schedule.value(nodes[:-1])
    return nodes, np.concatenate([[0.0], np.cumsum(values * np.diff(nodes))])


def verify_pe(schedule: WeightSchedule, window: float, alpha_tilde: float, horizon: float) -> PEResult:
    """Exact minimum of the sliding window integral of alpha over starts in [0, horizon - window]."""
    if not window > 0 or not alpha_tilde > 0:
        raise ConfigError("persistence window and alpha_tilde must be positive")
    if horizon < window:
        raise ConfigError(f"horizon {horizon} is shorter than the persistence window {window}")
    nodes, values = cumulative_weight(schedule, horizon)
    last_start = horizon - window
    # the window integral is piecewise linear in its start, extremal where either end hits a node
    starts = np.concatenate([[0.0, last_start], nodes, nodes - window])
    starts = np.unique(starts[(starts >= 0) & (starts <= last_start)])
    integrals = np.interp(starts + window, nodes, values) - np.interp(starts, nodes, values)
    worst = int(np.argmin(integrals))
    worst_integral = float(integrals[worst])
    return PEResult(worst_integral >= alpha_tilde - PE_TOLERANCE, worst_integral, float(starts[worst]))
