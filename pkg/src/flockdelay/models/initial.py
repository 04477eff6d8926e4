"""Initial histories x_i(s), v_i(s) on [-tau_bar, 0]."""

from __future__ import annotations

import abc
import dataclasses as dc
from functools import cached_property
from typing import TYPE_CHECKING, ClassVar

import numpy as np
from scipy.interpolate import CubicSpline

from flockdelay.exceptions import ConfigError
from flockdelay.utils import cloud_diameter, pairwise_maximum

if TYPE_CHECKING:
    from typing import Any

    from numpy.typing import ArrayLike

    from flockdelay._types import FloatArray, State

# dense scans of the initial segment use tau_bar / SCAN_RESOLUTION spacing
SCAN_RESOLUTION = 1000


def _deep_tuple(array: FloatArray) -> Any:
    if array.ndim == 0:
        return float(array)
    return tuple(_deep_tuple(item) for item in array)


def _agent_array(value: ArrayLike, name: str) -> FloatArray:
    array = np.asarray(value, dtype=float)
    if array.ndim == 1:
        array = array[:, None]
    if array.ndim != 2:
        raise ConfigError(f"{name} must be a list of agent vectors")
    return array


class InitialData(abc.ABC):
    """Continuous initial functions defined on all of [-tau_bar, 0]."""

    family: ClassVar[str]

    @property
    @abc.abstractmethod
    def n_agents(self) -> int: ...

    @property
    @abc.abstractmethod
    def dim(self) -> int: ...

    @abc.abstractmethod
    def at(self, times: ArrayLike) -> tuple[FloatArray, FloatArray]:
        """Positions and velocities at each of ``times``, both shaped (K, N, d)."""

    def state(self, s: float) -> State:
        positions, velocities = self.at([s])
        return positions[0], velocities[0]

    def covers(self, tau_bar: float) -> bool:
        return True

    def scan_grid(self, tau_bar: float) -> FloatArray:
        if tau_bar <= 0:
            return np.zeros(1)
        return np.linspace(-tau_bar, 0.0, SCAN_RESOLUTION + 1)

    def velocity_bound(self, tau_bar: float) -> float:
        """Largest speed max_j max_s |v_j(s)| on the initial segment."""
        _, velocities = self.at(self.scan_grid(tau_bar))
        return float(np.linalg.norm(velocities, axis=-1).max())

    def position_spread(self, tau_bar: float) -> float:
        """Largest displacement max_l max_{s, r} |x_l(s) - x_l(r)| on the initial segment."""
        positions, _ = self.at(self.scan_grid(tau_bar))
        return max(cloud_diameter(positions[:, agent]) for agent in range(self.n_agents))

    def velocity_spread(self, tau_bar: float) -> float:
        """D_0, the largest gap |v_i(s) - v_j(r)| over agents and times of the initial segment."""
        _, velocities = self.at(self.scan_grid(tau_bar))
        return cloud_diameter(velocities.reshape(-1, self.dim))

    @abc.abstractmethod
    def to_dict(self) -> dict[str, Any]: ...


@dc.dataclass(frozen=True)
class ConstantInitial(InitialData):
    family: ClassVar[str] = "constant"

    positions: Any
    velocities: Any

    def __post_init__(self) -> None:
        positions = _agent_array(self.positions, "positions")
        velocities = _agent_array(self.velocities, "velocities")
        if positions.shape != velocities.shape:
            raise ConfigError(f"positions {positions.shape} and velocities {velocities.shape} differ in shape")
        object.__setattr__(self, "positions", _deep_tuple(positions))
        object.__setattr__(self, "velocities", _deep_tuple(velocities))

    @cached_property
    def _x(self) -> FloatArray:
        return np.array(self.positions, dtype=float)

    @cached_property
    def _v(self) -> FloatArray:
        return np.array(self.velocities, dtype=float)

    @property
    def n_agents(self) -> int:
        return self._x.shape[0]

    @property
    def dim(self) -> int:
        return self._x.shape[1]

    def at(self, times: ArrayLike) -> tuple[FloatArray, FloatArray]:
        count = np.size(times)
        return np.broadcast_to(self._x, (count, *self._x.shape)).copy(), np.broadcast_to(
            self._v, (count, *self._v.shape)
        ).copy()

    def velocity_bound(self, tau_bar: float) -> float:
        return float(np.linalg.norm(self._v, axis=-1).max())

    def position_spread(self, tau_bar: float) -> float:
        return 0.0

    def velocity_spread(self, tau_bar: float) -> float:
        return pairwise_maximum(self._v)

    def to_dict(self) -> dict[str, Any]:
        return {"family": self.family, "positions": self._x.tolist(), "velocities": self._v.tolist()}


@dc.dataclass(frozen=True)
class LinearInitial(InitialData):
    """x_i(s) = a_i + b_i s and v_i(s) = c_i + e_i s"""

    family: ClassVar[str] = "linear"

    positions: Any
    position_slopes: Any
    velocities: Any
    velocity_slopes: Any

    def __post_init__(self) -> None:
        arrays = {name: _agent_array(getattr(self, name), name) for name in self._fields()}
        shapes = {array.shape for array in arrays.values()}
        if len(shapes) != 1:
            raise ConfigError("linear initial data needs equally shaped coefficient arrays")
        for name, array in arrays.items():
            object.__setattr__(self, name, _deep_tuple(array))

    @staticmethod
    def _fields() -> tuple[str, ...]:
        return ("positions", "position_slopes", "velocities", "velocity_slopes")

    @cached_property
    def _coefficients(self) -> dict[str, FloatArray]:
        return {name: np.array(getattr(self, name), dtype=float) for name in self._fields()}

    @property
    def n_agents(self) -> int:
        return self._coefficients["positions"].shape[0]

    @property
    def dim(self) -> int:
        return self._coefficients["positions"].shape[1]

    def at(self, times: ArrayLike) -> tuple[FloatArray, FloatArray]:
        s = np.asarray(times, dtype=float).reshape(-1, 1, 1)
        coef = self._coefficients
        return coef["positions"] + coef["position_slopes"] * s, coef["velocities"] + coef["velocity_slopes"] * s

    def _endpoint_velocities(self, tau_bar: float) -> FloatArray:
        _, velocities = self.at([-tau_bar, 0.0])
        return velocities

    def velocity_bound(self, tau_bar: float) -> float:
        # the norm of an affine function is convex, its maximum sits at an endpoint
        return float(np.linalg.norm(self._endpoint_velocities(tau_bar), axis=-1).max())

    def position_spread(self, tau_bar: float) -> float:
        return float(tau_bar * np.linalg.norm(self._coefficients["position_slopes"], axis=-1).max())

    def velocity_spread(self, tau_bar: float) -> float:
        return cloud_diameter(self._endpoint_velocities(tau_bar).reshape(-1, self.dim))

    def to_dict(self) -> dict[str, Any]:
        return {"family": self.family, **{name: array.tolist() for name, array in self._coefficients.items()}}


@dc.dataclass(frozen=True)
class SampledInitial(InitialData):
    """States sampled on a time grid, interpolated by cubic splines."""

    family: ClassVar[str] = "sampled"

    times: Any
    positions: Any
    velocities: Any

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float)
        positions = np.asarray(self.positions, dtype=float)
        velocities = np.asarray(self.velocities, dtype=float)
        if times.ndim != 1 or len(times) < 2 or np.any(np.diff(times) <= 0):
            raise ConfigError("sampled initial data needs at least two strictly increasing times")
        if positions.ndim == 2:
            positions, velocities = positions[..., None], velocities[..., None]
        if positions.shape != velocities.shape or positions.ndim != 3 or positions.shape[0] != len(times):
            raise ConfigError("sampled initial states must be shaped (times, agents, dimension)")
        object.__setattr__(self, "times", _deep_tuple(times))
        object.__setattr__(self, "positions", _deep_tuple(positions))
        object.__setattr__(self, "velocities", _deep_tuple(velocities))

    @cached_property
    def _splines(self) -> tuple[CubicSpline, CubicSpline]:
        times = np.array(self.times)
        return (
            CubicSpline(times, np.array(self.positions), axis=0),
            CubicSpline(times, np.array(self.velocities), axis=0),
        )

    @property
    def n_agents(self) -> int:
        return len(self.positions[0])

    @property
    def dim(self) -> int:
        return len(self.positions[0][0])

    def covers(self, tau_bar: float) -> bool:
        return self.times[0] <= -tau_bar and self.times[-1] >= 0.0

    def at(self, times: ArrayLike) -> tuple[FloatArray, FloatArray]:
        s = np.atleast_1d(np.asarray(times, dtype=float))
        position_spline, velocity_spline = self._splines
        return position_spline(s), velocity_spline(s)

    def to_dict(self) -> dict[str, Any]:
        return {
            "family": self.family,
            "times": list(self.times),
            "positions": np.array(self.positions).tolist(),
            "velocities": np.array(self.velocities).tolist(),
        }


@dc.dataclass(frozen=True)
class RandomInitial(InitialData):
    """Constant histories drawn uniformly from boxes, reproducible by seed."""

    family: ClassVar[str] = "random"

    agents: int
    dimension: int
    seed: int = 0
    position_radius: float = 1.0
    velocity_radius: float = 1.0

    def __post_init__(self) -> None:
        if self.position_radius < 0 or self.velocity_radius < 0:
            raise ConfigError("random initial data needs nonnegative radii")

    @cached_property
    def _constant(self) -> ConstantInitial:
        rng = np.random.default_rng(self.seed)
        shape = (self.agents, self.dimension)
        positions = rng.uniform(-self.position_radius, self.position_radius, shape)
        velocities = rng.uniform(-self.velocity_radius, self.velocity_radius, shape)
        return ConstantInitial(positions, velocities)

    @property
    def n_agents(self) -> int:
        return self.agents

    @property
    def dim(self) -> int:
        return self.dimension

    def at(self, times: ArrayLike) -> tuple[FloatArray, FloatArray]:
        return self._constant.at(times)

    def velocity_bound(self, tau_bar: float) -> float:
        return self._constant.velocity_bound(tau_bar)

    def position_spread(self, tau_bar: float) -> float:
        return 0.0

    def velocity_spread(self, tau_bar: float) -> float:
        return self._constant.velocity_spread(tau_bar)

    def to_dict(self) -> dict[str, Any]:
        return {
            "family": self.family,
            "seed": self.seed,
            "position_radius": self.position_radius,
            "velocity_radius": self.velocity_radius,
        }


@dc.dataclass(frozen=True)
class AlternatingInitial(InitialData):
    """Two clusters on a line: even agents at 0 moving at +speed, odd agents at
    ``spacing`` moving at -speed.

    The velocity bound, the position spread and D_0 do not depend on the agent count.
    """

    family: ClassVar[str] = "alternating"

    agents: int
    dimension: int
    speed: float = 0.5
    spacing: float = 1.0

    @cached_property
    def _constant(self) -> ConstantInitial:
        positions = np.zeros((self.agents, self.dimension))
        velocities = np.zeros((self.agents, self.dimension))
        odd = np.arange(self.agents) % 2
        positions[:, 0] = self.spacing * odd
        velocities[:, 0] = np.where(odd == 0, self.speed, -self.speed)
        return ConstantInitial(positions, velocities)

    @property
    def n_agents(self) -> int:
        return self.agents

    @property
    def dim(self) -> int:
        return self.dimension

    def at(self, times: ArrayLike) -> tuple[FloatArray, FloatArray]:
        return self._constant.at(times)

    def velocity_bound(self, tau_bar: float) -> float:
        return abs(self.speed)

    def position_spread(self, tau_bar: float) -> float:
        return 0.0

    def velocity_spread(self, tau_bar: float) -> float:
        return 2 * abs(self.speed) if self.agents > 1 else 0.0

    def to_dict(self) -> dict[str, Any]:
        return {"family": self.family, "speed": self.speed, "spacing": self.spacing}


INITIAL_FAMILIES: dict[str, type[InitialData]] = {
    cls.family: cls
    for cls in (ConstantInitial, LinearInitial, SampledInitial, RandomInitial, AlternatingInitial)
}
