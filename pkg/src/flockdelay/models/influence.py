"""Influence functions: the positive, bounded, continuous pairwise weight psi(r)."""

from __future__ import annotations

import abc
import dataclasses as dc
import math
from functools import cached_property
from typing import TYPE_CHECKING, ClassVar

import numpy as np

from flockdelay.exceptions import ConfigError, DomainError

if TYPE_CHECKING:
    from typing import Any

    from numpy.typing import ArrayLike

    from flockdelay._types import FloatArray


class InfluenceFunction(abc.ABC):
    """Base class of influence function families.

    Calling an instance evaluates psi elementwise on an array of distances.
    """

    family: ClassVar[str]

    @abc.abstractmethod
    def __call__(self, r: ArrayLike) -> FloatArray: ...

    @property
    @abc.abstractmethod
    def sup_norm(self) -> float:
        """K, the supremum of psi over [0, inf)."""

    @property
    @abc.abstractmethod
    def diverges(self) -> bool:
        """Whether the integral over x of min_{[0, x]} psi is infinite."""

    @abc.abstractmethod
    def min_on(self, upper: float) -> float:
        """Minimum of psi on the closed interval [0, upper]."""

    def to_dict(self) -> dict[str, Any]:
        return {"family": self.family, **dc.asdict(self)}  # type: ignore[call-overload]


@dc.dataclass(frozen=True)
class ConstantInfluence(InfluenceFunction):
    family: ClassVar[str] = "constant"

    k: float = 1.0

    def __post_init__(self) -> None:
        if not self.k > 0:
            raise ConfigError(f"constant influence must be positive, got {self.k}")

    def __call__(self, r: ArrayLike) -> FloatArray:
        return np.full(np.shape(r), self.k, dtype=float)

    @property
    def sup_norm(self) -> float:
        return self.k

    @property
    def diverges(self) -> bool:
        return True

    def min_on(self, upper: float) -> float:
        return self.k


@dc.dataclass(frozen=True)
class PowerLawInfluence(InfluenceFunction):
    """K / (1 + r^2)^gamma"""

    family: ClassVar[str] = "power-law"

    k: float = 1.0
    gamma: float = 0.5

    def __post_init__(self) -> None:
        if not self.k > 0:
            raise ConfigError(f"power-law influence needs k > 0, got {self.k}")
        if self.gamma < 0:
            raise ConfigError(f"power-law influence needs gamma >= 0, got {self.gamma}")

    def __call__(self, r: ArrayLike) -> FloatArray:
        r = np.asarray(r, dtype=float)
        return self.k / np.power(1.0 + r * r, self.gamma)

    @property
    def sup_norm(self) -> float:
        return self.k

    @property
    def diverges(self) -> bool:
        # min over [0, x] is psi(x) ~ x^(-2 gamma)
        return self.gamma <= 0.5

    def min_on(self, upper: float) -> float:
        return float(self(upper))


@dc.dataclass(frozen=True)
class OscillatingInfluence(InfluenceFunction):
    """a + b * sin^2(omega r) with a > 0 and b >= 0"""

    family: ClassVar[str] = "oscillating"

    a: float = 1.0
    b: float = 0.0
    omega: float = 1.0

    def __post_init__(self) -> None:
        if not self.a > 0:
            raise ConfigError(f"oscillating influence needs a > 0, got {self.a}")
        if self.b < 0:
            raise ConfigError(f"oscillating influence needs b >= 0, got {self.b}")

    def __call__(self, r: ArrayLike) -> FloatArray:
        r = np.asarray(r, dtype=float)
        return self.a + self.b * np.sin(self.omega * r) ** 2

    @property
    def sup_norm(self) -> float:
        return self.a + (self.b if self.omega != 0 else 0.0)

    @property
    def diverges(self) -> bool:
        return True

    def min_on(self, upper: float) -> float:
        if self.omega == 0 or self.b == 0:
            return self.a
        # critical points of sin^2 sit at k*pi/(2*omega); one period holds two of them
        step = math.pi / (2 * abs(self.omega))
        count = min(int(upper // step), 2)
        candidates = np.append(np.arange(count + 1) * step, upper)
        return float(self(candidates).min())


@dc.dataclass(frozen=True)
class TabulatedInfluence(InfluenceFunction):
    """Piecewise linear interpolation of sorted ``(r, value)`` knots.

    Outside the knot range the nearest end value is kept.
    """

    family: ClassVar[str] = "tabulated"

    knots: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        knots = tuple((float(r), float(value)) for r, value in self.knots)
        if not knots:
            raise ConfigError("tabulated influence needs at least one knot")
        radii = [r for r, _ in knots]
        if any(b <= a for a, b in zip(radii, radii[1:])):
            raise ConfigError("tabulated influence knots must be strictly increasing in r")
        if radii[0] < 0:
            raise ConfigError("tabulated influence knots must have r >= 0")
        if any(value <= 0 for _, value in knots):
            raise ConfigError("tabulated influence values must be positive")
        object.__setattr__(self, "knots", knots)

    @cached_property
    def _radii(self) -> FloatArray:
        return np.array([r for r, _ in self.knots])

    @cached_property
    def _values(self) -> FloatArray:
        return np.array([value for _, value in self.knots])

    def __call__(self, r: ArrayLike) -> FloatArray:
        return np.interp(np.asarray(r, dtype=float), self._radii, self._values)

    @property
    def sup_norm(self) -> float:
        return float(self._values.max())

    @property
    def diverges(self) -> bool:
        return True

    def min_on(self, upper: float) -> float:
        inside = self._radii[self._radii <= upper]
        return float(self(np.concatenate([[0.0, upper], inside])).min())

    def to_dict(self) -> dict[str, Any]:
        return {"family": self.family, "knots": [list(knot) for knot in self.knots]}


INFLUENCE_FAMILIES: dict[str, type[InfluenceFunction]] = {
    cls.family: cls for cls in (ConstantInfluence, PowerLawInfluence, OscillatingInfluence, TabulatedInfluence)
}


def eval_influence(psi: InfluenceFunction, r: float) -> float:
    """Evaluate psi at a single nonnegative distance."""
    if r < 0:
        raise DomainError(f"influence is evaluated at a distance, got r = {r}")
    return float(psi(r))


def communication_rate(psi: InfluenceFunction, n_agents: int, x_self: ArrayLike, x_other_delayed: ArrayLike) -> float:
    """psi(|x_self - x_other_delayed|) / (N - 1)"""
    if n_agents < 2:
        raise ConfigError(f"communication rates need at least 2 agents, got {n_agents}")
    distance = float(np.linalg.norm(np.asarray(x_self, dtype=float) - np.asarray(x_other_delayed, dtype=float)))
    return eval_influence(psi, distance) / (n_agents - 1)


def classify_infint(psi: InfluenceFunction) -> bool:
    return psi.diverges
