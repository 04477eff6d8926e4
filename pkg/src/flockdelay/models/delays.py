"""Delay specifications: pointwise lags and distributed lookback kernels."""

from __future__ import annotations

import abc
import dataclasses as dc
import math
from functools import lru_cache
from typing import TYPE_CHECKING, ClassVar, Union

import numpy as np
from numpy.polynomial.legendre import leggauss

from flockdelay.exceptions import ConfigError, KernelError

if TYPE_CHECKING:
    from typing import Any

    from numpy.typing import ArrayLike

    from flockdelay._types import FloatArray


class TimeFunction(abc.ABC):
    """A continuous nonnegative function of time used for lags."""

    family: ClassVar[str]

    @abc.abstractmethod
    def __call__(self, t: ArrayLike) -> FloatArray: ...

    @property
    @abc.abstractmethod
    def range(self) -> tuple[float, float]:
        """Lower and upper bound of the function over t >= 0."""

    @property
    def is_constant(self) -> bool:
        low, high = self.range
        return low == high

    def to_dict(self) -> dict[str, Any]:
        return {"family": self.family, **dc.asdict(self)}  # type: ignore[call-overload]


@dc.dataclass(frozen=True)
class ConstantDelay(TimeFunction):
    family: ClassVar[str] = "constant"

    value: float = 0.0

    def __call__(self, t: ArrayLike) -> FloatArray:
        return np.full(np.shape(t), self.value, dtype=float)

    @property
    def range(self) -> tuple[float, float]:
        return (self.value, self.value)


@dc.dataclass(frozen=True)
class SinusoidalDelay(TimeFunction):
    """mean + amplitude * sin(2 pi t / period)"""

    family: ClassVar[str] = "sinusoidal"

    mean: float
    amplitude: float
    period: float = 2 * math.pi

    def __post_init__(self) -> None:
        if not self.period > 0:
            raise ConfigError(f"sinusoidal delay needs a positive period, got {self.period}")

    def __call__(self, t: ArrayLike) -> FloatArray:
        t = np.asarray(t, dtype=float)
        return self.mean + self.amplitude * np.sin(2 * np.pi * t / self.period)

    @property
    def range(self) -> tuple[float, float]:
        spread = abs(self.amplitude)
        return (self.mean - spread, self.mean + spread)


TIME_FUNCTIONS: dict[str, type[TimeFunction]] = {cls.family: cls for cls in (ConstantDelay, SinusoidalDelay)}


class KernelWeight(abc.ABC):
    """The weight beta(s) of a distributed delay with its antiderivative."""

    family: ClassVar[str]

    @abc.abstractmethod
    def __call__(self, s: ArrayLike) -> FloatArray: ...

    @abc.abstractmethod
    def antiderivative(self, s: ArrayLike) -> FloatArray:
        """A primitive of beta, zero at s = 0."""

    def to_dict(self) -> dict[str, Any]:
        return {"family": self.family, **dc.asdict(self)}  # type: ignore[call-overload]


@dc.dataclass(frozen=True)
class ConstantWeight(KernelWeight):
    family: ClassVar[str] = "constant"

    value: float = 1.0

    def __call__(self, s: ArrayLike) -> FloatArray:
        return np.full(np.shape(s), self.value, dtype=float)

    def antiderivative(self, s: ArrayLike) -> FloatArray:
        return self.value * np.asarray(s, dtype=float)


@dc.dataclass(frozen=True)
class LinearWeight(KernelWeight):
    """intercept + slope * s"""

    family: ClassVar[str] = "linear"

    slope: float = 0.0
    intercept: float = 1.0

    def __call__(self, s: ArrayLike) -> FloatArray:
        return self.intercept + self.slope * np.asarray(s, dtype=float)

    def antiderivative(self, s: ArrayLike) -> FloatArray:
        s = np.asarray(s, dtype=float)
        return self.intercept * s + 0.5 * self.slope * s * s


@dc.dataclass(frozen=True)
class ExponentialWeight(KernelWeight):
    """exp(-rate * s)"""

    family: ClassVar[str] = "exponential"

    rate: float = 1.0

    def __call__(self, s: ArrayLike) -> FloatArray:
        return np.exp(-self.rate * np.asarray(s, dtype=float))

    def antiderivative(self, s: ArrayLike) -> FloatArray:
        s = np.asarray(s, dtype=float)
        if self.rate == 0:
            return s
        return -np.expm1(-self.rate * s) / self.rate


KERNEL_WEIGHTS: dict[str, type[KernelWeight]] = {
    cls.family: cls for cls in (ConstantWeight, LinearWeight, ExponentialWeight)
}


@lru_cache(maxsize=32)
def gauss_legendre(nodes: int) -> tuple[FloatArray, FloatArray]:
    """Gauss-Legendre abscissae and weights on [-1, 1]."""
    if nodes < 1:
        raise ConfigError(f"quadrature needs at least one node, got {nodes}")
    return leggauss(nodes)


@dc.dataclass(frozen=True)
class DistributedDelayKernel:
    """Lookback window [t - tau2(t), t - tau1(t)] weighted by beta(t - s)."""

    tau1: TimeFunction
    tau2: TimeFunction
    beta: KernelWeight
    nodes: int = 8

    def window(self, t: float, lower: float = 0.0, upper: float = math.inf) -> tuple[float, float]:
        """The lag interval [tau1(t), tau2(t)] clamped to ``[lower, upper]``."""
        low = min(max(float(self.tau1(t)), lower), upper)
        high = min(max(float(self.tau2(t)), lower), upper)
        if low >= high:
            raise KernelError(f"empty lookback window at t = {t}: tau1 = {low}, tau2 = {high}")
        return low, high

    def normalizer(self, t: float, lower: float = 0.0, upper: float = math.inf) -> float:
        """h(t), the integral of beta over [tau1(t), tau2(t)]."""
        low, high = self.window(t, lower, upper)
        h = float(self.beta.antiderivative(high) - self.beta.antiderivative(low))
        if not h > 0:
            raise KernelError(f"kernel normalizer is not positive at t = {t}: h = {h}")
        return h

    def quadrature(self, t: float, lower: float = 0.0, upper: float = math.inf) -> tuple[FloatArray, FloatArray]:
        """Lags and weights such that sum(w * f(t - lag)) integrates beta(t - s) f(s) ds."""
        low, high = self.window(t, lower, upper)
        abscissae, weights = gauss_legendre(self.nodes)
        half = 0.5 * (high - low)
        lags = low + half * (abscissae + 1.0)
        return lags, half * weights * self.beta(lags)

    def to_dict(self) -> dict[str, Any]:
        return {
            "tau1": self.tau1.to_dict(),
            "tau2": self.tau2.to_dict(),
            "weight": self.beta.to_dict(),
            "nodes": self.nodes,
        }


@dc.dataclass(frozen=True)
class PointwiseDelay:
    """A single lag tau(t), clamped to [0, tau_bar]."""

    kind: ClassVar[str] = "pointwise"

    tau: TimeFunction
    tau_bar: float

    def __post_init__(self) -> None:
        if not self.tau_bar >= 0:
            raise ConfigError(f"tau_bar must be nonnegative, got {self.tau_bar}")

    def lag(self, t: ArrayLike) -> FloatArray:
        return np.clip(self.tau(t), 0.0, self.tau_bar)

    def discontinuity_times(self, horizon: float, limit: int = 10_000) -> list[float]:
        """Propagated derivative jumps t = k * tau for a constant positive lag."""
        if not self.tau.is_constant:
            return []
        lag = float(self.lag(0.0))
        if lag <= 0 or horizon / lag > limit:
            return []
        return [k * lag for k in range(1, int(horizon / lag) + 1)]

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "tau_bar": self.tau_bar, "tau": self.tau.to_dict()}


@dc.dataclass(frozen=True)
class DistributedDelay:
    """A distributed lookback kernel whose lags stay within [0, tau_bar]."""

    kind: ClassVar[str] = "distributed"

    kernel: DistributedDelayKernel
    tau_bar: float

    def __post_init__(self) -> None:
        if not self.tau_bar > 0:
            raise ConfigError(f"distributed delay needs tau_bar > 0, got {self.tau_bar}")
        grid = np.linspace(0.0, self.tau_bar, 1001)
        if not np.all(self.kernel.beta(grid) > 0):
            raise ConfigError("kernel weight beta must be strictly positive on [0, tau_bar]")

    def quadrature(self, t: float) -> tuple[FloatArray, FloatArray]:
        return self.kernel.quadrature(t, 0.0, self.tau_bar)

    def normalizer(self, t: float) -> float:
        return self.kernel.normalizer(t, 0.0, self.tau_bar)

    def validate(self, horizon: float, samples: int = 2001) -> None:
        """Check 0 <= tau1 < tau2 <= tau_bar on a dense grid of [0, horizon]."""
        grid = np.linspace(0.0, horizon, samples)
        tau1, tau2 = self.kernel.tau1(grid), self.kernel.tau2(grid)
        if np.any(tau1 < 0) or np.any(tau2 > self.tau_bar):
            raise ConfigError(f"distributed lags must stay within [0, {self.tau_bar}]")
        if np.any(tau1 >= tau2):
            bad = float(grid[np.argmax(tau1 >= tau2)])
            raise ConfigError(f"distributed lags need tau1 < tau2, violated at t = {bad:.6g}")

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "tau_bar": self.tau_bar, **self.kernel.to_dict()}


DelaySpec = Union[PointwiseDelay, DistributedDelay]
