from __future__ import annotations

import math
from typing import TYPE_CHECKING, NamedTuple

import numpy as np

from flockdelay.bounds.series import TIME_TOLERANCE
from flockdelay.exceptions import ConfigError, HistoryRangeError
from flockdelay.utils import cloud_diameter, pairwise_maximum

if TYPE_CHECKING:
    from flockdelay._types import FloatArray
    from flockdelay.bounds.series import TrajectorySeries
    from flockdelay.models.system import SystemConfig


class InitialConstants(NamedTuple):
    """Constants of the initial segment.

    For the distributed model the same quantities play the role of R_0^V, N_0^X and F_0.
    """

    velocity_bound: float
    position_spread: float
    d0: float


def diameters(positions: FloatArray, velocities: FloatArray) -> tuple[float, float]:
    """Position and velocity diameters of one snapshot."""
    if len(positions) < 2:
        raise ConfigError(f"diameters need at least 2 agents, got {len(positions)}")
    return pairwise_maximum(np.asarray(positions, dtype=float)), pairwise_maximum(np.asarray(velocities, dtype=float))


def generalized_diameter(series: TrajectorySeries, n: int, window: float, tau_bar: float) -> float:
    """D_n: the largest |v_i(s) - v_j(r)| over agents and samples s, r in [nT - tau_bar, nT]."""
    start, stop = n * window - tau_bar, n * window
    if stop > series.t_end + TIME_TOLERANCE * max(1.0, stop) or start < series.times[0] - TIME_TOLERANCE:
        raise HistoryRangeError(f"window [{start}, {stop}] is not covered by the record")
    lo, hi = series.window(start, stop)
    return cloud_diameter(series.velocities[lo : hi + 1].reshape(-1, series.velocities.shape[-1]))


def diameter_sequence(series: TrajectorySeries, window: float, tau_bar: float) -> FloatArray:
    """D_0, D_1, ... for every window ending before the end of the record."""
    last = math.floor(series.t_end / window + 1e-9)
    return np.array([generalized_diameter(series, n, window, tau_bar) for n in range(last + 1)])


def initial_constants(cfg: SystemConfig) -> InitialConstants:
    tau_bar = cfg.tau_bar
    return InitialConstants(
        cfg.initial.velocity_bound(tau_bar),
        cfg.initial.position_spread(tau_bar),
        cfg.initial.velocity_spread(tau_bar),
    )
