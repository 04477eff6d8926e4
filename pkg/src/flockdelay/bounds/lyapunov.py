from __future__ import annotations

import dataclasses as dc
from typing import TYPE_CHECKING

import numpy as np

from flockdelay.bounds.series import TIME_TOLERANCE

if TYPE_CHECKING:
    from flockdelay._types import FloatArray
    from flockdelay.bounds.constants import PositionIntegral
    from flockdelay.bounds.series import TrajectorySeries


@dc.dataclass(frozen=True, eq=False)
class LyapunovSeries:
    """The energy E(t) and the functional W(t) on the part of the record where both are defined.

    ``seam_flags`` lists the seams t = nT, n <= 2, where E jumps upward.
    """

    times: FloatArray
    energy: FloatArray
    functional: FloatArray
    offset: FloatArray
    seam_flags: list[float] = dc.field(default_factory=list)

    def __len__(self) -> int:
        return len(self.times)

    def value_at(self, t: float) -> float:
        return float(np.interp(t, self.times, self.functional))


def evaluation_limit(t_end: float, window: float, n_diameters: int, n_constants: int) -> float:
    """Largest t where E(t) only needs D_{3n} and C_{3n+2} that the record provides."""
    by_time = (t_end - 2 * window) / 3
    last_n = min((n_diameters - 1) // 3, (n_constants - 3) // 3)
    return min(by_time, (last_n + 1) * window - TIME_TOLERANCE)


def energy(times: FloatArray, diameters: FloatArray, contraction: FloatArray, window: float) -> FloatArray:
    """E = D_0 before 2T, D_{3n} (1 - C_{3n+2} (t - nT) / T) on [nT, (n + 1)T) afterwards."""
    n = np.floor(times / window + TIME_TOLERANCE).astype(int)
    values = np.full(len(times), float(diameters[0]))
    late = n >= 2
    if late.any():
        m = n[late]
        values[late] = diameters[3 * m] * (1 - contraction[3 * m + 2] / window * (times[late] - m * window))
    return values


def lyapunov_series(
    series: TrajectorySeries,
    diameters: FloatArray,
    contraction: FloatArray,
    window: float,
    integral: PositionIntegral,
    offset: float,
) -> LyapunovSeries:
    """Evaluate W(t) = T E(t) + e^{-KT}/3 G(U(t)) on the record.

    Args:
        series: the recorded trajectory
        diameters: D_0, D_1, ...
        contraction: C_0, C_1, ... (gamma_n for the distributed model)
        window: the persistence window T
        integral: G for the system's psi, T, tau_bar and alpha_tilde
        offset: tau_bar C_0 + M_0, so that U(t) = offset + max_{s <= 3t + 2T} d_X(s)
    """
    limit = evaluation_limit(series.t_end, window, len(diameters), len(contraction))
    keep = series.times <= limit + TIME_TOLERANCE
    times = series.times[keep]
    running = np.maximum.accumulate(series.d_x)
    reach = np.searchsorted(series.times, 3 * times + 2 * window + TIME_TOLERANCE, side="right") - 1
    upper = offset + running[np.clip(reach, 0, len(running) - 1)]
    values = energy(times, diameters, contraction, window)
    functional = window * values + integral.prefactor * integral.cumulative(upper)
    flags = []
    if len(diameters) > 6 and diameters[6] > diameters[0] * (1 + 1e-8):
        flags.append(2 * window)
    return LyapunovSeries(times, values, functional, upper, flags)
