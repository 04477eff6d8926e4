from __future__ import annotations

import dataclasses as dc
import math
import warnings
from pathlib import Path
from typing import TYPE_CHECKING, Any, NamedTuple

import numpy as np

from flockdelay import signals
from flockdelay.bounds import checks
from flockdelay.bounds.constants import (
    PositionIntegral,
    contraction_constants,
    decay_rate,
    phi_lower_bound,
    position_bound,
)
from flockdelay.bounds.diameters import diameter_sequence, initial_constants
from flockdelay.bounds.lyapunov import LyapunovSeries, energy, lyapunov_series
from flockdelay.bounds.series import TIME_TOLERANCE, TrajectorySeries, build_series
from flockdelay.exceptions import ConfigError, ResolutionWarning
from flockdelay.termui import logger
from flockdelay.utils import dump_json

if TYPE_CHECKING:
    from flockdelay._types import FloatArray
    from flockdelay.bounds.checks import CheckResult
    from flockdelay.history import TrajectoryHistory
    from flockdelay.models.influence import InfluenceFunction
    from flockdelay.models.system import SystemConfig

#: relative change of the diameters between stride k and 2k that flags a coarse record
RESOLUTION_THRESHOLD = 1e-3


@dc.dataclass(frozen=True)
class CheckSettings:
    enabled: tuple[str, ...] = checks.ALL_CHECKS
    envelope_scale: float = 1.0
    align_tolerance: float | None = None
    max_diameter: float | None = None
    directions: int = 8
    seed: int = 0

    def __post_init__(self) -> None:
        unknown = sorted(set(self.enabled) - set(checks.ALL_CHECKS))
        if unknown:
            raise ConfigError(f"unknown checks: {', '.join(unknown)}")
        if not self.envelope_scale > 0:
            raise ConfigError(f"envelope_scale must be positive, got {self.envelope_scale}")
        if self.align_tolerance is not None and self.align_tolerance < 0:
            raise ConfigError(f"align_tolerance must be nonnegative, got {self.align_tolerance}")
        if self.max_diameter is not None and self.max_diameter < 0:
            raise ConfigError(f"max_diameter must be nonnegative, got {self.max_diameter}")

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "enabled": "all" if set(self.enabled) == set(checks.ALL_CHECKS) else list(self.enabled),
            "envelope_scale": self.envelope_scale,
        }
        if self.align_tolerance is not None:
            data["align_tolerance"] = self.align_tolerance
        if self.max_diameter is not None:
            data["max_diameter"] = self.max_diameter
        return data


class FlockingVerdict(NamedTuple):
    position_bounded: bool
    velocity_aligned: bool


@dc.dataclass(eq=False)
class DiagnosticsReport:
    """Constants, sequences, check outcomes and verdicts of one run."""

    model: str
    constants: dict[str, Any]
    sequences: dict[str, FloatArray]
    checks: list[CheckResult]
    series: TrajectorySeries
    lyapunov: LyapunovSeries | None = None
    verdict: FlockingVerdict = FlockingVerdict(False, False)
    resolution: dict[str, Any] = dc.field(default_factory=dict)

    def check(self, name: str) -> CheckResult:
        for result in self.checks:
            if result.name == name:
                return result
        raise KeyError(name)

    @property
    def failed(self) -> list[str]:
        return [result.name for result in self.checks if not result.passed]

    @property
    def passed(self) -> bool:
        return not self.failed

    def to_dict(self) -> dict[str, Any]:
        return {
            "model": self.model,
            "constants": self.constants,
            "sequences": self.sequences,
            "checks": {result.name: result.to_dict() for result in self.checks},
            "verdict": self.verdict._asdict(),
            "resolution": self.resolution,
            "t_end": self.series.t_end,
        }

    def write_json(self, path: str | Path) -> None:
        dump_json(self.to_dict(), path)

    def write_series_csv(self, path: str | Path) -> None:
        """One row per record time: t, d_x, d_v, E and W (nan where W is undefined)."""
        series = self.series
        rows = np.full((len(series.times), 5), np.nan)
        rows[:, 0], rows[:, 1], rows[:, 2] = series.times, series.d_x, series.d_v
        if self.lyapunov is not None and len(self.lyapunov):
            count = len(self.lyapunov)
            rows[:count, 3] = self.lyapunov.energy
            rows[:count, 4] = self.lyapunov.functional
        np.savetxt(Path(path), rows, fmt="%.17g", delimiter=",", header="t,d_x,d_v,energy,functional", comments="")


def flocking_verdict(
    series: TrajectorySeries, d0: float, max_diameter: float | None = None, align_tolerance: float | None = None
) -> FlockingVerdict:
    """Position boundedness and velocity alignment as observed on the record."""
    threshold = math.inf if max_diameter is None else max_diameter
    overall = float(series.d_x.max())
    last_quarter = series.times >= 0.75 * series.t_end
    bounded = overall <= threshold and float(series.d_x[last_quarter].max()) <= overall
    tolerance = 1e-6 * d0 if align_tolerance is None else align_tolerance
    return FlockingVerdict(bounded, float(series.d_v[-1]) <= tolerance)


def empirical_rate(series: TrajectorySeries, d0: float) -> float | None:
    """Slope of a least squares fit of -log d_V(t) over t >= 0."""
    start = series.start
    times, d_v = series.times[start:], series.d_v[start:]
    usable = d_v > max(1e-12 * d0, 1e-300)
    if usable.sum() < 2:
        return None
    slope, _ = np.polyfit(times[usable], np.log(d_v[usable]), 1)
    return float(-slope)


def _window_ends(series: TrajectorySeries, window: float, count: int) -> FloatArray:
    return np.array([series.d_v[series.index_at(n * window)] for n in range(count)])


def build_report(
    cfg: SystemConfig, history: TrajectoryHistory, settings: CheckSettings | None = None, stride: int = 1
) -> DiagnosticsReport:
    """Compute every constant and run the enabled checks against ``history``."""
    settings = settings or CheckSettings()
    enabled = set(settings.enabled)
    tau_bar, psi, sup_norm = cfg.tau_bar, cfg.influence, cfg.sup_norm
    initial = initial_constants(cfg)
    velocity_bound, position_spread, d0 = initial
    window, alpha_tilde = cfg.schedule.window, cfg.schedule.alpha_tilde
    anchors = [] if window is None else [n * window for n in range(int(cfg.t_end / window + TIME_TOLERANCE) + 1)]
    series = build_series(history, stride, anchors, cfg.h_step)
    offset = tau_bar * velocity_bound + position_spread
    observed = float(series.d_x.max())

    constants: dict[str, Any] = {
        "sup_norm": sup_norm,
        "tau_bar": tau_bar,
        "velocity_bound": velocity_bound,
        "position_spread": position_spread,
        "d0": d0,
        "observed_max_position_diameter": observed,
        "observed_position_bound": offset + observed,
        "empirical_rate": empirical_rate(series, d0),
    }
    sequences: dict[str, FloatArray] = {}
    results: list[CheckResult] = []
    lyapunov = None
    resolution: dict[str, Any] = {}

    if "velocity_bound" in enabled:
        results.append(checks.check_velocity_bound(series, velocity_bound))

    if window is None or alpha_tilde is None:
        for name in checks.THEORY_CHECKS:
            if name in enabled:
                results.append(checks.CheckResult.unavailable(name, "no persistence declaration"))
    else:
        constants.update(window=window, alpha_tilde=alpha_tilde)
        diameters = diameter_sequence(series, window, tau_bar)
        count = len(diameters)
        d_v_at_ends = _window_ends(series, window, count)
        running = np.maximum.accumulate(series.d_x)
        reach = [running[series.index_at(n * window)] for n in range(count)]
        phi = np.array([phi_lower_bound(psi, offset + r) for r in reach])
        pairs = [contraction_constants(sup_norm, window, tau_bar, alpha_tilde, p) for p in phi]
        star = np.array([pair.star for pair in pairs])
        full = np.array([pair.full for pair in pairs])
        sequences.update(diameters=diameters, d_v_at_window_ends=d_v_at_ends, phi=phi, c_star=star, c=full)

        phi_hat = phi_lower_bound(psi, offset + observed)
        c_hat = contraction_constants(sup_norm, window, tau_bar, alpha_tilde, phi_hat).full
        rate = decay_rate(c_hat, window)
        constants.update(phi_hat=phi_hat, c_hat=c_hat, mu=rate)

        integral = PositionIntegral(psi, window, tau_bar, alpha_tilde)
        constants.update(
            _rigorous_constants(
                series, diameters, full, window, integral, offset, psi, sup_norm, tau_bar, alpha_tilde
            )
        )

        if "diameter_window_bound" in enabled:
            results.append(checks.check_window_bound(series, diameters, window, tau_bar))
        sequence_results = checks.check_sequence_properties(diameters, full, d_v_at_ends, sup_norm, window)
        results.extend(result for result in sequence_results if result.name in enabled)
        if "two_step_estimate" in enabled:
            results.append(checks.check_two_step_estimate(diameters, star, d_v_at_ends))
        if "decay_envelope" in enabled:
            results.append(checks.check_decay_envelope(series, d0, rate, window, settings.envelope_scale))
        if "lyapunov_monotone" in enabled:
            lyapunov = lyapunov_series(series, diameters, full, window, integral, offset)
            results.append(checks.check_lyapunov_monotone(lyapunov, window))

        resolution = _resolution_sensitivity(history, stride, anchors, cfg.h_step, window, tau_bar, diameters)

    if enabled & {"delayed_distance", "rate_floor"}:
        largest, smallest_rate = checks.delayed_distances(cfg, history, series)
        if "delayed_distance" in enabled:
            results.append(checks.check_delayed_distance(series, largest, velocity_bound, position_spread, tau_bar))
        if "rate_floor" in enabled:
            results.append(
                checks.check_rate_floor(series, smallest_rate, psi, velocity_bound, position_spread, tau_bar)
            )
    if "half_space_invariance" in enabled:
        results.append(
            checks.check_half_space_invariance(
                series, tau_bar, velocity_bound, count=max(settings.directions, cfg.dim), seed=settings.seed
            )
        )
    if "diameter_growth" in enabled:
        results.append(checks.check_diameter_growth(series, sup_norm, d0))

    order = {name: index for index, name in enumerate(checks.ALL_CHECKS)}
    results.sort(key=lambda result: order[result.name])
    report = DiagnosticsReport(
        model=cfg.delay.kind,
        constants=constants,
        sequences=sequences,
        checks=results,
        series=series,
        lyapunov=lyapunov,
        verdict=flocking_verdict(series, d0, settings.max_diameter, settings.align_tolerance),
        resolution=resolution,
    )
    for result in results:
        if not result.passed:
            logger.info("Check %s failed: worst margin %g at %s", result.name, result.worst_margin, result.at)
    signals.post_report.send(cfg, report=report)
    return report


def _rigorous_constants(
    series: TrajectorySeries,
    diameters: FloatArray,
    contraction: FloatArray,
    window: float,
    integral: PositionIntegral,
    offset: float,
    psi: InfluenceFunction,
    sup_norm: float,
    tau_bar: float,
    alpha_tilde: float,
) -> dict[str, Any]:
    """The a priori position bound d* from W(2T) and the decay rate it implies.

    Needs the record to reach 8T, where U(2T) and D_6 are known.
    """
    if len(diameters) <= 6 or series.t_end < 8 * window - TIME_TOLERANCE:
        return {"position_bound": None, "mu_rigorous": None}
    running = np.maximum.accumulate(series.d_x)
    start = offset + float(running[series.index_at(8 * window)])
    budget = window * float(energy(np.array([2 * window]), diameters, contraction, window)[0])
    budget += integral.prefactor * integral(start)
    bound = position_bound(integral, budget, start)
    if not math.isfinite(bound):
        return {"position_bound": math.inf, "mu_rigorous": None}
    phi_star = phi_lower_bound(psi, bound)
    c_star = contraction_constants(sup_norm, window, tau_bar, alpha_tilde, phi_star).full
    return {"position_bound": bound, "mu_rigorous": decay_rate(c_star, window)}


def _resolution_sensitivity(
    history: TrajectoryHistory,
    stride: int,
    anchors: list[float],
    spacing: float,
    window: float,
    tau_bar: float,
    diameters: FloatArray,
) -> dict[str, Any]:
    coarse = diameter_sequence(build_series(history, 2 * stride, anchors, spacing), window, tau_bar)
    count = min(len(coarse), len(diameters))
    scale = max(float(diameters[0]), 1e-300)
    change = float(np.max(np.abs(diameters[:count] - coarse[:count]))) / scale if count else 0.0
    flagged = change > RESOLUTION_THRESHOLD
    if flagged:
        warnings.warn(
            f"generalized diameters change by {change:.3g} (relative) at half the record resolution",
            ResolutionWarning,
            stacklevel=2,
        )
    return {"relative_change": change, "flagged": flagged, "stride": stride}
