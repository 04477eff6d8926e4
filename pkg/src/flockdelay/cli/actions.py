from __future__ import annotations

import csv
import functools
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import TYPE_CHECKING

import numpy as np
from rich.progress import BarColumn, MofNCompleteColumn, TextColumn

from flockdelay import integrator, signals, termui
from flockdelay.bounds.constants import contraction_constants, decay_rate, phi_lower_bound
from flockdelay.bounds.diameters import diameters, initial_constants
from flockdelay.bounds.report import build_report
from flockdelay.exceptions import ChecksFailed, FlockException, IntegrationError
from flockdelay.scenario import derive_point, dump_scenario
from flockdelay.termui import logger
from flockdelay.utils import dump_json
from flockdelay.workspace import slugify

if TYPE_CHECKING:
    from pathlib import Path
    from typing import Any

    from rich.progress import Progress

    from flockdelay.bounds.report import DiagnosticsReport
    from flockdelay.scenario import Scenario
    from flockdelay.workspace import Workspace

SUMMARY_COLUMNS = (
    "point",
    "status",
    "mu",
    "final_d_v",
    "position_bounded",
    "velocity_aligned",
    "failed_checks",
    "error",
)


def run_scenario(
    workspace: Workspace,
    scenario: Scenario,
    out_dir: Path,
    stride: int | None = None,
    progress: Progress | None = None,
) -> DiagnosticsReport:
    """Integrate ``scenario``, certify the trajectory and write every artifact to ``out_dir``.

    Writes ``scenario.toml``, ``trajectory.csv``, ``diagnostics.json`` and ``series.csv``,
    or ``failure.json`` when the integrator aborts.
    """
    cfg = scenario.system
    stride = workspace.record_stride(scenario, stride)
    out_dir.mkdir(parents=True, exist_ok=True)
    dump_scenario(scenario, out_dir / "scenario.toml")

    callback = None
    if progress is not None:
        task = progress.add_task(scenario.name, total=cfg.t_end)
        callback = functools.partial(_advance, progress, task)
    try:
        history = integrator.run(cfg, callback=callback)
    except IntegrationError as e:
        dump_json({"scenario": scenario.name, "error": str(e), "time": e.time}, out_dir / "failure.json")
        raise
    finally:
        if progress is not None:
            progress.remove_task(task)

    history.to_csv(out_dir / "trajectory.csv", stride)
    report = build_report(cfg, history, scenario.checks, stride)
    report.write_json(out_dir / "diagnostics.json")
    report.write_series_csv(out_dir / "series.csv")
    logger.info("Artifacts of %s written to %s", scenario.name, out_dir)
    return report


def _advance(progress: Progress, task: Any, t: float) -> None:
    progress.update(task, completed=t)


def _summary_row(label: str, report: DiagnosticsReport) -> dict[str, Any]:
    return {
        "point": label,
        "status": "passed" if report.passed else "failed",
        "mu": report.constants.get("mu"),
        "final_d_v": float(report.series.d_v[-1]),
        "position_bounded": report.verdict.position_bounded,
        "velocity_aligned": report.verdict.velocity_aligned,
        "failed_checks": ";".join(report.failed),
        "error": "",
    }


def run_sweep(
    workspace: Workspace,
    scenario: Scenario,
    out_dir: Path,
    workers: int | None = None,
    stride: int | None = None,
) -> list[dict[str, Any]]:
    """Run every grid point of the sweep, one subdirectory each, and write ``summary.csv``.

    Grid points that cannot be built or whose integration aborts are recorded
    in the summary rather than stopping the sweep.
    """
    ui = workspace.ui
    points = scenario.sweep.points()
    axes = scenario.sweep.names
    workers = workers or workspace.config["sweep.workers"]
    out_dir.mkdir(parents=True, exist_ok=True)
    dump_scenario(scenario, out_dir / "scenario.toml")
    ui.echo(
        f"Sweeping [primary]{len(points)}[/] grid points with {workers} worker(s)", verbosity=termui.Verbosity.DETAIL
    )

    def run_point(index: int, point: dict[str, Any]) -> dict[str, Any]:
        label = "_".join(f"{axis}={value:g}" for axis, value in point.items())
        row: dict[str, Any]
        derived = scenario
        try:
            derived = derive_point(scenario, point)
            report = run_scenario(workspace, derived, out_dir / slugify(f"{index:03d}_{label}"), stride)
        except FlockException as e:
            logger.info("Grid point %s did not complete: %s", label, e)
            status = "aborted" if isinstance(e, IntegrationError) else "invalid"
            row = {"point": label, "status": status, "error": str(e)}
        else:
            row = _summary_row(label, report)
        row.update(point)
        signals.post_sweep_point.send(derived, summary=row)
        return row

    rows: list[dict[str, Any] | None] = [None] * len(points)
    columns = (TextColumn("{task.description}"), BarColumn(), MofNCompleteColumn())
    with ui.make_progress(*columns) as progress, ThreadPoolExecutor(max_workers=workers) as executor:
        task = progress.add_task("Sweeping", total=len(points))
        futures = {executor.submit(run_point, index, point): index for index, point in enumerate(points)}
        for future in as_completed(futures):
            rows[futures[future]] = future.result()
            progress.advance(task)

    completed = [row for row in rows if row is not None]
    write_summary(out_dir / "summary.csv", completed, axes)
    return completed


def write_summary(path: Path, rows: list[dict[str, Any]], axes: list[str]) -> None:
    fields = [*axes, *SUMMARY_COLUMNS]
    with path.open("w", encoding="utf-8", newline="") as fp:
        writer = csv.DictWriter(fp, fieldnames=fields, restval="", extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({key: "" if value is None else _cell(value) for key, value in row.items()})


def _cell(value: Any) -> Any:
    if isinstance(value, float):
        return repr(value)
    return value


def ensure_passed(report: DiagnosticsReport) -> None:
    if report.failed:
        raise ChecksFailed(report.failed)


def a_priori_constants(scenario: Scenario) -> dict[str, Any]:
    """Constants computable before integrating: K, the initial constants, phi at t = 0
    and, with a persistence declaration, the contraction constants and rate at that phi."""
    cfg = scenario.system
    velocity_bound, position_spread, d0 = initial_constants(cfg)
    positions, velocities = cfg.initial.state(0.0)
    d_x0, _ = diameters(np.asarray(positions), np.asarray(velocities))
    phi0 = phi_lower_bound(cfg.influence, cfg.tau_bar * velocity_bound + position_spread + d_x0)
    result: dict[str, Any] = {
        "model": cfg.delay.kind,
        "sup_norm": cfg.sup_norm,
        "tau_bar": cfg.tau_bar,
        "velocity_bound": velocity_bound,
        "position_spread": position_spread,
        "d0": d0,
        "position_diameter_0": d_x0,
        "phi_0": phi0,
        "influence_diverges": cfg.influence.diverges,
    }
    schedule = cfg.schedule
    if schedule.window is not None and schedule.alpha_tilde is not None:
        pair = contraction_constants(cfg.sup_norm, schedule.window, cfg.tau_bar, schedule.alpha_tilde, phi0)
        result.update(
            window=schedule.window,
            alpha_tilde=schedule.alpha_tilde,
            c_star_0=pair.star,
            c_0=pair.full,
            mu_0=decay_rate(pair.full, schedule.window),
        )
    return result
