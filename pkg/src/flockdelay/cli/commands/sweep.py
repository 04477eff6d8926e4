from __future__ import annotations

import argparse
from typing import TYPE_CHECKING

from flockdelay.cli.actions import run_sweep
from flockdelay.cli.commands.base import BaseCommand
from flockdelay.cli.options import output_option, scenario_argument, stride_option, verbose_option, workers_option
from flockdelay.cli.utils import format_number
from flockdelay.exceptions import ChecksFailed, FlockUsageError

if TYPE_CHECKING:
    from flockdelay.workspace import Workspace


class Command(BaseCommand):
    """Run every grid point of a scenario's sweep and write a summary table"""

    arguments = (verbose_option, output_option, stride_option, workers_option, scenario_argument)

    def handle(self, workspace: Workspace, options: argparse.Namespace) -> None:
        ui = workspace.ui
        scenario = workspace.load_scenario(options.scenario)
        if not scenario.sweep:
            raise FlockUsageError(f"Scenario {scenario.name!r} declares no [sweep] axes")
        out_dir = workspace.run_dir(scenario, options.out)
        rows = run_sweep(workspace, scenario, out_dir, options.workers, options.stride)
        axes = scenario.sweep.names
        ui.display_columns(
            [
                [*(format_number(row[axis]) for axis in axes), row["status"], format_number(row.get("mu"))]
                for row in rows
            ],
            header=[*(f">{axis}" for axis in axes), "status", ">mu"],
        )
        ui.echo(f"Summary written to [success]{out_dir / 'summary.csv'}[/]")
        failed = [row["point"] for row in rows if row["status"] != "passed"]
        if failed:
            raise ChecksFailed(failed)
