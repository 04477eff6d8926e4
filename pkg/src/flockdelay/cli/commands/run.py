from __future__ import annotations

import argparse
from typing import TYPE_CHECKING

from flockdelay import termui
from flockdelay.cli.actions import ensure_passed, run_scenario
from flockdelay.cli.commands.base import BaseCommand
from flockdelay.cli.options import output_option, scenario_argument, stride_option, verbose_option
from flockdelay.cli.utils import check_rows, format_number

if TYPE_CHECKING:
    from flockdelay.workspace import Workspace


class Command(BaseCommand):
    """Integrate a scenario and certify the trajectory against the flocking bounds"""

    arguments = (verbose_option, output_option, stride_option, scenario_argument)

    def handle(self, workspace: Workspace, options: argparse.Namespace) -> None:
        ui = workspace.ui
        scenario = workspace.load_scenario(options.scenario)
        out_dir = workspace.run_dir(scenario, options.out)
        with ui.make_progress() as progress:
            report = run_scenario(workspace, scenario, out_dir, options.stride, progress=progress)
        ui.display_columns(check_rows(report.checks), header=["", "check", ">worst margin", ">at", "detail"])
        verdict = report.verdict
        ui.echo(
            f"position bounded: [primary]{verdict.position_bounded}[/], "
            f"velocity aligned: [primary]{verdict.velocity_aligned}[/], "
            f"mu: [primary]{format_number(report.constants.get('mu'))}[/]"
        )
        ui.echo(f"Artifacts written to [success]{out_dir}[/]", verbosity=termui.Verbosity.NORMAL)
        ensure_passed(report)
