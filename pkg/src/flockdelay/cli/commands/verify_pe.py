from __future__ import annotations

import argparse
from typing import TYPE_CHECKING

from flockdelay.cli.commands.base import BaseCommand
from flockdelay.cli.options import scenario_argument, verbose_option
from flockdelay.exceptions import FlockUsageError, PersistenceError
from flockdelay.schedules import verify_pe

if TYPE_CHECKING:
    from flockdelay.workspace import Workspace


class Command(BaseCommand):
    """Verify a persistence of excitation pair against the scenario's weight schedule"""

    name = "verify-pe"
    arguments = (verbose_option, scenario_argument)

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("-T", "--window", type=float, help="Window length, defaults to the declared one")
        parser.add_argument("-a", "--alpha-tilde", type=float, help="Required integral, defaults to the declared one")
        parser.add_argument("--horizon", type=float, help="Verify starts up to horizon - window. Default: t_end")

    def handle(self, workspace: Workspace, options: argparse.Namespace) -> None:
        scenario, declared = workspace.load_undeclared(options.scenario)
        schedule = scenario.system.schedule
        window = options.window or declared.get("window")
        alpha_tilde = options.alpha_tilde or declared.get("alpha_tilde")
        if window is None or alpha_tilde is None:
            raise FlockUsageError("No persistence pair declared, pass --window and --alpha-tilde")
        horizon = options.horizon or max(scenario.system.t_end, window)
        result = verify_pe(schedule, window, alpha_tilde, horizon)
        workspace.ui.echo(
            f"worst window starts at t = [primary]{result.worst_start:.6g}[/] "
            f"and integrates to [primary]{result.worst_integral:.6g}[/] (required {alpha_tilde:g})"
        )
        if not result.passed:
            raise PersistenceError(f"(T={window:g}, alpha_tilde={alpha_tilde:g}) does not hold up to t = {horizon:g}")
        workspace.ui.echo(f"[success]Persistence of excitation holds[/] for T={window:g}, alpha_tilde={alpha_tilde:g}")
