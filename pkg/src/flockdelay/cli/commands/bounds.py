from __future__ import annotations

import argparse
import json
from typing import TYPE_CHECKING

from flockdelay.cli.actions import a_priori_constants
from flockdelay.cli.commands.base import BaseCommand
from flockdelay.cli.options import scenario_argument, verbose_option
from flockdelay.cli.utils import format_number
from flockdelay.utils import jsonable

if TYPE_CHECKING:
    from flockdelay.workspace import Workspace


class Command(BaseCommand):
    """Show the a priori constants of a scenario without integrating it"""

    arguments = (verbose_option, scenario_argument)

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--json", action="store_true", help="Output the constants in JSON format")

    def handle(self, workspace: Workspace, options: argparse.Namespace) -> None:
        scenario = workspace.load_scenario(options.scenario)
        constants = a_priori_constants(scenario)
        if options.json:
            workspace.ui.echo(json.dumps(jsonable(constants), indent=2, sort_keys=True))
            return
        workspace.ui.display_columns([[f"[primary]{key}[/]", format_number(value)] for key, value in constants.items()])
