from __future__ import annotations

import argparse
from typing import TYPE_CHECKING, Any, Mapping

from flockdelay import termui
from flockdelay.cli.commands.base import BaseCommand
from flockdelay.config import Config
from flockdelay.exceptions import FlockUsageError

if TYPE_CHECKING:
    from flockdelay.workspace import Workspace


class Command(BaseCommand):
    """Display the current configuration"""

    ui: termui.UI

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("-d", "--delete", action="store_true", help="Unset a configuration key")
        parser.add_argument("key", help="Config key", nargs="?")
        parser.add_argument("value", help="Config value", nargs="?")

    def handle(self, workspace: Workspace, options: argparse.Namespace) -> None:
        self.ui = workspace.ui
        if options.delete:
            if not options.key:
                raise FlockUsageError("Specify the key to delete")
            del workspace.config[options.key]
        elif options.value:
            workspace.config[options.key] = options.value
        elif options.key:
            self.ui.echo(workspace.config[options.key])
        else:
            self._list_config(workspace)

    def _show_config(self, config: Mapping[str, Any], supersedes: Mapping[str, Any]) -> None:
        for key in sorted(config):
            if key not in Config._config_map:
                continue
            extra_style = "dim" if key in supersedes else None
            config_item = Config._config_map[key]
            self.ui.echo(
                f"[warning]# {config_item.description}",
                style=extra_style,
                verbosity=termui.Verbosity.DETAIL,
            )
            self.ui.echo(f"[primary]{key}[/] = {config[key]}", style=extra_style)

    def _list_config(self, workspace: Workspace) -> None:
        config = workspace.config
        self.ui.echo("Default configuration", style="bold")
        self._show_config(Config.get_defaults(), {**config.self_data, **config.env_map})
        if config.self_data:
            self.ui.echo(f"\nUser configuration ([success]{config.config_file}[/]):", style="bold")
            self._show_config(config.self_data, config.env_map)
        if config.env_map:
            self.ui.echo("\nEnvironment variables:", style="bold")
            self._show_config(config.env_map, {})
