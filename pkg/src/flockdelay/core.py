r"""
    ______           __       __     __
   / __/ /___  _____/ /______/ /__  / /___ ___  __
  / /_/ / __ \/ ___/ //_/ __  / _ \/ / __ `/ / / /
 / __/ / /_/ / /__/ ,< / /_/ /  __/ / /_/ / /_/ /
/_/ /_/\____/\___/_/|_|\__,_/\___/_/\__,_/\__, /
                                         /____/

Integrate delayed flocking systems under intermittent communication
and certify the trajectories against the flocking bounds.
"""

from __future__ import annotations

import argparse
import contextlib
import importlib
import os
import pkgutil
import sys
from importlib import metadata
from typing import TYPE_CHECKING, NoReturn, cast

from flockdelay import termui
from flockdelay.__version__ import __version__
from flockdelay.cli.options import verbose_option
from flockdelay.cli.utils import ArgumentParser, ErrorArgumentParser
from flockdelay.config import Config
from flockdelay.exceptions import FlockArgumentError, FlockUsageError
from flockdelay.workspace import Workspace

if TYPE_CHECKING:
    from typing import Any

    from flockdelay.cli.commands.base import BaseCommand
    from flockdelay.config import ConfigItem

COMMANDS_PACKAGE = "flockdelay.cli.commands"
PLUGIN_GROUP = "flockdelay.plugin"


class Core:
    """Owns the argument parser, the terminal UI and the registered commands.

    Plugins receive this object and may register commands or configuration items on it.
    """

    parser: argparse.ArgumentParser
    subparsers: argparse._SubParsersAction

    workspace_class = Workspace

    def __init__(self) -> None:
        self.version = __version__
        self.exit_stack = contextlib.ExitStack()
        self.ui = termui.UI(exit_stack=self.exit_stack)
        self.init_parser()
        self.load_plugins()

    def init_parser(self) -> None:
        version = f"{termui.style('flockdelay', style='bold')}, version {termui.style(self.version, style='success')}"
        self.parser = ErrorArgumentParser(prog="flockdelay", description=__doc__)
        self.parser.add_argument("-V", "--version", action="version", version=version, help="Show the version and exit")
        self.parser.add_argument(
            "-c", "--config", help="Use another config file [env var: FLOCKDELAY_CONFIG_FILE]"
        )
        verbose_option.add_to_parser(self.parser)

        self.subparsers = self.parser.add_subparsers(parser_class=ArgumentParser, title="commands", metavar="")
        package = importlib.import_module(COMMANDS_PACKAGE)
        for module_info in pkgutil.iter_modules(package.__path__):
            module = importlib.import_module(f"{COMMANDS_PACKAGE}.{module_info.name}")
            command = getattr(module, "Command", None)
            if command is not None:
                # verify_pe.py is exposed as "verify-pe"
                self.register_command(command, command.name or module_info.name.replace("_", "-"))

    def __call__(self, *args: Any, **kwargs: Any) -> None:
        return self.main(*args, **kwargs)

    def ensure_workspace(self, options: argparse.Namespace, obj: Workspace | None) -> Workspace:
        if obj is not None:
            return obj
        return self.create_workspace(options.config or os.getenv("FLOCKDELAY_CONFIG_FILE"))

    def create_workspace(self, config_file: str | None = None) -> Workspace:
        """A workspace reading ``config_file``, or the user's config file when not given."""
        return self.workspace_class(self, config_file)

    def handle(self, workspace: Workspace, options: argparse.Namespace) -> None:
        """Apply the global options, then run the selected command inside a logging session"""
        self.ui.set_verbosity(options.verbose)
        self.ui.set_theme(workspace.config.load_theme())
        self.ui.log_dir = os.path.expanduser(cast(str, workspace.config["log_dir"]))

        command = cast("BaseCommand | None", getattr(options, "command", None))
        if command is None:
            self.parser.print_help()
            sys.exit(0)
        with self.ui.logging(command.name or "run"):
            command.handle(workspace, options)

    def main(
        self,
        args: list[str] | None = None,
        prog_name: str | None = None,
        obj: Workspace | None = None,
        **extra: Any,
    ) -> None:
        """Parse ``args`` and run the command.

        Exits 1 on any error, which includes a run whose enabled checks did not all pass.
        """
        try:
            options = self.parser.parse_args(args or [])
        except FlockArgumentError as e:
            self.parser.error(str(e.__cause__))

        workspace = self.ensure_workspace(options, obj)
        try:
            self.handle(workspace, options)
        except Exception as err:
            self._fail(err)

    def _fail(self, err: Exception) -> NoReturn:
        usage_error = isinstance(err, FlockUsageError)
        if self.ui.verbosity > termui.Verbosity.NORMAL and not usage_error:
            raise err
        self.ui.echo(rf"[error]\[{type(err).__name__}][/]: {err}", err=True)
        if not usage_error:
            self.ui.warn("Add '-v' to see the detailed traceback", verbosity=termui.Verbosity.NORMAL)
        sys.exit(1)

    def register_command(self, command: type[BaseCommand], name: str | None = None) -> None:
        """Register ``command`` as a subcommand, under ``name`` or its own ``name`` attribute."""
        assert self.subparsers
        command.register_to(self.subparsers, name)

    @staticmethod
    def add_config(name: str, config_item: ConfigItem) -> None:
        """Declare an extra configuration item, e.g. for a plugin's own settings."""
        Config.add_config(name, config_item)

    def load_plugins(self) -> None:
        """Call every entry point of the ``flockdelay.plugin`` group with this core.

        A plugin typically connects receivers to ``flockdelay.signals``::

            def export_plugin(core: flockdelay.core.Core) -> None:
                signals.post_report.connect(write_extra_artifacts)

        A plugin that raises is reported and skipped.
        """
        for plugin in metadata.entry_points(group=PLUGIN_GROUP):
            try:
                plugin.load()(self)
            except Exception as e:
                self.ui.error(f"Failed to load plugin {plugin.name}={plugin.value}: {e}")


def main(args: list[str] | None = None) -> None:
    """The CLI entry function"""
    core = Core()
    with core.exit_stack:
        return core.main(args or sys.argv[1:])
