from __future__ import annotations

import argparse
from argparse import _SubParsersAction
from typing import TYPE_CHECKING, Any, Sequence, TypeVar

from flockdelay.cli.options import Option, verbose_option

if TYPE_CHECKING:
    from flockdelay.workspace import Workspace

C = TypeVar("C", bound="BaseCommand")


class BaseCommand:
    """A flockdelay subcommand.

    Subclasses live in ``flockdelay.cli.commands`` as a class named ``Command``,
    or are registered by plugins through ``Core.register_command``.
    """

    # Defaults to the module name
    name: str | None = None
    # Defaults to the class docstring
    description: str | None = None
    # Shared options added before ``add_arguments`` runs
    arguments: Sequence[Option] = (verbose_option,)

    @classmethod
    def init_parser(cls: type[C], parser: argparse.ArgumentParser) -> C:
        command = cls()
        for option in command.arguments:
            option.add_to_parser(parser)
        command.add_arguments(parser)
        return command

    @classmethod
    def register_to(cls, subparsers: _SubParsersAction, name: str | None = None, **kwargs: Any) -> None:
        """Add a parser for this command, replacing any command registered under the same name."""
        help_text = cls.description or cls.__doc__
        name = name or cls.name or ""
        # argparse refuses duplicate names on 3.11+, drop the earlier registration
        subparsers._name_parser_map.pop(name, None)
        subactions = subparsers._get_subactions()
        subactions[:] = [action for action in subactions if action.dest != name]
        parser = subparsers.add_parser(name, description=help_text, help=help_text, **kwargs)
        command = cls.init_parser(parser)
        command.name = name
        # Core.handle picks the instance up from the parsed namespace
        parser.set_defaults(command=command)

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        """Add the command's own arguments."""

    def handle(self, workspace: Workspace, options: argparse.Namespace) -> None:
        """Run the command.

        Raise a ``FlockUsageError`` for anything the user can fix, its message is
        shown without a traceback and the process exits 1.
        """
        raise NotImplementedError
