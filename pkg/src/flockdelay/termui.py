from __future__ import annotations

import contextlib
import enum
import logging
import os
import tempfile
import warnings
from typing import TYPE_CHECKING

import rich
from rich.box import SIMPLE_HEAD
from rich.console import Console
from rich.progress import BarColumn, Progress, ProgressColumn, TextColumn, TimeElapsedColumn
from rich.table import Table
from rich.text import Text
from rich.theme import Theme

from flockdelay.exceptions import FlockWarning

if TYPE_CHECKING:
    from typing import Any, Iterator, Sequence

    from rich.progress import Task

    from flockdelay._types import RichProtocol

logger = logging.getLogger("flockdelay")
logger.setLevel(logging.DEBUG)
logger.addHandler(logging.NullHandler())

DEFAULT_THEME = {
    "primary": "cyan",
    "success": "green",
    "warning": "yellow",
    "error": "red",
    "info": "blue",
}
rich.reconfigure(highlight=False, theme=Theme(DEFAULT_THEME))
_err_console = Console(stderr=True, theme=Theme(DEFAULT_THEME))


def is_interactive(console: Console | None = None) -> bool:
    console = console or rich.get_console()
    return "FLOCKDELAY_NON_INTERACTIVE" not in os.environ and console.is_interactive


def style(text: str, *args: str, style: str | None = None, **kwargs: Any) -> str:
    """Render rich markup to a string with ANSI codes, or return it untouched off a terminal."""
    _console = rich.get_console()
    if _console.legacy_windows or not _console.is_terminal:  # pragma: no cover
        return text
    with _console.capture() as capture:
        _console.print(text, *args, end="", style=style, **kwargs)
    return capture.get()


class Verbosity(enum.IntEnum):
    QUIET = -1
    NORMAL = 0
    DETAIL = 1
    DEBUG = 2


LOG_LEVELS = {
    Verbosity.NORMAL: logging.WARN,
    Verbosity.DETAIL: logging.INFO,
    Verbosity.DEBUG: logging.DEBUG,
}


class Mark:
    """Status marks of a certification check."""

    PASSED = "[success]:heavy_check_mark:[/]"
    FAILED = "[error]:heavy_multiplication_x:[/]"
    UNAVAILABLE = "[warning]-[/]"


class SimulationTimeColumn(ProgressColumn):
    """Shows how far the integrator got in model time, e.g. ``t = 12.5/60``."""

    def render(self, task: Task) -> Text:
        total = "?" if task.total is None else f"{task.total:g}"
        return Text(f"t = {task.completed:.4g}/{total}", style="progress.remaining")


class UI:
    """Terminal UI object"""

    def __init__(
        self, verbosity: Verbosity = Verbosity.NORMAL, *, exit_stack: contextlib.ExitStack | None = None
    ) -> None:
        self.verbosity = verbosity
        self.exit_stack = exit_stack or contextlib.ExitStack()
        self.log_dir: str | None = None

    def set_verbosity(self, verbosity: int) -> None:
        self.verbosity = Verbosity(verbosity)
        if self.verbosity == Verbosity.QUIET:
            self.exit_stack.enter_context(warnings.catch_warnings())
            warnings.simplefilter("ignore", FlockWarning, append=True)

    def set_theme(self, theme: Theme) -> None:
        rich.get_console().push_theme(theme)
        _err_console.push_theme(theme)

    def echo(
        self,
        message: str | RichProtocol = "",
        err: bool = False,
        verbosity: Verbosity = Verbosity.QUIET,
        **kwargs: Any,
    ) -> None:
        """print message using rich console

        :param message: message with rich markup, defaults to "".
        :param err: if true print to stderr, defaults to False.
        :param verbosity: verbosity level, defaults to QUIET.
        """
        if self.verbosity < verbosity:
            return
        console = _err_console if err else rich.get_console()
        if not console.is_interactive:
            # keep artifact paths and margins on one line when piped
            kwargs.setdefault("crop", False)
            kwargs.setdefault("overflow", "ignore")
        console.print(message, **kwargs)

    def display_columns(self, rows: Sequence[Sequence[str]], header: Sequence[str] | None = None) -> None:
        """Print rows in aligned columns; a header title starting with ``>`` is right-justified."""
        if not rows and not header:
            return
        if header is None:
            table = Table.grid(padding=(0, 2))
            for _ in rows[0]:
                table.add_column()
        else:
            table = Table(box=SIMPLE_HEAD, pad_edge=False)
            for title in header:
                numeric = title.startswith(">")
                table.add_column(title.lstrip(">"), justify="right" if numeric else "left", no_wrap=numeric)
        for row in rows:
            table.add_row(*row)
        rich.print(table)

    def _log_handler(self, command: str) -> tuple[logging.Handler, str | None]:
        if self.verbosity >= Verbosity.DETAIL:
            handler: logging.Handler = logging.StreamHandler()
            handler.setLevel(LOG_LEVELS[self.verbosity])
            handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
            return handler, None
        if self.log_dir:
            os.makedirs(self.log_dir, exist_ok=True)
        fd, log_file = tempfile.mkstemp(".log", f"flockdelay-{command}-", self.log_dir)
        os.close(fd)
        handler = logging.FileHandler(log_file, encoding="utf-8")
        handler.setLevel(logging.DEBUG)
        handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
        return handler, log_file

    @contextlib.contextmanager
    def logging(self, command: str = "run") -> Iterator[logging.Logger]:
        """Route the package logger for one command.

        At DETAIL and above records stream to stderr. Otherwise they go to a log
        file under ``log_dir`` which is removed on success and pointed at on failure.
        """
        handler, log_file = self._log_handler(command)
        logger.addHandler(handler)
        try:
            yield logger
        except Exception:
            if log_file is not None:
                logger.exception("%s aborted", command)
                self.echo(f"See [warning]{log_file}[/] for the integration log.", style="error", err=True)
            raise
        else:
            if log_file is not None:
                self.exit_stack.callback(_remove_quietly, log_file)
        finally:
            logger.removeHandler(handler)
            handler.close()

    def make_progress(self, *columns: str | ProgressColumn, **kwargs: Any) -> Progress:
        """Progress over model time, silent when logs go to the terminal or off a tty."""
        if not columns:
            columns = (TextColumn("{task.description}"), BarColumn(), SimulationTimeColumn(), TimeElapsedColumn())
        disable = self.verbosity != Verbosity.NORMAL or not is_interactive()
        return Progress(*columns, disable=disable, console=_err_console, transient=True, **kwargs)

    def info(self, message: str, verbosity: Verbosity = Verbosity.NORMAL) -> None:
        self.echo(f"[info]INFO:[/] [dim]{message}[/]", err=True, verbosity=verbosity)

    def warn(self, message: str, verbosity: Verbosity = Verbosity.NORMAL) -> None:
        self.echo(f"[warning]WARNING:[/] {message}", err=True, verbosity=verbosity)

    def error(self, message: str, verbosity: Verbosity = Verbosity.QUIET) -> None:
        self.echo(f"[error]ERROR:[/] {message}", err=True, verbosity=verbosity)


def _remove_quietly(path: str) -> None:
    with contextlib.suppress(OSError):
        os.unlink(path)
