"""
Fixtures for testing flockdelay commands, scenarios and plugins with `pytest`.

Enable them from the root `conftest.py` of the test suite:

```python title="conftest.py"
pytest_plugins = ["flockdelay.pytest"]
```

- `core`: a fresh `Core`, configuration items restored afterwards
- `workspace`: a workspace whose config file, output root and log directory live under `tmp_path`
- `scenario_file`: a factory writing a scenario document to a TOML file
- `flock`: runs the command line in-process and returns a `RunResult`
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from io import StringIO
from pathlib import Path
from typing import TYPE_CHECKING, Any, Callable, Iterator, Mapping, cast

import pytest
import tomlkit

from flockdelay.config import Config
from flockdelay.core import Core
from flockdelay.workspace import Workspace

if TYPE_CHECKING:
    from typing import Protocol


@dataclass
class RunResult:
    """Outcome of one in-process command line invocation."""

    exit_code: int
    stdout: str
    stderr: str
    exception: Exception | None = None

    @property
    def output(self) -> str:
        return self.stdout

    @property
    def outputs(self) -> str:
        return self.stdout + self.stderr

    @property
    def flat_output(self) -> str:
        """`stdout` with every run of whitespace collapsed, immune to rich's line wrapping"""
        return " ".join(self.stdout.split())

    @property
    def flat_stderr(self) -> str:
        return " ".join(self.stderr.split())

    def print(self) -> None:
        """Dump the result, handy inside a failing test"""
        print("# exit code:", self.exit_code)
        print("# stdout:", self.stdout, sep="\n")
        print("# stderr:", self.stderr, sep="\n")


if TYPE_CHECKING:

    class FlockCallable(Protocol):
        def __call__(
            self,
            args: str | list[str],
            strict: bool = False,
            obj: Workspace | None = None,
            env: Mapping[str, str] | None = None,
            **kwargs: Any,
        ) -> RunResult: ...


@pytest.fixture
def core() -> Iterator[Core]:
    config_items = Config._config_map.copy()
    main = Core()
    with main.exit_stack:
        yield main
    # plugins may have declared extra items
    Config._config_map = config_items


@pytest.fixture
def workspace(core: Core, tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> Workspace:
    """A workspace isolated from the user's configuration and environment.

    Artifacts go to `tmp_path/runs`, logs to a directory next to the config file.
    """
    for key in list(os.environ):
        if key.startswith("FLOCKDELAY_") and key != "FLOCKDELAY_NON_INTERACTIVE":
            monkeypatch.delenv(key)
    home = tmp_path / ".flockdelay-home"
    home.mkdir(parents=True)
    config_file = home / "config.toml"
    settings = {"output_root": (tmp_path / "runs").as_posix(), "log_dir": (home / "logs").as_posix()}
    config_file.write_text(tomlkit.dumps(settings), encoding="utf-8")
    return core.create_workspace(config_file.as_posix())


@pytest.fixture
def scenario_file(tmp_path: Path) -> Callable[..., Path]:
    """Returns `factory(data, filename="scenario.toml") -> Path`."""

    def factory(data: Mapping[str, Any], filename: str = "scenario.toml") -> Path:
        path = tmp_path / filename
        path.write_text(tomlkit.dumps(data), encoding="utf-8")
        return path

    return factory


@pytest.fixture
def flock(core: Core, workspace: Workspace, monkeypatch: pytest.MonkeyPatch) -> FlockCallable:
    """Run `flockdelay <args>` against the `workspace` fixture.

    With `strict=True` a non-zero exit raises instead of returning the result.
    Variables in `env` are set for the duration of the call only.
    """

    def caller(
        args: str | list[str],
        strict: bool = False,
        obj: Workspace | None = None,
        env: Mapping[str, str] | None = None,
        **kwargs: Any,
    ) -> RunResult:
        __tracebackhide__ = True

        stdout, stderr = StringIO(), StringIO()
        exit_code = 0
        exception: Exception | None = None
        argv = args.split() if isinstance(args, str) else args

        with monkeypatch.context() as m:
            m.setattr("sys.stdout", stdout)
            m.setattr("sys.stderr", stderr)
            for key, value in (env or {}).items():
                m.setenv(key, value)
            try:
                core.main(argv, "flockdelay", obj=obj or workspace, **kwargs)
            except SystemExit as e:
                exit_code = cast(int, e.code)
            except Exception as e:
                exit_code, exception = 1, e
            finally:
                core.exit_stack.close()

        result = RunResult(exit_code, stdout.getvalue(), stderr.getvalue(), exception)
        if strict and result.exit_code != 0:
            if result.exception is not None:
                raise result.exception
            raise RuntimeError(f"flockdelay {' '.join(argv)} exited with {result.exit_code}: {result.stderr}")
        return result

    return caller
