from __future__ import annotations

import re
from pathlib import Path
from typing import TYPE_CHECKING, Any

from flockdelay.config import Config
from flockdelay.scenario import load_scenario, parse_scenario, read_document
from flockdelay.utils import expand_path

if TYPE_CHECKING:
    from flockdelay.core import Core
    from flockdelay.scenario import Scenario
    from flockdelay.termui import UI


def slugify(name: str) -> str:
    """A directory friendly version of a scenario or grid point name."""
    return re.sub(r"[^A-Za-z0-9._=-]+", "-", name).strip("-") or "scenario"


class Workspace:
    """The configuration and the output location of one invocation.

    Args:
        core: the CLI core object
        config_file: another configuration file than the user's default one
    """

    def __init__(self, core: Core, config_file: str | Path | None = None) -> None:
        self.core = core
        self.config = Config(Path(config_file) if config_file else Config.default_path())

    def __repr__(self) -> str:
        return f"<Workspace {self.output_root}>"

    @property
    def ui(self) -> UI:
        return self.core.ui

    @property
    def output_root(self) -> Path:
        return expand_path(self.config["output_root"])

    def run_dir(self, scenario: Scenario, out: str | None = None) -> Path:
        """Where the artifacts of ``scenario`` go: ``out``, then the scenario's own
        ``output`` key, then a directory named after it under the output root."""
        if out:
            return expand_path(out)
        if scenario.output:
            return expand_path(scenario.output)
        return self.output_root / slugify(scenario.name)

    def record_stride(self, scenario: Scenario, override: int | None = None) -> int:
        if override is not None:
            return override
        if self.config.is_overridden("record_stride"):
            return int(self.config["record_stride"])
        return scenario.system.settings.record_stride

    def load_scenario(self, path: str | Path) -> Scenario:
        return load_scenario(expand_path(path), default_nodes=self.config["quadrature.nodes"])

    def load_undeclared(self, path: str | Path) -> tuple[Scenario, dict[str, Any]]:
        """Load a scenario with its persistence declaration taken out, returning both."""
        data = read_document(expand_path(path))
        schedule = data.get("schedule")
        declared = schedule.pop("pe", {}) if isinstance(schedule, dict) else {}
        return parse_scenario(data, default_nodes=self.config["quadrature.nodes"]), declared
