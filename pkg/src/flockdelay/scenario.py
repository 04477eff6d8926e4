"""Scenario files: one TOML document describing a system, its checks and an optional sweep.

A minimal scenario::

    name = "two-agents"

    [system]
    agents = 2

    [initial]
    family = "constant"
    positions = [[0.0], [0.0]]
    velocities = [[0.5], [-0.5]]

    [integrator]
    t_end = 5.0

Every section but ``[system]``, ``[initial]`` and ``[integrator]`` is optional.
"""

from __future__ import annotations

import dataclasses as dc
import itertools
from pathlib import Path
from typing import TYPE_CHECKING, Any, Mapping

import numpy as np
import tomlkit
from tomlkit.exceptions import ParseError

from flockdelay.bounds.checks import ALL_CHECKS
from flockdelay.bounds.report import CheckSettings
from flockdelay.exceptions import ConfigError, PersistenceError, ScenarioError
from flockdelay.models.delays import (
    KERNEL_WEIGHTS,
    TIME_FUNCTIONS,
    ConstantDelay,
    DistributedDelay,
    DistributedDelayKernel,
    PointwiseDelay,
)
from flockdelay.models.influence import INFLUENCE_FAMILIES, ConstantInfluence
from flockdelay.models.initial import INITIAL_FAMILIES
from flockdelay.models.system import CouplingMode, IntegratorSettings, SystemConfig
from flockdelay.schedules import PROFILES, WeightSchedule

if TYPE_CHECKING:
    from flockdelay.models.delays import DelaySpec

SWEEP_AXES = ("agents", "tau_bar", "duty", "gamma", "seed")
# families that derive their states from the agent count
SIZED_FAMILIES = ("random", "alternating")


@dc.dataclass(frozen=True)
class SweepAxes:
    agents: tuple[int, ...] = ()
    tau_bar: tuple[float, ...] = ()
    duty: tuple[float, ...] = ()
    gamma: tuple[float, ...] = ()
    seed: tuple[int, ...] = ()

    def __bool__(self) -> bool:
        return any(getattr(self, axis) for axis in SWEEP_AXES)

    @property
    def names(self) -> list[str]:
        return [axis for axis in SWEEP_AXES if getattr(self, axis)]

    def points(self) -> list[dict[str, Any]]:
        """Cartesian product of the non-empty axes, in declaration order."""
        names = self.names
        return [dict(zip(names, values)) for values in itertools.product(*(getattr(self, n) for n in names))]

    def to_dict(self) -> dict[str, Any]:
        return {axis: list(getattr(self, axis)) for axis in self.names}


@dc.dataclass(frozen=True)
class Scenario:
    name: str
    system: SystemConfig
    checks: CheckSettings = dc.field(default_factory=CheckSettings)
    sweep: SweepAxes = dc.field(default_factory=SweepAxes)
    output: str | None = None

    def to_dict(self) -> dict[str, Any]:
        cfg = self.system
        data: dict[str, Any] = {"name": self.name}
        if self.output is not None:
            data["output"] = self.output
        data["system"] = {"agents": cfg.n_agents, "dimension": cfg.dim, "coupling": cfg.coupling.value}
        data["influence"] = cfg.influence.to_dict()
        data["delay"] = cfg.delay.to_dict()
        data["schedule"] = cfg.schedule.to_dict()
        data["initial"] = cfg.initial.to_dict()
        integrator = cfg.settings.to_dict()
        if "h_step" in integrator:
            integrator["step"] = integrator.pop("h_step")
        data["integrator"] = integrator
        data["checks"] = {**self.checks.to_dict(), "directions": self.checks.directions, "seed": self.checks.seed}
        if self.sweep:
            data["sweep"] = self.sweep.to_dict()
        return data


def _plain(value: Any) -> Any:
    """Builtin containers and numbers only, for TOML output."""
    if isinstance(value, Mapping):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_plain(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


class _Reader:
    """Pops keys off one table, remembering its dotted path for error messages."""

    def __init__(self, data: Any, path: str) -> None:
        if data is None:
            data = {}
        if not isinstance(data, Mapping):
            raise ScenarioError(path, "expected a table")
        self.data = dict(data)
        self.path = path

    def key(self, name: str) -> str:
        return f"{self.path}.{name}" if self.path else name

    def pop(self, name: str, default: Any = dc.MISSING) -> Any:
        if name in self.data:
            return self.data.pop(name)
        if default is dc.MISSING:
            raise ScenarioError(self.key(name), "missing required key")
        return default

    def number(
        self, name: str, default: Any = dc.MISSING, *, minimum: float | None = None, positive: bool = False
    ) -> Any:
        value = self.pop(name, default)
        if value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ScenarioError(self.key(name), f"expected a number, got {value!r}")
        if positive and not value > 0:
            raise ScenarioError(self.key(name), f"must be positive, got {value}")
        if minimum is not None and value < minimum:
            raise ScenarioError(self.key(name), f"must be at least {minimum}, got {value}")
        return value

    def sub(self, name: str, required: bool = False) -> _Reader | None:
        if name not in self.data and not required:
            return None
        return _Reader(self.pop(name), self.key(name))

    def finish(self) -> None:
        if self.data:
            raise ScenarioError(self.key(sorted(self.data)[0]), "unknown key")


def _family(reader: _Reader, registry: Mapping[str, type], default: str | None = None, **extra: Any) -> Any:
    family = reader.pop("family", default) if default is not None else reader.pop("family")
    if family not in registry:
        raise ScenarioError(reader.key("family"), f"unknown family {family!r}, expected one of {', '.join(registry)}")
    cls = registry[family]
    accepted = {field.name for field in dc.fields(cls)} - set(extra)
    for name in reader.data:
        if name not in accepted:
            raise ScenarioError(reader.key(name), f"unknown key for family {family!r}")
    kwargs = {name: _freeze(value) for name, value in reader.data.items()}
    reader.data.clear()
    try:
        return cls(**kwargs, **extra)
    except TypeError as e:
        raise ScenarioError(reader.path, f"missing parameters for family {family!r}: {e}") from None
    except ConfigError as e:
        raise ScenarioError(reader.path, str(e)) from None


def _freeze(value: Any) -> Any:
    if isinstance(value, list):
        return tuple(_freeze(v) for v in value)
    return value


def _parse_delay(reader: _Reader | None, default_nodes: int) -> DelaySpec:
    if reader is None:
        return PointwiseDelay(ConstantDelay(0.0), 0.0)
    kind = reader.pop("kind", "pointwise")
    tau_bar = reader.number("tau_bar", 0.0, minimum=0.0)
    try:
        if kind == "pointwise":
            tau_reader = reader.sub("tau")
            tau = ConstantDelay(tau_bar) if tau_reader is None else _family(tau_reader, TIME_FUNCTIONS)
            reader.finish()
            low, high = tau.range
            if low < 0 or high > tau_bar + 1e-12:
                raise ScenarioError(reader.key("tau"), f"the lag must stay within [0, {tau_bar}], got [{low}, {high}]")
            return PointwiseDelay(tau, tau_bar)
        if kind == "distributed":
            tau1 = _family(reader.sub("tau1", required=True), TIME_FUNCTIONS)  # type: ignore[arg-type]
            tau2 = _family(reader.sub("tau2", required=True), TIME_FUNCTIONS)  # type: ignore[arg-type]
            weight_reader = reader.sub("weight")
            weight = KERNEL_WEIGHTS["constant"]() if weight_reader is None else _family(weight_reader, KERNEL_WEIGHTS)
            nodes = int(reader.number("nodes", default_nodes, minimum=1))
            reader.finish()
            return DistributedDelay(DistributedDelayKernel(tau1, tau2, weight, nodes), tau_bar)
    except ConfigError as e:
        raise ScenarioError(reader.path, str(e)) from None
    raise ScenarioError(reader.key("kind"), f"unknown delay kind {kind!r}, expected pointwise or distributed")


def _parse_schedule(reader: _Reader | None) -> WeightSchedule:
    if reader is None:
        return WeightSchedule()
    pe = reader.sub("pe")
    window = alpha_tilde = None
    if pe is not None:
        window = pe.number("window", positive=True)
        alpha_tilde = pe.number("alpha_tilde", positive=True)
        pe.finish()
    profile = _family(reader, PROFILES, default="always-on")
    try:
        return WeightSchedule(profile, window, alpha_tilde)
    except ConfigError as e:
        raise ScenarioError(f"{reader.path}.pe", str(e)) from None


def _parse_checks(reader: _Reader | None) -> CheckSettings:
    if reader is None:
        return CheckSettings()
    enabled = reader.pop("enabled", "all")
    if enabled == "all":
        enabled = ALL_CHECKS
    elif not isinstance(enabled, list) or not all(isinstance(name, str) for name in enabled):
        raise ScenarioError(reader.key("enabled"), "expected \"all\" or a list of check names")
    for name in enabled:
        if name not in ALL_CHECKS:
            raise ScenarioError(reader.key("enabled"), f"unknown check {name!r}")
    settings = CheckSettings(
        enabled=tuple(enabled),
        envelope_scale=reader.number("envelope_scale", 1.0, positive=True),
        align_tolerance=reader.number("align_tolerance", None, minimum=0.0),
        max_diameter=reader.number("max_diameter", None, minimum=0.0),
        directions=int(reader.number("directions", 8, minimum=1)),
        seed=int(reader.number("seed", 0)),
    )
    reader.finish()
    return settings


def _parse_sweep(reader: _Reader | None) -> SweepAxes:
    if reader is None:
        return SweepAxes()
    axes: dict[str, tuple[Any, ...]] = {}
    for axis in SWEEP_AXES:
        values = reader.pop(axis, [])
        if not isinstance(values, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in values
        ):
            raise ScenarioError(reader.key(axis), "expected a list of numbers")
        axes[axis] = tuple(int(v) for v in values) if axis in ("agents", "seed") else tuple(float(v) for v in values)
    reader.finish()
    return SweepAxes(**axes)


def parse_scenario(data: Mapping[str, Any], default_nodes: int = 8) -> Scenario:
    """Validate a scenario document and build the scenario.

    The persistence declaration, if any, is verified here.

    Raises:
        ScenarioError: naming the offending key and the reason
    """
    root = _Reader(data, "")
    name = str(root.pop("name", "scenario"))
    output = root.pop("output", None)

    system = root.sub("system", required=True)
    assert system is not None
    n_agents = int(system.number("agents", minimum=2))
    dim = int(system.number("dimension", 1, minimum=1))
    coupling_name = system.pop("coupling", CouplingMode.VELOCITY.value)
    try:
        coupling = CouplingMode(coupling_name)
    except ValueError:
        raise ScenarioError(system.key("coupling"), f"unknown coupling {coupling_name!r}") from None
    system.finish()

    influence_reader = root.sub("influence")
    influence = ConstantInfluence() if influence_reader is None else _family(influence_reader, INFLUENCE_FAMILIES)
    delay = _parse_delay(root.sub("delay"), default_nodes)
    schedule = _parse_schedule(root.sub("schedule"))

    initial_reader = root.sub("initial", required=True)
    assert initial_reader is not None
    family = initial_reader.data.get("family")
    sized = {"agents": n_agents, "dimension": dim} if family in SIZED_FAMILIES else {}
    initial = _family(initial_reader, INITIAL_FAMILIES, **sized)

    integrator = root.sub("integrator", required=True)
    assert integrator is not None
    try:
        settings = IntegratorSettings(
            t_end=integrator.number("t_end", positive=True),
            h_step=integrator.number("step", None, positive=True),
            overlap_iterations=int(integrator.number("overlap_iterations", 2, minimum=1)),
            record_stride=int(integrator.number("record_stride", 1, minimum=1)),
        )
    except ConfigError as e:
        raise ScenarioError(integrator.path, str(e)) from None
    integrator.finish()

    checks = _parse_checks(root.sub("checks"))
    sweep = _parse_sweep(root.sub("sweep"))
    root.finish()

    if sweep.agents and initial.family not in SIZED_FAMILIES:
        raise ScenarioError("sweep.agents", f"needs a {' or '.join(SIZED_FAMILIES)} initial family")

    try:
        cfg = SystemConfig(n_agents, dim, influence, delay, initial, settings, schedule, coupling)
    except PersistenceError as e:
        raise ScenarioError("schedule.pe", str(e)) from None
    except ConfigError as e:
        raise ScenarioError("system", str(e)) from None
    return Scenario(name, cfg, checks, sweep, None if output is None else str(output))


def read_document(path: str | Path) -> dict[str, Any]:
    """The scenario file as plain nested dictionaries."""
    path = Path(path)
    try:
        document = tomlkit.parse(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise ScenarioError(str(path), f"cannot read the file: {e.strerror or e}") from None
    except ParseError as e:
        raise ScenarioError(str(path), f"invalid TOML: {e}") from None
    return document.unwrap()


def load_scenario(path: str | Path, default_nodes: int = 8) -> Scenario:
    return parse_scenario(read_document(path), default_nodes)


def dump_scenario(scenario: Scenario, path: str | Path | None = None) -> str:
    """Serialize ``scenario`` to TOML, writing it to ``path`` when given."""
    text = tomlkit.dumps(_plain(scenario.to_dict()))
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def derive_point(scenario: Scenario, point: Mapping[str, Any]) -> Scenario:
    """The scenario of one sweep grid point, without the sweep itself."""
    data = scenario.to_dict()
    data.pop("sweep", None)
    labels = []
    for axis, value in point.items():
        labels.append(f"{axis}={value:g}")
        if axis == "agents":
            data["system"]["agents"] = int(value)
        elif axis == "tau_bar":
            delay = data["delay"]
            delay["tau_bar"] = float(value)
            tau = delay.get("tau")
            if tau is not None and tau.get("family") == "constant":
                tau["value"] = float(value)
        elif axis == "duty":
            if data["schedule"].get("family") != "square-wave":
                raise ScenarioError("sweep.duty", "needs a square-wave schedule")
            data["schedule"]["duty"] = float(value)
        elif axis == "gamma":
            if data["influence"].get("family") != "power-law":
                raise ScenarioError("sweep.gamma", "needs a power-law influence")
            data["influence"]["gamma"] = float(value)
        elif axis == "seed":
            if data["initial"].get("family") == "random":
                data["initial"]["seed"] = int(value)
            elif data["schedule"].get("family") == "random-blackouts":
                data["schedule"]["seed"] = int(value)
            else:
                raise ScenarioError("sweep.seed", "needs a random initial family or random blackouts")
        else:
            raise ScenarioError(f"sweep.{axis}", "unknown sweep axis")
    data["name"] = f"{scenario.name}[{','.join(labels)}]"
    return parse_scenario(data)
