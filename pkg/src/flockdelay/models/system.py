from __future__ import annotations

import dataclasses as dc
import enum
from typing import TYPE_CHECKING

from flockdelay.exceptions import ConfigError
from flockdelay.models.delays import DistributedDelay, PointwiseDelay
from flockdelay.schedules import WeightSchedule

if TYPE_CHECKING:
    from typing import Any

    from flockdelay.models.delays import DelaySpec
    from flockdelay.models.influence import InfluenceFunction
    from flockdelay.models.initial import InitialData

DEFAULT_MAX_STEP = 1e-2


class CouplingMode(str, enum.Enum):
    VELOCITY = "velocity"
    LITERAL_POSITION = "literal-position"


@dc.dataclass(frozen=True)
class IntegratorSettings:
    """Step control of the integrator.

    Attributes:
        t_end: the horizon
        h_step: the largest step, ``None`` to derive it from the delay and the schedule
        overlap_iterations: fixed point sweeps when delayed lookups fall inside the step
        record_stride: every k-th step is emitted to outputs
    """

    t_end: float
    h_step: float | None = None
    overlap_iterations: int = 2
    record_stride: int = 1

    def __post_init__(self) -> None:
        if not self.t_end > 0:
            raise ConfigError(f"t_end must be positive, got {self.t_end}")
        if self.h_step is not None and not self.h_step > 0:
            raise ConfigError(f"h_step must be positive, got {self.h_step}")
        if self.overlap_iterations < 1:
            raise ConfigError(f"overlap_iterations must be at least 1, got {self.overlap_iterations}")
        if self.record_stride < 1:
            raise ConfigError(f"record_stride must be at least 1, got {self.record_stride}")

    def resolve_step(self, tau_bar: float, window: float | None) -> float:
        if self.h_step is not None:
            return self.h_step
        candidates = [DEFAULT_MAX_STEP]
        if tau_bar > 0:
            candidates.append(tau_bar / 20)
        if window is not None:
            candidates.append(window / 50)
        return min(candidates)

    def to_dict(self) -> dict[str, Any]:
        data = dc.asdict(self)
        if self.h_step is None:
            del data["h_step"]
        return data


@dc.dataclass(frozen=True)
class SystemConfig:
    """Everything one simulation needs."""

    n_agents: int
    dim: int
    influence: InfluenceFunction
    delay: DelaySpec
    initial: InitialData
    settings: IntegratorSettings
    schedule: WeightSchedule = dc.field(default_factory=WeightSchedule)
    coupling: CouplingMode = CouplingMode.VELOCITY

    def __post_init__(self) -> None:
        if self.n_agents < 2:
            raise ConfigError(f"a flock needs at least 2 agents, got {self.n_agents}")
        if self.dim < 1:
            raise ConfigError(f"dimension must be at least 1, got {self.dim}")
        if (self.initial.n_agents, self.initial.dim) != (self.n_agents, self.dim):
            raise ConfigError(
                f"initial data describe {self.initial.n_agents} agents in dimension {self.initial.dim}, "
                f"expected {self.n_agents} in dimension {self.dim}"
            )
        if not self.initial.covers(self.tau_bar):
            raise ConfigError(f"initial data do not cover [-{self.tau_bar}, 0]")
        if self.distributed and self.coupling is not CouplingMode.VELOCITY:
            raise ConfigError("the distributed delay model only supports velocity coupling")
        if isinstance(self.delay, DistributedDelay):
            self.delay.validate(self.settings.t_end)
        if self.schedule.pe_declared:
            assert self.schedule.window is not None
            if self.schedule.window < self.tau_bar:
                raise ConfigError(
                    f"the persistence window {self.schedule.window} must be at least tau_bar = {self.tau_bar}"
                )
            self.schedule.verify_declared(self.settings.t_end)

    @property
    def tau_bar(self) -> float:
        return self.delay.tau_bar

    @property
    def distributed(self) -> bool:
        return not isinstance(self.delay, PointwiseDelay)

    @property
    def sup_norm(self) -> float:
        return self.influence.sup_norm

    @property
    def h_step(self) -> float:
        return self.settings.resolve_step(self.tau_bar, self.schedule.window)

    @property
    def t_end(self) -> float:
        return self.settings.t_end
