from __future__ import annotations

import os
from typing import TYPE_CHECKING, Any

import pytest

from flockdelay.models.delays import ConstantDelay, PointwiseDelay
from flockdelay.models.influence import ConstantInfluence
from flockdelay.models.initial import ConstantInitial
from flockdelay.models.system import IntegratorSettings, SystemConfig
from flockdelay.schedules import WeightSchedule

if TYPE_CHECKING:
    from typing import Callable

os.environ.update(FLOCKDELAY_NON_INTERACTIVE="1")

pytest_plugins = [
    "flockdelay.pytest",
]


def pytest_addoption(parser: pytest.Parser) -> None:
    parser.addoption("--run-slow", action="store_true", help="Run the slow acceptance scenarios")


def pytest_collection_modifyitems(config: pytest.Config, items: list[pytest.Item]) -> None:
    if config.getoption("--run-slow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --run-slow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def two_agents() -> Callable[..., SystemConfig]:
    """Two agents on a line heading apart at +0.5 and -0.5, with psi = 1 and alpha = 1 by default."""

    def factory(
        tau: float = 0.0,
        t_end: float = 1.0,
        h_step: float | None = 1e-3,
        schedule: WeightSchedule | None = None,
        **kwargs: Any,
    ) -> SystemConfig:
        return SystemConfig(
            n_agents=kwargs.pop("n_agents", 2),
            dim=kwargs.pop("dim", 1),
            influence=kwargs.pop("influence", ConstantInfluence()),
            delay=kwargs.pop("delay", PointwiseDelay(ConstantDelay(tau), tau)),
            initial=kwargs.pop("initial", ConstantInitial([[0.0], [0.0]], [[0.5], [-0.5]])),
            settings=IntegratorSettings(t_end=t_end, h_step=h_step),
            schedule=schedule or WeightSchedule(),
            **kwargs,
        )

    return factory


@pytest.fixture
def scenario_data() -> dict[str, Any]:
    """The zero delay two agent scenario with a declared persistence pair."""
    return {
        "name": "two-agents",
        "system": {"agents": 2, "dimension": 1},
        "influence": {"family": "constant", "k": 1.0},
        "schedule": {"family": "always-on", "pe": {"window": 1.0, "alpha_tilde": 1.0}},
        "initial": {"family": "constant", "positions": [[0.0], [0.0]], "velocities": [[0.5], [-0.5]]},
        "integrator": {"t_end": 5.0, "step": 0.01},
    }
