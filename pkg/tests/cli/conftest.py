from __future__ import annotations

import copy
from typing import TYPE_CHECKING, Any

import pytest

if TYPE_CHECKING:
    from pathlib import Path
    from typing import Callable


@pytest.fixture
def write_scenario(scenario_file: Callable[..., Path], scenario_data: dict[str, Any]) -> Callable[..., Path]:
    """Write the two agent scenario with some sections replaced."""

    def factory(filename: str = "scenario.toml", **sections: Any) -> Path:
        data = copy.deepcopy(scenario_data)
        data.update(sections)
        return scenario_file(data, filename)

    return factory
