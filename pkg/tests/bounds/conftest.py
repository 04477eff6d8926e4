from __future__ import annotations

import numpy as np
import pytest

from flockdelay.bounds.series import TrajectorySeries
from flockdelay.utils import pairwise_maximum


def make_series(times, positions, velocities) -> TrajectorySeries:
    times = np.asarray(times, dtype=float)
    positions = np.asarray(positions, dtype=float)
    velocities = np.asarray(velocities, dtype=float)
    d_x = np.array([pairwise_maximum(row) for row in positions])
    d_v = np.array([pairwise_maximum(row) for row in velocities])
    return TrajectorySeries(times, positions, velocities, d_x, d_v)


@pytest.fixture
def series_factory():
    return make_series
