"""
Utility functions
"""

from __future__ import annotations

import json
import math
import os
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
from scipy.spatial import ConvexHull, QhullError
from scipy.spatial.distance import pdist

if TYPE_CHECKING:
    from typing import Any

    from numpy.typing import ArrayLike

    from flockdelay._types import FloatArray

# point clouds larger than this are reduced to their convex hull first
_HULL_THRESHOLD = 2048


def cloud_diameter(points: ArrayLike) -> float:
    """Largest Euclidean distance between any two rows of ``points``."""
    cloud = np.asarray(points, dtype=float)
    if cloud.ndim == 1:
        cloud = cloud[:, None]
    if len(cloud) < 2:
        return 0.0
    if cloud.shape[1] == 1:
        return float(np.ptp(cloud[:, 0]))
    if len(cloud) > _HULL_THRESHOLD:
        try:
            cloud = cloud[ConvexHull(cloud).vertices]
        except (QhullError, ValueError):
            # degenerate clouds (all on a lower-dimensional subspace) keep every point
            pass
    return float(pdist(cloud).max())


def pairwise_maximum(points: FloatArray) -> float:
    """Maximum pairwise distance among the agents of one snapshot shaped (N, d)."""
    if len(points) < 2:
        return 0.0
    return float(pdist(points).max())


def unit_vectors(dim: int, count: int, seed: int) -> FloatArray:
    """Deterministic unit vectors: the coordinate axes followed by seeded random directions."""
    axes = np.eye(dim)
    rng = np.random.default_rng(seed)
    extra = rng.standard_normal((max(count - dim, 0), dim))
    extra /= np.linalg.norm(extra, axis=1, keepdims=True)
    return np.vstack([axes, extra])


def jsonable(value: Any) -> Any:
    """Convert numpy scalars, arrays and non-finite floats into JSON friendly values."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.floating, float)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def dump_json(data: Any, path: str | Path) -> None:
    """Write a deterministic JSON document: sorted keys, fixed indentation."""
    Path(path).write_text(json.dumps(jsonable(data), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def expand_path(path: str | Path) -> Path:
    return Path(os.path.expandvars(os.path.expanduser(str(path))))
