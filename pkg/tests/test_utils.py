import json
import math

import numpy as np
import pytest

from flockdelay import utils
from flockdelay.bounds.checks import CheckResult
from flockdelay.cli import utils as cli_utils
from flockdelay.workspace import slugify


@pytest.mark.parametrize(
    "points,expected",
    [
        ([[0.0], [2.0], [-1.0]], 3.0),
        ([0.5, -0.5], 1.0),
        ([[0.0, 0.0], [3.0, 4.0], [1.0, 1.0]], 5.0),
        ([[1.0, 2.0]], 0.0),
    ],
)
def test_cloud_diameter(points, expected):
    assert utils.cloud_diameter(points) == pytest.approx(expected)


def test_cloud_diameter_of_a_large_cloud():
    angles = np.linspace(0.0, 2 * np.pi, 5000, endpoint=False)
    circle = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    inner = 0.1 * np.random.default_rng(0).standard_normal((1000, 2))
    assert utils.cloud_diameter(np.vstack([circle, inner])) == pytest.approx(2.0)


def test_pairwise_maximum():
    assert utils.pairwise_maximum(np.array([[0.0, 0.0], [0.0, 2.0], [1.0, 0.0]])) == pytest.approx(math.sqrt(5))
    assert utils.pairwise_maximum(np.array([[1.0, 1.0]])) == 0.0


def test_unit_vectors():
    vectors = utils.unit_vectors(3, 8, seed=1)
    assert vectors.shape == (8, 3)
    assert np.allclose(vectors[:3], np.eye(3))
    assert np.allclose(np.linalg.norm(vectors, axis=1), 1.0)
    assert np.array_equal(vectors, utils.unit_vectors(3, 8, seed=1))
    assert utils.unit_vectors(2, 1, seed=0).shape == (2, 2)


def test_jsonable():
    data = {
        1: np.float64(0.5),
        "nan": math.nan,
        "inf": [np.inf, -np.inf],
        "array": np.arange(3),
        "flag": np.bool_(True),
        "count": np.int64(4),
    }
    assert utils.jsonable(data) == {
        "1": 0.5,
        "nan": "nan",
        "inf": ["inf", "-inf"],
        "array": [0, 1, 2],
        "flag": True,
        "count": 4,
    }


def test_dump_json_is_deterministic(tmp_path):
    utils.dump_json({"b": 1.0, "a": {"d": np.float32(2.0), "c": None}}, tmp_path / "out.json")
    text = (tmp_path / "out.json").read_text()
    assert text == json.dumps({"a": {"c": None, "d": 2.0}, "b": 1.0}, indent=2) + "\n"


def test_expand_path(monkeypatch, tmp_path):
    monkeypatch.setenv("FLOCK_TEST_ROOT", str(tmp_path))
    assert utils.expand_path("$FLOCK_TEST_ROOT/runs") == tmp_path / "runs"


@pytest.mark.parametrize(
    "name,slug",
    [
        ("two-agents", "two-agents"),
        ("stress[agents=8,tau_bar=0.25]", "stress-agents=8-tau_bar=0.25"),
        ("  ", "scenario"),
    ],
)
def test_slugify(name, slug):
    assert slugify(name) == slug


@pytest.mark.parametrize("value,text", [(None, "-"), (0.1234567891, "0.123457"), (3, "3"), (True, "True")])
def test_format_number(value, text):
    assert cli_utils.format_number(value) == text


def test_check_rows():
    rows = cli_utils.check_rows(
        [
            CheckResult("velocity_bound", True, 0.25, 0.0),
            CheckResult("decay_envelope", False, -1.0, 2.0, 1.5, "mu 0.1"),
            CheckResult.unavailable("lyapunov_monotone", "no persistence declaration"),
        ]
    )
    assert [row[1] for row in rows] == ["velocity_bound", "decay_envelope", "lyapunov_monotone"]
    assert rows[1][2:] == ["-1", "2", "mu 0.1"]
    assert rows[2][0].startswith("[warning]")
    assert rows[2][2] == "nan"
