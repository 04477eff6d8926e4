import math

import numpy as np
import pytest

from flockdelay.exceptions import ConfigError, DomainError
from flockdelay.models.influence import (
    ConstantInfluence,
    OscillatingInfluence,
    PowerLawInfluence,
    TabulatedInfluence,
    classify_infint,
    communication_rate,
    eval_influence,
)


@pytest.mark.parametrize(
    "psi,r,expected",
    [
        (ConstantInfluence(1.0), 5.0, 1.0),
        (PowerLawInfluence(1.0, 1.0), 1.0, 0.5),
        (TabulatedInfluence(((0, 1), (2, 3))), 1.0, 2.0),
        (TabulatedInfluence(((0, 1), (2, 3))), 10.0, 3.0),
        (OscillatingInfluence(0.2, 1.0, 1.0), math.pi / 2, 1.2),
    ],
)
def test_eval_influence(psi, r, expected):
    assert eval_influence(psi, r) == pytest.approx(expected)


def test_eval_influence_rejects_negative_distance():
    with pytest.raises(DomainError):
        eval_influence(ConstantInfluence(), -1.0)


def test_influence_is_vectorized():
    psi = PowerLawInfluence(2.0, 1.0)
    assert np.allclose(psi(np.array([[0.0, 1.0], [3.0, 0.0]])), [[2.0, 1.0], [0.2, 2.0]])


@pytest.mark.parametrize(
    "n_agents,x_self,x_other,expected",
    [
        (2, [0.0, 0.0], [3.0, 4.0], 1.0),
        (3, [0.0], [1.0], 0.25),
        (2, [1.0], [1.0], 1.0),
    ],
)
def test_communication_rate(n_agents, x_self, x_other, expected):
    psi = ConstantInfluence() if len(x_self) == 2 else PowerLawInfluence(1.0, 1.0)
    assert communication_rate(psi, n_agents, x_self, x_other) == pytest.approx(expected)


def test_communication_rate_needs_two_agents():
    with pytest.raises(ConfigError):
        communication_rate(ConstantInfluence(), 1, [0.0], [0.0])


@pytest.mark.parametrize(
    "psi,diverges",
    [
        (ConstantInfluence(1.0), True),
        (PowerLawInfluence(1.0, 1.0), False),
        (PowerLawInfluence(1.0, 0.25), True),
        (PowerLawInfluence(1.0, 0.5), True),
        (OscillatingInfluence(0.2, 1.0, 1.0), True),
    ],
)
def test_classify_infint(psi, diverges):
    assert classify_infint(psi) is diverges


@pytest.mark.parametrize(
    "psi,sup_norm",
    [
        (ConstantInfluence(2.0), 2.0),
        (PowerLawInfluence(3.0, 0.4), 3.0),
        (OscillatingInfluence(0.2, 1.0, 1.0), 1.2),
        (TabulatedInfluence(((0, 1), (2, 3), (4, 0.5))), 3.0),
    ],
)
def test_sup_norm(psi, sup_norm):
    assert psi.sup_norm == pytest.approx(sup_norm)


@pytest.mark.parametrize(
    "psi,upper,expected",
    [
        (ConstantInfluence(1.0), 100.0, 1.0),
        (PowerLawInfluence(1.0, 1.0), 3.0, 0.1),
        (OscillatingInfluence(0.2, 1.0, 1.0), math.pi, 0.2),
        (OscillatingInfluence(0.2, 1.0, 1.0), 0.5, 0.2),
        (TabulatedInfluence(((0, 3), (2, 1), (4, 2))), 3.0, 1.0),
        (TabulatedInfluence(((0, 3), (2, 1), (4, 2))), 1.0, 2.0),
    ],
)
def test_min_on(psi, upper, expected):
    assert psi.min_on(upper) == pytest.approx(expected)


@pytest.mark.parametrize(
    "factory",
    [
        lambda: ConstantInfluence(0.0),
        lambda: PowerLawInfluence(-1.0, 1.0),
        lambda: PowerLawInfluence(1.0, -0.1),
        lambda: OscillatingInfluence(0.0, 1.0),
        lambda: OscillatingInfluence(1.0, -1.0),
        lambda: TabulatedInfluence(()),
        lambda: TabulatedInfluence(((1, 1), (0, 1))),
        lambda: TabulatedInfluence(((0, 1), (1, 0))),
    ],
)
def test_invalid_influence_parameters(factory):
    with pytest.raises(ConfigError):
        factory()


def test_tabulated_to_dict():
    psi = TabulatedInfluence(((0, 1), (2, 3)))
    assert psi.to_dict() == {"family": "tabulated", "knots": [[0.0, 1.0], [2.0, 3.0]]}


@pytest.mark.parametrize(
    "psi",
    [
        ConstantInfluence(0.7),
        PowerLawInfluence(2.0, 1.5),
        OscillatingInfluence(0.1, 2.0, 3.0),
        TabulatedInfluence(((0, 1), (0.5, 4), (3, 0.2), (10, 0.05))),
    ],
    ids=lambda psi: psi.family,
)
def test_influence_is_positive_and_bounded(psi):
    rng = np.random.default_rng(2024)
    r = np.concatenate([rng.uniform(0.0, 20.0, 5_000), 10.0 ** rng.uniform(-6.0, 4.0, 5_000)])
    values = psi(r)
    assert values.shape == r.shape
    assert np.all(values > 0)
    assert np.all(values <= psi.sup_norm * (1 + 1e-12))
    for radius in r[::50]:
        assert psi.min_on(radius) <= float(psi(radius)) * (1 + 1e-12)
