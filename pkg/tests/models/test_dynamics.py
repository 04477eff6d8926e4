import numpy as np
import pytest

from flockdelay.exceptions import ConfigError
from flockdelay.history import TrajectoryHistory
from flockdelay.models.delays import (
    ConstantDelay,
    DistributedDelay,
    DistributedDelayKernel,
    ExponentialWeight,
    LinearWeight,
    PointwiseDelay,
)
from flockdelay.models.dynamics import rate_matrix, rhs, rhs_distributed, rhs_pointwise
from flockdelay.models.influence import PowerLawInfluence
from flockdelay.models.initial import ConstantInitial, LinearInitial
from flockdelay.models.system import CouplingMode
from flockdelay.schedules import BlackoutList, WeightSchedule
from flockdelay.utils import cloud_diameter


def _state(cfg):
    return tuple(np.asarray(a) for a in cfg.initial.state(0.0))


def test_rate_matrix_has_zero_diagonal():
    positions = np.array([[0.0], [1.0], [3.0]])
    rates = rate_matrix(PowerLawInfluence(1.0, 1.0), positions, positions)
    assert np.all(np.diag(rates) == 0)
    assert rates[0, 1] == pytest.approx(0.25)
    assert rates[0, 2] == pytest.approx(0.05)


def test_rhs_pointwise_zero_delay(two_agents):
    cfg = two_agents()
    history = TrajectoryHistory(cfg.initial, cfg.tau_bar)
    x_dot, v_dot = rhs_pointwise(0.0, _state(cfg), history, cfg)
    assert x_dot[:, 0] == pytest.approx([0.5, -0.5])
    assert v_dot[:, 0] == pytest.approx([-1.0, 1.0])


def test_rhs_pointwise_equal_velocities(two_agents):
    cfg = two_agents(
        tau=0.5, influence=PowerLawInfluence(1.0, 0.4), initial=ConstantInitial([[0.0], [3.0]], [[0.2], [0.2]])
    )
    history = TrajectoryHistory(cfg.initial, cfg.tau_bar)
    _, v_dot = rhs(0.0, _state(cfg), history, cfg)
    assert np.all(v_dot == 0)


def test_rhs_blackout_freezes_velocities(two_agents):
    cfg = two_agents(schedule=WeightSchedule(BlackoutList(((0.0, 1.0),))), t_end=2.0)
    history = TrajectoryHistory(cfg.initial, cfg.tau_bar)
    _, v_dot = rhs(0.5, _state(cfg), history, cfg)
    assert np.all(v_dot == 0)
    # an explicit weight overrides the schedule
    _, v_dot = rhs(0.5, _state(cfg), history, cfg, alpha=1.0)
    assert v_dot[:, 0] == pytest.approx([-1.0, 1.0])


def test_rhs_literal_position_coupling(two_agents):
    cfg = two_agents(
        initial=ConstantInitial([[0.0], [2.0]], [[0.0], [0.0]]), coupling=CouplingMode.LITERAL_POSITION
    )
    history = TrajectoryHistory(cfg.initial, cfg.tau_bar)
    _, v_dot = rhs(0.0, _state(cfg), history, cfg)
    assert v_dot[:, 0] == pytest.approx([2.0, -2.0])


def test_rhs_distributed_constant_history(two_agents):
    kernel = DistributedDelayKernel(ConstantDelay(0.0), ConstantDelay(1.0), LinearWeight(0.0, 1.0))
    cfg = two_agents(delay=DistributedDelay(kernel, 1.0))
    history = TrajectoryHistory(cfg.initial, cfg.tau_bar)
    _, v_dot = rhs_distributed(0.0, _state(cfg), history, cfg)
    assert v_dot[:, 0] == pytest.approx([-1.0, 1.0])


def test_rhs_distributed_shared_velocity(two_agents):
    kernel = DistributedDelayKernel(ConstantDelay(0.1), ConstantDelay(0.5), LinearWeight(1.0, 1.0))
    cfg = two_agents(
        delay=DistributedDelay(kernel, 0.5),
        influence=PowerLawInfluence(1.0, 1.0),
        initial=ConstantInitial([[0.0], [1.0]], [[0.3], [0.3]]),
    )
    history = TrajectoryHistory(cfg.initial, cfg.tau_bar)
    _, v_dot = rhs(0.0, _state(cfg), history, cfg)
    assert np.allclose(v_dot, 0.0)


def test_distributed_model_rejects_position_coupling(two_agents):
    kernel = DistributedDelayKernel(ConstantDelay(0.0), ConstantDelay(1.0), LinearWeight(0.0, 1.0))
    with pytest.raises(ConfigError):
        two_agents(delay=DistributedDelay(kernel, 1.0), coupling=CouplingMode.LITERAL_POSITION)


def _exponential_window(nodes=8):
    kernel = DistributedDelayKernel(ConstantDelay(0.1), ConstantDelay(0.8), ExponentialWeight(1.0), nodes=nodes)
    return DistributedDelay(kernel, 0.8)


@pytest.mark.parametrize("distributed", [False, True], ids=["pointwise", "distributed"])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_acceleration_bounded_by_velocity_spread(two_agents, distributed, seed):
    rng = np.random.default_rng(seed)
    past_velocities = rng.normal(size=(6, 2))
    cfg = two_agents(
        n_agents=6,
        dim=2,
        delay=_exponential_window() if distributed else PointwiseDelay(ConstantDelay(0.3), 0.3),
        influence=PowerLawInfluence(2.0, 0.7),
        initial=ConstantInitial(rng.normal(scale=3.0, size=(6, 2)), past_velocities),
    )
    history = TrajectoryHistory(cfg.initial, cfg.tau_bar)
    current = (rng.normal(scale=3.0, size=(6, 2)), rng.normal(size=(6, 2)))
    _, v_dot = rhs(0.0, current, history, cfg)
    spread = cloud_diameter(np.concatenate([current[1], past_velocities]))
    assert np.all(np.linalg.norm(v_dot, axis=1) <= 2.0 * spread * (1 + 1e-9))
    assert np.any(v_dot != 0)


def test_distributed_quadrature_converges_in_node_count(two_agents):
    initial = LinearInitial(
        [[0.0], [1.5], [4.0]], [[0.2], [-0.1], [0.05]], [[0.2], [-0.1], [0.05]], [[0.3], [-0.2], [0.1]]
    )
    results = []
    for nodes in (8, 16):
        cfg = two_agents(
            n_agents=3, delay=_exponential_window(nodes), influence=PowerLawInfluence(1.0, 0.4), initial=initial
        )
        history = TrajectoryHistory(cfg.initial, cfg.tau_bar)
        _, v_dot = rhs_distributed(0.0, _state(cfg), history, cfg)
        results.append(v_dot)
    assert np.abs(results[0]).max() > 1e-3
    assert results[0] == pytest.approx(results[1], abs=1e-10)
