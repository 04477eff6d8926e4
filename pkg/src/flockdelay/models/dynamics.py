"""Right-hand sides of the pointwise and the distributed delay systems."""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np
from scipy.spatial.distance import cdist

from flockdelay.models.delays import DistributedDelay, PointwiseDelay
from flockdelay.models.system import CouplingMode

if TYPE_CHECKING:
    from flockdelay._types import FloatArray, State, StateLookup
    from flockdelay.models.influence import InfluenceFunction
    from flockdelay.models.system import SystemConfig


def rate_matrix(psi: InfluenceFunction, positions: FloatArray, delayed_positions: FloatArray) -> FloatArray:
    """b_ij = psi(|x_i - x_j(delayed)|) / (N - 1), with a zero diagonal."""
    n_agents = len(positions)
    rates = psi(cdist(positions, delayed_positions)) / (n_agents - 1)
    np.fill_diagonal(rates, 0.0)
    return rates


def _alpha(cfg: SystemConfig, t: float, alpha: float | None) -> float:
    return float(cfg.schedule.value(t)) if alpha is None else alpha


def rhs_pointwise(
    t: float, current: State, history: StateLookup, cfg: SystemConfig, alpha: float | None = None
) -> State:
    """Derivatives (x', v') of every agent under the pointwise lag tau(t).

    ``alpha`` overrides the schedule value, the integrator passes the value of the step.
    """
    assert isinstance(cfg.delay, PointwiseDelay)
    positions, velocities = current
    weight = _alpha(cfg, t, alpha)
    if weight == 0.0:
        return velocities, np.zeros_like(velocities)
    lag = float(cfg.delay.lag(t))
    if lag == 0.0:
        delayed_positions, delayed_velocities = positions, velocities
    else:
        delayed_positions, delayed_velocities = history.sample(t - lag)
    rates = rate_matrix(cfg.influence, positions, delayed_positions)
    if cfg.coupling is CouplingMode.LITERAL_POSITION:
        own, others = positions, delayed_positions
    else:
        own, others = velocities, delayed_velocities
    acceleration = weight * (rates @ others - rates.sum(axis=1, keepdims=True) * own)
    return velocities, acceleration


def rhs_distributed(
    t: float, current: State, history: StateLookup, cfg: SystemConfig, alpha: float | None = None
) -> State:
    """Derivatives (x', v') under the normalized beta-weighted lookback window."""
    assert isinstance(cfg.delay, DistributedDelay)
    positions, velocities = current
    weight = _alpha(cfg, t, alpha)
    if weight == 0.0:
        return velocities, np.zeros_like(velocities)
    normalizer = cfg.delay.normalizer(t)
    lags, weights = cfg.delay.quadrature(t)
    node_positions, node_velocities = history.sample_many(t - lags)
    acceleration = np.zeros_like(velocities)
    for node_weight, x_node, v_node in zip(weights, node_positions, node_velocities):
        rates = rate_matrix(cfg.influence, positions, x_node)
        acceleration += node_weight * (rates @ v_node - rates.sum(axis=1, keepdims=True) * velocities)
    return velocities, (weight / normalizer) * acceleration


def rhs(t: float, current: State, history: StateLookup, cfg: SystemConfig, alpha: float | None = None) -> State:
    if cfg.distributed:
        return rhs_distributed(t, current, history, cfg, alpha)
    return rhs_pointwise(t, current, history, cfg, alpha)
