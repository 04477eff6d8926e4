"""Contraction constants, decay rates and the implicit position bound.

Every quantity here works for both delay models: for the distributed model the
initial constants are R_0^V, N_0^X and F_0 and the contraction factors are the
gamma_n, computed by the very same formulas.
"""

from __future__ import annotations

import math
from typing import TYPE_CHECKING, NamedTuple

import numpy as np
from scipy.integrate import cumulative_simpson, simpson
from scipy.optimize import bisect

from flockdelay.exceptions import ConfigError, DomainError
from flockdelay.termui import logger

if TYPE_CHECKING:
    from numpy.typing import ArrayLike

    from flockdelay._types import FloatArray
    from flockdelay.models.influence import InfluenceFunction

# refinement stops once the relative change drops below this
INTEGRAL_TOLERANCE = 1e-10
MAX_INTERVALS = 2**20
# the position bound search gives up beyond this many multiples of its start
SATURATION_FACTOR = 1e12
# the quadrature grid is uniform on [0, KNEE] and geometric beyond
KNEE = 64.0


class Contraction(NamedTuple):
    star: float
    full: float


def phi_lower_bound(psi: InfluenceFunction, upper: float) -> float:
    """phi = min of psi over [0, upper], the lower bound of every communication rate."""
    if upper < 0:
        raise DomainError(f"phi needs a nonnegative distance bound, got {upper}")
    return float(psi.min_on(upper))


def contraction_constants(
    sup_norm: float, window: float, tau_bar: float, alpha_tilde: float, phi: float
) -> Contraction:
    """C*_n = min{e^{-K(T + tau_bar)}, e^{-KT} phi alpha_tilde} and C_n = e^{-KT} C*_n."""
    if not sup_norm > 0:
        raise ConfigError(f"the sup norm of psi must be positive, got {sup_norm}")
    if not window > 0:
        raise ConfigError(f"the persistence window must be positive, got {window}")
    if not alpha_tilde > 0:
        raise ConfigError(f"alpha_tilde must be positive, got {alpha_tilde}")
    if alpha_tilde > window:
        raise ConfigError(f"alpha_tilde {alpha_tilde} cannot exceed the window {window}")
    if not phi > 0:
        raise ConfigError(f"phi must be positive, got {phi}")
    damping = math.exp(-sup_norm * window)
    star = min(math.exp(-sup_norm * (window + tau_bar)), damping * phi * alpha_tilde)
    return Contraction(star, damping * star)


def decay_rate(contraction: float, window: float) -> float:
    """mu = -log(1 - C) / (3T)."""
    if not 0 < contraction < 1:
        raise ConfigError(f"the contraction constant must lie in (0, 1), got {contraction}")
    if not window > 0:
        raise ConfigError(f"the persistence window must be positive, got {window}")
    return -math.log1p(-contraction) / (3 * window)


class PositionIntegral:
    """G(U): the integral over [0, U] of min{e^{-K(T + tau_bar)}, e^{-KT} alpha_tilde min_{[0, r]} psi}.

    The inner minimum is kept as a running minimum along the quadrature grid,
    which is doubled until the integral settles.
    """

    def __init__(
        self, psi: InfluenceFunction, window: float, tau_bar: float, alpha_tilde: float
    ) -> None:
        self.psi = psi
        self.sup_norm = psi.sup_norm
        self.cap = math.exp(-self.sup_norm * (window + tau_bar))
        self.scale = math.exp(-self.sup_norm * window) * alpha_tilde
        #: the factor e^{-KT} / 3 in front of G in the Lyapunov functional
        self.prefactor = math.exp(-self.sup_norm * window) / 3

    def integrand(self, grid: FloatArray) -> FloatArray:
        """The integrand on an increasing grid starting at 0."""
        running = np.minimum.accumulate(self.psi(grid))
        return np.minimum(self.cap, self.scale * running)

    @staticmethod
    def _nodes(upper: float, intervals: int) -> FloatArray:
        knee = min(upper, KNEE)
        grid = np.linspace(0.0, knee, intervals + 1)
        if upper > knee:
            grid = np.concatenate([grid, np.geomspace(knee, upper, intervals + 1)[1:]])
        return grid

    def _grid(self, upper: float) -> tuple[FloatArray, FloatArray]:
        intervals = 256
        grid = self._nodes(upper, intervals)
        values = self.integrand(grid)
        total = simpson(values, x=grid)
        while intervals < MAX_INTERVALS:
            intervals *= 2
            finer = self._nodes(upper, intervals)
            finer_values = self.integrand(finer)
            refined = simpson(finer_values, x=finer)
            grid, values = finer, finer_values
            if abs(refined - total) <= INTEGRAL_TOLERANCE * max(abs(refined), 1e-300):
                break
            total = refined
        return grid, values

    def __call__(self, upper: float) -> float:
        if upper < 0:
            raise DomainError(f"the position integral needs a nonnegative bound, got {upper}")
        if upper == 0:
            return 0.0
        grid, values = self._grid(upper)
        return float(simpson(values, x=grid))

    def cumulative(self, uppers: ArrayLike) -> FloatArray:
        """G at every bound in ``uppers`` from one shared grid."""
        bounds = np.asarray(uppers, dtype=float)
        top = float(bounds.max(initial=0.0))
        if top <= 0:
            return np.zeros_like(bounds)
        grid, values = self._grid(top)
        running = cumulative_simpson(values, x=grid, initial=0.0)
        return np.interp(bounds, grid, running)


def position_bound(integral: PositionIntegral, budget: float, start: float) -> float:
    """The d* solving prefactor * G(d*) = budget, searched upward from ``start``.

    Returns inf when G saturates below the budget, which only happens for a psi
    whose running minimum is integrable.
    """

    def excess(d: float) -> float:
        return integral.prefactor * integral(d) - budget

    low = max(start, 0.0)
    if excess(low) >= 0:
        return low
    high = max(2 * low, 1.0)
    while excess(high) < 0:
        high *= 2
        if high > SATURATION_FACTOR * max(low, 1.0):
            logger.debug("Position integral saturates below %g", budget)
            return math.inf
    return float(bisect(excess, low, high, xtol=INTEGRAL_TOLERANCE * high))
