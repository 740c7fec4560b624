"""Probability functions, loss table and stage-weight integrals.

Everything here is a pure function of its arguments.  The user and attacker
"probabilities" are evaluated exactly as written, without clamping, so they
may leave [0, 1] for large thresholds; :func:`valid_domain` reports the
largest threshold for which both stay non-negative.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from .errors import DivergentIntegral, InvalidParameter, UnsupportedExponent

# Rates below this magnitude are treated as exactly zero.
RATE_CUTOFF = 1e-12


@dataclass(frozen=True)
class CurvatureParams:
    """Curvatures of the user (``a``) and attacker (``b``) access probabilities."""

    a: float
    b: float
    k: float = 2.0

    def __post_init__(self):
        for name in ("a", "b", "k"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise InvalidParameter(f"{name} must be a positive finite real, got {value!r}")

    def require_quadratic(self) -> None:
        if self.k != 2:
            raise UnsupportedExponent(f"closed forms require k = 2, got k = {self.k}")


class Regime(enum.Enum):
    DECAY = "decay"
    GROWTH = "growth"

    @property
    def sign(self) -> int:
        """Exponent sign of the attacker factor e^{sign * gamma * t}."""
        return -1 if self is Regime.DECAY else 1


@dataclass(frozen=True)
class DecayParams:
    lam: float
    gamma: float
    regime: Regime = Regime.DECAY

    def __post_init__(self):
        if isinstance(self.regime, str):
            object.__setattr__(self, "regime", Regime(self.regime))
        for name in ("lam", "gamma"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise InvalidParameter(f"{name} must be a non-negative finite real, got {value!r}")

    @property
    def attacker_rate(self) -> float:
        """Decay rate of the combined factor e^{-lam t} e^{+-gamma t}."""
        if self.regime is Regime.DECAY:
            return self.lam + self.gamma
        return self.lam - self.gamma


@dataclass(frozen=True)
class StageInterval:
    start: float
    end: float = math.inf

    def __post_init__(self):
        if not (math.isfinite(self.start) and self.start >= 0):
            raise InvalidParameter(f"stage start must be finite and >= 0, got {self.start!r}")
        if math.isnan(self.end) or not self.end > self.start:
            raise InvalidParameter(f"stage end {self.end!r} must exceed start {self.start!r}")

    @property
    def infinite(self) -> bool:
        return math.isinf(self.end)

    @property
    def length(self) -> float:
        return self.end - self.start


class StageWeights(NamedTuple):
    y: float
    Z: float


# Loss per (theta_u, theta_a) state, as a multiple of V.
_LOSS_FRACTION = {(1, 0): 0.0, (0, 1): 1.0, (0, 0): 1.0, (1, 1): 0.5}


def state_loss(theta_u: int, theta_a: int, V: float) -> float:
    """Loss in state (theta_u, theta_a): 1 means that party clears the threshold."""
    try:
        return _LOSS_FRACTION[(theta_u, theta_a)] * V
    except KeyError:
        raise InvalidParameter(f"no such state ({theta_u}, {theta_a})") from None


def state_probabilities(p: float, q: float) -> Iterator[tuple[tuple[int, int], float]]:
    """Yield ((theta_u, theta_a), probability) for independent user/attacker access."""
    for theta_u in (1, 0):
        pu = p if theta_u else 1.0 - p
        for theta_a in (1, 0):
            pa = q if theta_a else 1.0 - q
            yield (theta_u, theta_a), pu * pa


def p_of(tau: float, params: CurvatureParams) -> float:
    return 1.0 - (params.a / params.k) * tau**params.k


def q_of(tau: float, params: CurvatureParams) -> float:
    return 1.0 - (params.b / params.k) * tau**params.k


def valid_domain(params: CurvatureParams) -> float:
    """Largest threshold in [0, 1] at which the attacker probability is still >= 0."""
    return min(1.0, (params.k / params.b) ** (1.0 / params.k))


def expected_static_loss(tau: float, params: CurvatureParams, V: float) -> float:
    """Attack loss (V/2) p q plus user lockout loss V (1 - p)."""
    if not V > 0:
        raise InvalidParameter(f"V must be positive, got {V!r}")
    p = p_of(tau, params)
    q = q_of(tau, params)
    return 0.5 * V * p * q + V * (1.0 - p)


def expected_loss_from_table(tau: float, params: CurvatureParams, V: float) -> float:
    """Same quantity as :func:`expected_static_loss`, summed state by state."""
    p = p_of(tau, params)
    q = q_of(tau, params)
    return sum(prob * state_loss(*state, V) for state, prob in state_probabilities(p, q))


def exp_integral(rate: float, start: float, end: float) -> float:
    """Integral of e^{-rate t} over [start, end]; ``end`` may be infinite."""
    if math.isinf(end):
        if rate < RATE_CUTOFF:
            raise DivergentIntegral(
                f"integral of exp(-{rate:g} t) over [{start:g}, inf) diverges"
            )
        return math.exp(-rate * start) / rate
    if abs(rate) < RATE_CUTOFF:
        return end - start
    return math.exp(-rate * start) * -math.expm1(-rate * (end - start)) / rate


def stage_weights(interval: StageInterval, decay: DecayParams) -> StageWeights:
    """Stage integrals y (user factor) and Z (user times attacker factor)."""
    y = exp_integral(decay.lam, interval.start, interval.end)
    if decay.gamma == 0:
        return StageWeights(y, y)
    return StageWeights(y, exp_integral(decay.attacker_rate, interval.start, interval.end))


def stage_weights_array(starts, ends, decay: DecayParams) -> StageWeights:
    """Vectorised :func:`stage_weights` over intervals ``[starts, ends]``."""
    starts = np.asarray(starts, dtype=float)
    ends = np.asarray(ends, dtype=float)

    def integral(rate):
        if abs(rate) < RATE_CUTOFF:
            return ends - starts
        return np.exp(-rate * starts) * -np.expm1(-rate * (ends - starts)) / rate

    y = integral(decay.lam)
    if decay.gamma == 0:
        return StageWeights(y, y)
    return StageWeights(y, integral(decay.attacker_rate))
