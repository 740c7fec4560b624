"""Brute-force and quadrature counterparts of the closed forms.

Nothing in this module calls the static or dynamic closed-form routines it is
used to check; it depends on :mod:`multisig_opt.model` only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy import integrate

from .errors import DivergentIntegral, InvalidParameter, NoFeasibleSchedule
from .model import (
    CurvatureParams,
    DecayParams,
    StageInterval,
    expected_static_loss,
    p_of,
    q_of,
    stage_weights,
    stage_weights_array,
)
from .schedule import Schedule

# Infinite tails are cut where the integrand falls below this fraction of its
# value at the lower limit.
TAIL_CUTOFF = 1e-14


@dataclass(frozen=True)
class GridSpec:
    lo: float
    hi: float
    step: float | None = None
    points: int | None = None

    def __post_init__(self):
        if not self.lo < self.hi:
            raise InvalidParameter(f"grid needs lo < hi, got [{self.lo}, {self.hi}]")
        if (self.step is None) == (self.points is None):
            raise InvalidParameter("give exactly one of step or points")
        if self.step is not None and not self.step > 0:
            raise InvalidParameter("grid step must be positive")
        if len(self.values()) < 2:
            raise InvalidParameter("grid must have at least 2 points")

    def values(self) -> np.ndarray:
        if self.points is not None:
            return np.linspace(self.lo, self.hi, self.points)
        count = int(math.floor((self.hi - self.lo) / self.step + 1e-9)) + 1
        return self.lo + self.step * np.arange(count)

    @property
    def spacing(self) -> float:
        if self.step is not None:
            return self.step
        return (self.hi - self.lo) / (self.points - 1)


def grid_minimize_static(params: CurvatureParams, V: float, grid: GridSpec) -> float:
    """Exhaustive argmin of the static expected loss; ties go to the smaller tau."""
    if grid.lo < 0 or grid.hi > 1:
        raise InvalidParameter("static grid must lie within [0, 1]")
    taus = grid.values()
    losses = expected_static_loss(taus, params, V)
    # np.argmin returns the first (smallest-tau) index among ties.
    return float(taus[int(np.argmin(losses))])


@dataclass(frozen=True)
class IntegrandSpec:
    """e^{-lam t} times, when ``attacker`` is set, the attacker factor of ``decay``."""

    decay: DecayParams
    interval: StageInterval
    attacker: bool = True

    def __call__(self, t: float) -> float:
        value = math.exp(-self.decay.lam * t)
        if self.attacker:
            value *= math.exp(self.decay.regime.sign * self.decay.gamma * t)
        return value


class QuadResult(NamedTuple):
    value: float
    truncated_at: float | None


def quadrature(spec: IntegrandSpec, tol: float = 1e-10) -> QuadResult:
    """Adaptive quadrature of ``spec`` over its interval.

    Infinite upper limits are handled by integrating over doubling panels until
    the integrand drops below ``TAIL_CUTOFF`` times its starting value; the
    cut point is returned alongside the estimate.
    """
    start, end = spec.interval.start, spec.interval.end
    if not spec.interval.infinite:
        value, _ = integrate.quad(spec, start, end, epsabs=0.0, epsrel=tol, limit=200)
        return QuadResult(value, None)

    f0 = spec(start)
    total = 0.0
    lo, width = start, 1.0
    try:
        while True:
            hi = lo + width
            piece, _ = integrate.quad(spec, lo, hi, epsabs=0.0, epsrel=tol, limit=200)
            total += piece
            if spec(hi) < TAIL_CUTOFF * f0:
                return QuadResult(total, hi)
            if width > 1e12:
                break
            lo, width = hi, 2.0 * width
    except OverflowError:
        pass
    raise DivergentIntegral(f"integrand does not decay on [{start:g}, inf)")


def _stage_term(tau, weights, params: CurvatureParams, V: float):
    p = p_of(tau, params)
    return 0.5 * V * weights.Z * p * q_of(tau, params) - V * weights.y * p


def _objective(taus, edges, params, decay, V) -> float:
    total = 0.0
    for tau, lo, hi in zip(taus, edges, edges[1:]):
        total += _stage_term(tau, stage_weights(StageInterval(lo, hi), decay), params, V)
    return total


def _time_span(decay: DecayParams, horizon: float) -> float:
    if math.isfinite(horizon):
        return horizon
    slowest = min(decay.lam, decay.attacker_rate)
    if slowest <= 0:
        raise DivergentIntegral("infinite horizon needs positive decay rates")
    return 40.0 / slowest


def direct_minimize_schedule(
    n: int,
    params: CurvatureParams,
    decay: DecayParams,
    V: float = 1.0,
    horizon: float = math.inf,
    points: int = 400,
    rounds: int = 3,
    max_sweeps: int = 200,
) -> Schedule:
    """Coordinate-descent grid search over (taus, boundaries) with window refinement.

    Each round sweeps every coordinate with a ``points``-point grid centred on
    its current value until no coordinate moves; the next round shrinks each
    window to four grid steps either side.  Round 0 searches full ranges.
    """
    if not 1 <= n <= 3:
        raise InvalidParameter("the grid oracle supports 1 <= n <= 3 stages")
    span = _time_span(decay, horizon)
    right_end = horizon if math.isfinite(horizon) else span
    best = None
    # Once adjacent thresholds coincide the boundary between them is flat, so a
    # single descent can stall; restart from several boundary placements.
    for scale in _START_SCALES:
        bounds = [right_end * scale * (i + 1) / max(1, n - 1) for i in range(n - 1)]
        cand = _descend(n, params, decay, V, horizon, span, bounds, points, rounds, max_sweeps)
        if best is None or cand.objective < best.objective:
            best = cand
    return best


_START_SCALES = (0.005, 0.02, 0.08, 0.3)


def _descend(n, params, decay, V, horizon, span, bounds, points, rounds, max_sweeps) -> Schedule:
    taus = [0.5] * n
    tau_width = [1.0] * n
    bound_width = [span] * (n - 1)

    def edges_with(boundaries):
        return (0.0, *boundaries, horizon)

    def search_tau(i, width):
        lo, hi = max(0.0, taus[i] - width), min(1.0, taus[i] + width)
        cand = np.linspace(lo, hi, points)
        edges = edges_with(bounds)
        w = stage_weights(StageInterval(edges[i], edges[i + 1]), decay)
        vals = _stage_term(cand, w, params, V)
        return float(cand[int(np.argmin(vals))]), (hi - lo) / (points - 1)

    def search_bound(j, width):
        left = bounds[j - 1] if j > 0 else 0.0
        right = bounds[j + 1] if j + 1 < len(bounds) else (horizon if math.isfinite(horizon) else span)
        lo, hi = max(left, bounds[j] - width), min(right, bounds[j] + width)
        cand = np.linspace(lo, hi, points)
        # Interior points only: a stage of zero length is not a schedule.
        cand = cand[(cand > left) & (cand < right)]
        if cand.size == 0:
            return bounds[j], (hi - lo) / (points - 1)
        edges = edges_with(bounds)
        before = stage_weights_array(edges[j], cand, decay)
        after = stage_weights_array(cand, edges[j + 2], decay)
        vals = (_stage_term(taus[j], before, params, V)
                + _stage_term(taus[j + 1], after, params, V))
        best = float(cand[int(np.argmin(vals))])
        return best, (hi - lo) / (points - 1)

    tau_step = [0.0] * n
    bound_step = [0.0] * (n - 1)
    for r in range(rounds + 1):
        if r > 0:
            tau_width = [4.0 * s for s in tau_step]
            bound_width = [4.0 * s for s in bound_step]
        for _ in range(max_sweeps):
            moved = False
            for i in range(n):
                new, tau_step[i] = search_tau(i, tau_width[i])
                moved |= abs(new - taus[i]) > 0.5 * tau_step[i]
                taus[i] = new
            for j in range(n - 1):
                new, bound_step[j] = search_bound(j, bound_width[j])
                moved |= abs(new - bounds[j]) > 0.5 * bound_step[j]
                bounds[j] = new
            if not moved:
                break

    objective = _objective(taus, edges_with(bounds), params, decay, V)
    if not math.isfinite(objective):
        raise NoFeasibleSchedule("grid search found no finite objective")
    return Schedule(
        taus=tuple(taus),
        boundaries=tuple(bounds),
        horizon=horizon,
        objective=objective,
        method="grid",
    )


def finite_diff(func: Callable[[float], float], at: float, h: float) -> float:
    """Central difference (f(at + h) - f(at - h)) / 2h."""
    return (func(at + h) - func(at - h)) / (2.0 * h)
