"""Multi-stage (time-locked) threshold schedules under exponential decay.

The objective minimised here is the *reduced* objective

    sum_i (V/2) Z_i p(tau_i) q(tau_i) - V y_i p(tau_i)

i.e. the full expected-loss integral without its tau-independent term
V * integral(1 dt), which diverges on an infinite horizon.  Dropping it leaves
every optimum unchanged.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

from . import oracle
from .errors import (
    DegenerateThresholds,
    DivergentIntegral,
    GammaNotBelowLambda,
    InvalidLogArgument,
    InvalidParameter,
    NoFeasibleSchedule,
    ZeroGamma,
)
from .model import (
    CurvatureParams,
    DecayParams,
    Regime,
    StageInterval,
    StageWeights,
    p_of,
    q_of,
    stage_weights,
    valid_domain,
)
from .schedule import Schedule
from .static_opt import StaticSolution, radicand_to_threshold

log = logging.getLogger(__name__)


class StageThreshold(NamedTuple):
    tau: float
    corner: bool
    clamped: bool
    radicand: float


class DiffQuantities(NamedTuple):
    f: float  # 2 (p(tau_prev) - p(tau_next))
    g: float  # p q at tau_prev minus p q at tau_next


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-9
    max_iter: int = 200
    horizon: float = math.inf
    fallback_grid: int = 400
    damping: float = 0.5

    def __post_init__(self):
        if not self.tol > 0:
            raise InvalidParameter("tol must be positive")
        if self.max_iter < 1:
            raise InvalidParameter("max_iter must be >= 1")
        if not self.horizon > 0:
            raise InvalidParameter("horizon must be positive")
        if not 0 < self.damping <= 1:
            raise InvalidParameter("damping must lie in (0, 1]")


def stage_threshold(weights: StageWeights, params: CurvatureParams) -> StageThreshold:
    """Per-stage minimiser sqrt((b + a (1 - 2y/Z)) / (ab)), clipped to [0, 1]."""
    params.require_quadratic()
    a, b = params.a, params.b
    radicand = (b + a * (1 - 2 * weights.y / weights.Z)) / (a * b)
    tau, corner, clamped = radicand_to_threshold(radicand)
    return StageThreshold(tau, corner, clamped, radicand)


def stage_sosc(tau: float, weights: StageWeights, params: CurvatureParams, V: float = 1.0) -> bool:
    """Second derivative of one stage's reduced objective is positive at ``tau``."""
    a, b = params.a, params.b
    return 0.5 * V * (weights.Z * (3 * a * b * tau * tau - a - b) + 2 * a * weights.y) > 0


def diff_quantities(tau_prev: float, tau_next: float, params: CurvatureParams) -> DiffQuantities:
    p0, p1 = p_of(tau_prev, params), p_of(tau_next, params)
    return DiffQuantities(
        f=2.0 * (p0 - p1),
        g=p0 * q_of(tau_prev, params) - p1 * q_of(tau_next, params),
    )


def timelock_residual(
    T: float, tau_prev: float, tau_next: float, params: CurvatureParams, decay: DecayParams
) -> float:
    """Boundary stationarity e^{-+gamma T} g - f; zero at an optimal switch time."""
    f, g = diff_quantities(tau_prev, tau_next, params)
    return math.exp(decay.regime.sign * decay.gamma * T) * g - f


def optimal_timelock(
    tau_prev: float, tau_next: float, params: CurvatureParams, decay: DecayParams
) -> float:
    """Switch time solving the boundary condition for fixed adjacent thresholds.

    Decay regime: e^{-gamma T} g = f, so T = ln(g/f) / gamma.
    Growth regime: e^{+gamma T} g = f, so T = ln(f/g) / gamma.
    """
    params.require_quadratic()
    if decay.gamma == 0:
        raise ZeroGamma("switch time is undefined when gamma = 0")
    if tau_prev == tau_next:
        raise DegenerateThresholds(f"adjacent thresholds are equal ({tau_prev})")
    f, g = diff_quantities(tau_prev, tau_next, params)
    if f == 0:
        raise DegenerateThresholds("adjacent thresholds give identical user access")
    ratio = g / f
    if not (ratio > 0 and math.isfinite(ratio)):
        raise InvalidLogArgument(f"g/f = {ratio:g} admits no switch time")
    return -decay.regime.sign * math.log(ratio) / decay.gamma


def _check_horizon(decay: DecayParams, horizon: float) -> None:
    if math.isfinite(horizon):
        return
    if decay.lam <= 0:
        raise DivergentIntegral("infinite horizon requires lambda > 0")
    if decay.regime is Regime.GROWTH and decay.gamma >= decay.lam:
        raise DivergentIntegral(
            "attacker growth with gamma >= lambda diverges on an infinite horizon; "
            "pass a finite horizon"
        )


def _stage_value(tau: float, weights: StageWeights, params: CurvatureParams, V: float) -> float:
    p = p_of(tau, params)
    return 0.5 * V * weights.Z * p * q_of(tau, params) - V * weights.y * p


def reduced_objective(
    schedule: Schedule, params: CurvatureParams, decay: DecayParams, V: float = 1.0
) -> float:
    _check_horizon(decay, schedule.horizon)
    return sum(
        _stage_value(tau, stage_weights(iv, decay), params, V)
        for tau, iv in zip(schedule.taus, schedule.intervals)
    )


def benchmark_threshold(
    params: CurvatureParams, decay: DecayParams, horizon: float = math.inf, V: float = 1.0
) -> StaticSolution:
    """Best single threshold held over the whole horizon."""
    params.require_quadratic()
    _check_horizon(decay, horizon)
    weights = stage_weights(StageInterval(0.0, horizon), decay)
    stage = stage_threshold(weights, params)
    return StaticSolution(
        tau_star=stage.tau,
        loss_at_opt=_stage_value(stage.tau, weights, params, V),
        sosc_holds=stage_sosc(stage.tau, weights, params, V),
        domain_warning=stage.tau > valid_domain(params),
        corner=stage.corner,
        clamped=stage.clamped,
        unclamped=None if stage.corner else math.sqrt(stage.radicand),
    )


def degradation_min_step(decay: DecayParams) -> float:
    """Bound on T_i - T_{i-2} separating degrading from non-degrading stage triples.

    Decay regime: the minimum step |ln(lam / (gamma + lam)) / gamma|.
    Growth regime (0 < gamma < lam): the upper bound |ln((lam - gamma) / lam) / gamma|.
    """
    gamma, lam = decay.gamma, decay.lam
    if gamma == 0:
        raise ZeroGamma("the step bound needs gamma > 0")
    if decay.regime is Regime.DECAY:
        if lam == 0:
            return math.inf
        return abs(math.log(lam / (gamma + lam)) / gamma)
    if not gamma < lam:
        raise GammaNotBelowLambda(f"growth bound needs gamma < lambda, got {gamma} >= {lam}")
    return abs(math.log((lam - gamma) / lam) / gamma)


# Multipliers of the natural time scale used to seed the fixed point.  Several
# seeds are needed because equal adjacent thresholds (both corner or both
# clamped) leave their switch time free, which stalls a single start.
_SEED_SCALES = (0.05, 0.15, 0.35, 0.6, 1.0)


def _initial_boundaries(n: int, decay: DecayParams, horizon: float) -> list[list[float]]:
    if math.isfinite(horizon):
        span = horizon
    else:
        span = 2.0 / min(decay.lam, decay.attacker_rate)
    return [[span * c * i / n for i in range(1, n)] for c in _SEED_SCALES]


def _thresholds(bounds, params, decay, horizon) -> list[StageThreshold]:
    edges = (0.0, *bounds, horizon)
    return [
        stage_threshold(stage_weights(StageInterval(lo, hi), decay), params)
        for lo, hi in zip(edges, edges[1:])
    ]


class _NoFixedPoint(Exception):
    pass


def _boundary_targets(taus, bounds, params, decay, horizon) -> list[float]:
    """Undamped switch times for the given thresholds; flat boundaries stay put."""
    targets = list(bounds)
    for j in range(len(bounds)):
        if taus[j] == taus[j + 1]:
            continue
        try:
            targets[j] = optimal_timelock(taus[j], taus[j + 1], params, decay)
        except (InvalidLogArgument, DegenerateThresholds) as exc:
            raise _NoFixedPoint(str(exc)) from exc
    edges = (0.0, *targets, horizon)
    if any(not hi > lo for lo, hi in zip(edges, edges[1:])):
        raise _NoFixedPoint(f"switch times {targets} are not increasing inside the horizon")
    return targets


def _fixed_point(n, params, decay, horizon, config, bounds):
    taus = [s.tau for s in _thresholds(bounds, params, decay, horizon)]
    for it in range(1, config.max_iter + 1):
        targets = _boundary_targets(taus, bounds, params, decay, horizon)
        new_bounds = [t + config.damping * (target - t) for t, target in zip(bounds, targets)]
        new_taus = [s.tau for s in _thresholds(new_bounds, params, decay, horizon)]
        delta = max(
            max(abs(x - y) for x, y in zip(new_bounds, bounds)),
            max(abs(x - y) for x, y in zip(new_taus, taus)),
        )
        bounds, taus = new_bounds, new_taus
        if delta < config.tol:
            # Final undamped half-step so the switch-time condition holds exactly
            # for the returned thresholds.
            bounds = _boundary_targets(taus, bounds, params, decay, horizon)
            return taus, bounds, it
    raise _NoFixedPoint(f"no convergence within {config.max_iter} iterations")


def _build(taus, bounds, params, decay, horizon, V, method, iterations, converged=True):
    stages = _thresholds(bounds, params, decay, horizon)
    schedule = Schedule(
        taus=tuple(taus),
        boundaries=tuple(bounds),
        horizon=horizon,
        corners=tuple(s.corner for s in stages),
        clamped=tuple(s.clamped for s in stages),
        method=method,
        iterations=iterations,
        converged=converged,
    )
    objective = reduced_objective(schedule, params, decay, V)
    return Schedule(
        taus=schedule.taus,
        boundaries=schedule.boundaries,
        horizon=horizon,
        corners=schedule.corners,
        clamped=schedule.clamped,
        objective=objective,
        method=method,
        iterations=iterations,
        converged=converged,
    )


def solve_schedule(
    n_stages: int,
    params: CurvatureParams,
    decay: DecayParams,
    V: float = 1.0,
    config: SolverConfig | None = None,
) -> Schedule:
    """Optimal n-stage schedule by alternating closed-form updates.

    Given switch times, each stage threshold has a closed form; given adjacent
    thresholds, each switch time does too.  The two are alternated with damped
    switch-time updates.  If that fails to converge, produces an invalid
    switch time, or loses to the single-threshold benchmark, the coordinate
    grid search from :mod:`multisig_opt.oracle` is used instead.
    """
    config = config or SolverConfig()
    params.require_quadratic()
    if n_stages < 1:
        raise InvalidParameter("n_stages must be >= 1")
    horizon = config.horizon
    _check_horizon(decay, horizon)

    if n_stages == 1:
        return _build([benchmark_threshold(params, decay, horizon, V).tau_star], [],
                      params, decay, horizon, V, "closed_form", 0)

    seeds = _initial_boundaries(n_stages, decay, horizon)
    if decay.gamma == 0:
        # y_i = Z_i on every stage, so every threshold is the static optimum and
        # the switch times are irrelevant.
        bounds = seeds[-1]
        taus = [s.tau for s in _thresholds(bounds, params, decay, horizon)]
        return _build(taus, bounds, params, decay, horizon, V, "closed_form", 0)

    benchmark = benchmark_threshold(params, decay, horizon, V).loss_at_opt
    slack = 1e-12 * V
    best = None
    for bounds in seeds:
        try:
            taus, bounds, iterations = _fixed_point(n_stages, params, decay, horizon, config, bounds)
        except _NoFixedPoint as exc:
            log.debug("fixed point from seed failed: %s", exc)
            continue
        result = _build(taus, bounds, params, decay, horizon, V, "fixed_point", iterations)
        if best is None or result.objective < best.objective:
            best = result
    if best is not None and best.objective <= benchmark + slack:
        return best
    log.info("fixed point failed or lost to the benchmark; using grid search")

    if n_stages > 3:
        raise NoFeasibleSchedule(f"fixed point failed and grid search supports n <= 3, got {n_stages}")
    grid = oracle.direct_minimize_schedule(
        n_stages, params, decay, V, horizon, points=config.fallback_grid
    )
    # Polish from the grid point; keep whichever is better.
    try:
        taus, bounds, iterations = _fixed_point(
            n_stages, params, decay, horizon, config, list(grid.boundaries)
        )
        polished = _build(taus, bounds, params, decay, horizon, V, "grid+fixed_point", iterations)
        if polished.objective <= grid.objective + slack:
            return polished
    except _NoFixedPoint:
        pass
    result = _build(grid.taus, grid.boundaries, params, decay, horizon, V, "grid", 0,
                    converged=False)
    if not math.isfinite(result.objective):
        raise NoFeasibleSchedule("no finite schedule found")
    return result
