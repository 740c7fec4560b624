"""Acceptance properties, runnable from the CLI (``verify``) and from pytest.

Each check draws its own random cases from ``numpy.random.default_rng([seed, i])``
so results do not depend on which other checks ran.  ``trials`` overrides the
default number of random draws of every randomised check.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from importlib import resources
from typing import Callable

import numpy as np

from . import oracle
from .dynamic_opt import SolverConfig, benchmark_threshold, solve_schedule, timelock_residual
from .model import CurvatureParams, DecayParams, Regime, StageInterval, stage_weights, valid_domain
from .oracle import GridSpec, IntegrandSpec
from .policy import example_degrading_policy, serialize_policy, threshold_to_m
from .static_opt import check_sosc, foc_residual, optimal_static_threshold
from .sweep import Mode, default_spec, monotonicity_report, run_sweep

GOLDEN_POLICY = "degrading_treasury_policy.json"

# Comparative-statics grid and rates.
STATICS_A = (0.8, 1.0, 1.2, 1.4, 1.6)
STATICS_B = (2.0, 2.5, 3.0, 3.5, 4.0)
DECAY_RATES = (0.1, 0.05)
GROWTH_RATES = (0.05, 0.2)
GROWTH_HORIZON = 20.0


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    elapsed: float = 0.0
    # Report-only checks never fail the suite.
    report_only: bool = False

    def line(self) -> str:
        status = "REPORT" if self.report_only else ("PASS" if self.passed else "FAIL")
        return f"[{status}] {self.name}: {self.detail} ({self.elapsed:.2f}s)"


def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng([seed, stream])


def _interior(tau: float) -> bool:
    return 0.0 < tau < 1.0


def root_formula(a: float, b: float) -> float:
    return math.sqrt((b - a) / (a * b))


def halved_root_formula(a: float, b: float) -> float:
    return math.sqrt((b - a) / (2 * a * b))


# -- static ----------------------------------------------------------------


def check_formula_adjudication(seed: int = 0, trials: int | None = None) -> CheckResult:
    start = time.perf_counter()
    argmin = oracle.grid_minimize_static(CurvatureParams(1.0, 2.5), 1.0, GridSpec(0.0, 1.0, step=1e-5))
    elapsed = time.perf_counter() - start
    d_root = abs(argmin - root_formula(1.0, 2.5))
    d_halved = abs(argmin - halved_root_formula(1.0, 2.5))
    return CheckResult(
        "1 formula adjudication",
        d_root <= 2e-5 and d_halved >= 0.2 and elapsed < 1.0,
        f"grid argmin {argmin:.6f}; |sqrt((b-a)/ab)|={d_root:.1e} (<=2e-5), "
        f"|sqrt((b-a)/2ab)|={d_halved:.3f} (>=0.2)",
        elapsed,
    )


def static_draws(seed: int, count: int) -> list[CurvatureParams]:
    """Random (a, b) with b > a and an optimum inside the valid domain."""
    rng = _rng(seed, 2)
    out = []
    while len(out) < count:
        a = float(rng.uniform(0.2, 5.0))
        b = float(rng.uniform(a, 4.0 * a + 4.0))
        if b > a and root_formula(a, b) <= valid_domain(CurvatureParams(a, b)):
            out.append(CurvatureParams(a, b))
    return out


def check_static_oracle(seed: int = 0, trials: int | None = None) -> CheckResult:
    start = time.perf_counter()
    step = 1e-4
    grid = GridSpec(0.0, 1.0, step=step)
    draws = static_draws(seed, trials or 500)
    worst_gap = worst_foc = 0.0
    for params in draws:
        sol = optimal_static_threshold(params)
        worst_gap = max(worst_gap, abs(sol.tau_star - oracle.grid_minimize_static(params, 1.0, grid)))
        worst_foc = max(worst_foc, abs(foc_residual(sol.tau_star, params)))
    elapsed = time.perf_counter() - start
    return CheckResult(
        "2 static oracle agreement",
        worst_gap <= 2 * step and worst_foc < 1e-9 and elapsed < 10.0,
        f"{len(draws)} draws; max |closed - grid| {worst_gap:.1e} (<= {2 * step:g}), "
        f"max FOC residual {worst_foc:.1e} (< 1e-9)",
        elapsed,
    )


def check_sosc_property(seed: int = 0, trials: int | None = None) -> CheckResult:
    start = time.perf_counter()
    interior = failures = 0
    for params in static_draws(seed, trials or 500):
        sol = optimal_static_threshold(params)
        if sol.corner:
            continue
        interior += 1
        failures += not check_sosc(sol.tau_star, params)
    return CheckResult(
        "3 SOSC at interior optima",
        failures == 0,
        f"{interior} interior optima, {failures} failures",
        time.perf_counter() - start,
    )


def check_static_monotonicity(seed: int = 0, trials: int | None = None) -> CheckResult:
    start = time.perf_counter()
    report = monotonicity_report(run_sweep(default_spec(Mode.STATIC)))
    return CheckResult(
        "4 static sweep monotonicity",
        report.n_violations == 0,
        f"{report.comparisons} comparisons, {report.n_violations} violations, "
        f"{len(report.excluded_cells)} corner/clamped cells excluded",
        time.perf_counter() - start,
    )


# -- stage weights -----------------------------------------------------------


def _weight_cases(rng: np.random.Generator, regime: Regime, count: int):
    cases = []
    for i in range(count):
        kind = i % 5
        start = float(rng.uniform(0.0, 20.0))
        lam = float(rng.uniform(0.01, 0.5))
        gamma = float(rng.uniform(0.0, 0.5))
        end = start + float(rng.uniform(0.1, 30.0))
        if kind == 1:  # infinite tail
            end = math.inf
            if regime is Regime.GROWTH:
                gamma = float(rng.uniform(0.0, 0.9)) * lam
        elif kind == 2 and regime is Regime.GROWTH:  # lambda = gamma
            gamma = lam
        elif kind == 2:  # lambda + gamma -> 0
            lam = gamma = float(rng.uniform(0.0, 1e-13))
        elif kind == 3:
            gamma = 0.0
        cases.append((StageInterval(start, end), DecayParams(lam, gamma, regime)))
    return cases


def check_stage_weights(seed: int = 0, trials: int | None = None) -> CheckResult:
    start = time.perf_counter()
    worst = 0.0
    total = 0
    for stream, regime in ((5, Regime.DECAY), (6, Regime.GROWTH)):
        for interval, decay in _weight_cases(_rng(seed, stream), regime, trials or 200):
            w = stage_weights(interval, decay)
            y = oracle.quadrature(IntegrandSpec(decay, interval, attacker=False), tol=1e-12).value
            z = oracle.quadrature(IntegrandSpec(decay, interval, attacker=True), tol=1e-12).value
            worst = max(worst, abs(w.y - y) / abs(y), abs(w.Z - z) / abs(z))
            total += 1
    return CheckResult(
        "5 stage weights vs quadrature",
        worst <= 1e-8,
        f"{total} cases over both regimes; max relative error {worst:.1e} (<= 1e-8)",
        time.perf_counter() - start,
    )


# -- dynamic ---------------------------------------------------------------


def _curvature(rng) -> CurvatureParams:
    a = float(rng.uniform(0.8, 2.0))
    return CurvatureParams(a, float(rng.uniform(a + 0.5, 3.0 * a + 1.0)))


def decay_draws(seed: int, count: int):
    rng = _rng(seed, 7)
    out = []
    for _ in range(count):
        params = _curvature(rng)
        decay = DecayParams(float(rng.uniform(0.02, 0.3)), float(rng.uniform(0.01, 0.3)))
        out.append((params, decay, float(rng.uniform(0.5, 10.0)), math.inf))
    return out


def growth_draws(seed: int, count: int):
    """Attacker growth with gamma > lambda on a finite horizon."""
    rng = _rng(seed, 8)
    out = []
    for _ in range(count):
        params = _curvature(rng)
        lam = float(rng.uniform(0.02, 0.1))
        decay = DecayParams(lam, float(rng.uniform(lam + 0.05, 0.4)), Regime.GROWTH)
        out.append((params, decay, float(rng.uniform(0.5, 10.0)), float(rng.uniform(10.0, 40.0))))
    return out


_SCHEDULE_CACHE: dict = {}


def _solve(n, params, decay, V, horizon):
    key = (n, params, decay, V, horizon)
    if key not in _SCHEDULE_CACHE:
        _SCHEDULE_CACHE[key] = solve_schedule(n, params, decay, V, SolverConfig(horizon=horizon))
    return _SCHEDULE_CACHE[key]


def check_dynamic_beats_benchmark(seed: int = 0, trials: int | None = None) -> CheckResult:
    start = time.perf_counter()
    worse = not_strict = strict_cases = 0
    for params, decay, V, horizon in decay_draws(seed, trials or 50):
        sched = _solve(2, params, decay, V, horizon)
        bench = benchmark_threshold(params, decay, horizon, V).loss_at_opt
        worse += sched.objective > bench + 1e-9 * V
        if decay.gamma > 0 and _interior(sched.taus[0]):
            strict_cases += 1
            not_strict += not (bench - sched.objective > 1e-9 * V)
    return CheckResult(
        "6 dynamic beats benchmark",
        worse == 0 and not_strict == 0,
        f"{trials or 50} decay draws; {worse} above benchmark, "
        f"{not_strict}/{strict_cases} interior cases without strict improvement",
        time.perf_counter() - start,
    )


def _ordering_violations(taus, decreasing: bool) -> int:
    """Adjacent pairs out of order; a pair of equal corner/clamped values is allowed."""
    bad = 0
    for t0, t1 in zip(taus, taus[1:]):
        if not (_interior(t0) or _interior(t1)):
            bad += (t1 > t0) if decreasing else (t1 < t0)
        else:
            bad += not (t1 < t0 if decreasing else t1 > t0)
    return bad


def check_degradation(seed: int = 0, trials: int | None = None) -> CheckResult:
    start = time.perf_counter()
    count = trials or 50
    parts = []
    ok = True
    for label, draws, decreasing in (
        ("decay", decay_draws(seed, count), True),
        ("growth", growth_draws(seed, count), False),
    ):
        for n in (2, 3):
            converged = bad = 0
            for params, decay, V, horizon in draws:
                sched = _solve(n, params, decay, V, horizon)
                if not sched.converged:
                    continue
                converged += 1
                bad += _ordering_violations(sched.taus, decreasing) > 0
            ok &= bad == 0 and converged > 0
            parts.append(f"{label} n={n}: {bad}/{converged} converged out of order")
    return CheckResult("7 degradation / anti-degradation", ok, "; ".join(parts),
                       time.perf_counter() - start)


def check_timelock_stationarity(seed: int = 0, trials: int | None = None) -> CheckResult:
    start = time.perf_counter()
    count = trials or 50
    worst = 0.0
    boundaries = 0
    for draws in (decay_draws(seed, count), growth_draws(seed, count)):
        for params, decay, V, horizon in draws:
            for n in (2, 3):
                sched = _solve(n, params, decay, V, horizon)
                for j, T in enumerate(sched.boundaries):
                    r = timelock_residual(T, sched.taus[j], sched.taus[j + 1], params, decay)
                    worst = max(worst, abs(r))
                    boundaries += 1
    return CheckResult(
        "8 timelock stationarity",
        worst <= 1e-10,
        f"{boundaries} boundaries; max |e^(-+gamma T) g - f| {worst:.1e} (<= 1e-10)",
        time.perf_counter() - start,
    )


def check_gamma_zero_collapse(seed: int = 0, trials: int | None = None) -> CheckResult:
    start = time.perf_counter()
    rng = _rng(seed, 9)
    worst = 0.0
    count = trials or 20
    for i in range(count):
        params = _curvature(rng)
        regime = Regime.DECAY if i % 2 == 0 else Regime.GROWTH
        decay = DecayParams(float(rng.uniform(0.02, 0.3)), 0.0, regime)
        static = optimal_static_threshold(params).tau_star
        sched = solve_schedule(2 + i % 2, params, decay)
        worst = max(worst, max(abs(t - static) for t in sched.taus))
    return CheckResult(
        "9 gamma = 0 collapse",
        worst <= 1e-12,
        f"{count} draws; max |tau_i - static tau*| {worst:.1e} (<= 1e-12)",
        time.perf_counter() - start,
    )


# -- comparative statics -----------------------------------------------------

_STATICS_CONFIG = dict(tol=1e-12, max_iter=5000)


def _two_stage(a, b, lam, gamma, regime, horizon):
    return solve_schedule(
        2, CurvatureParams(a, b), DecayParams(lam, gamma, regime), 1.0,
        SolverConfig(horizon=horizon, **_STATICS_CONFIG),
    )


def statics_table(regime: Regime) -> list[dict]:
    """Central differences (h = 1e-4 relative) of the 2-stage optimum on the statics grid.

    Each entry holds the base schedule and, per parameter, the derivative of
    (tau_1, tau_2, T).
    """
    lam, gamma = DECAY_RATES if regime is Regime.DECAY else GROWTH_RATES
    horizon = math.inf if regime is Regime.DECAY else GROWTH_HORIZON
    rows = []
    for a in STATICS_A:
        for b in STATICS_B:
            base = {"a": a, "b": b, "lam": lam, "gamma": gamma}
            sched = _two_stage(a, b, lam, gamma, regime, horizon)
            derivs = {}
            for name, x in base.items():
                h = 1e-4 * x

                def at(v, name=name):
                    args = dict(base, **{name: v})
                    s = _two_stage(args["a"], args["b"], args["lam"], args["gamma"], regime, horizon)
                    return np.array([*s.taus, *s.boundaries])

                derivs[name] = (at(x + h) - at(x - h)) / (2 * h)
            rows.append({"a": a, "b": b, "schedule": sched, "d": derivs})
    return rows


def _sign_check(rows, name: str, wanted: Callable[[float], bool], what: str, thresholds=True):
    """Count violations of ``wanted`` over interior stages (or the switch time)."""
    checked = bad = 0
    for row in rows:
        sched, d = row["schedule"], row["d"][name]
        if thresholds:
            for i, tau in enumerate(sched.taus):
                if _interior(tau):
                    checked += 1
                    bad += not wanted(d[i])
        else:
            checked += 1
            bad += not wanted(d[-1])
    return checked, bad, f"{what}: {bad}/{checked} wrong sign"


def check_statics(seed: int = 0, trials: int | None = None) -> list[CheckResult]:
    results = []
    start = time.perf_counter()
    decay_rows = statics_table(Regime.DECAY)
    growth_rows = statics_table(Regime.GROWTH)
    elapsed = time.perf_counter() - start
    neg = lambda v: v < 0  # noqa: E731
    pos = lambda v: v > 0  # noqa: E731

    ab_signs = [
        _sign_check(decay_rows, "a", neg, "dtau/da<0"),
        _sign_check(decay_rows, "b", pos, "dtau/db>0"),
        _sign_check(decay_rows, "a", neg, "dT/da<0", thresholds=False),
        _sign_check(decay_rows, "b", pos, "dT/db>0", thresholds=False),
    ]
    results.append(CheckResult(
        "10a threshold and timelock signs in a, b (decay)",
        all(b == 0 for _, b, _ in ab_signs),
        "; ".join(m for *_, m in ab_signs),
        elapsed,
    ))
    for label, rows, param, wanted, desc in (
        ("10b threshold sign in lambda (decay)", decay_rows, "lam", neg, "dtau/dlambda<0"),
        ("10c threshold sign in gamma (decay)", decay_rows, "gamma", neg, "dtau/dgamma<0"),
        ("10d threshold sign in lambda (growth)", growth_rows, "lam", pos, "dtau/dlambda>0"),
        ("10e threshold sign in gamma (growth)", growth_rows, "gamma", pos, "dtau/dgamma>0"),
    ):
        checked, bad, msg = _sign_check(rows, param, wanted, desc)
        results.append(CheckResult(label, bad == 0 and checked > 0, msg, 0.0))

    # Hypotheses not operationalised: report signs with the regime attached.
    def signs(rows, name, idx):
        vals = [row["d"][name][idx] for row in rows]
        return f"+{sum(v > 0 for v in vals)}/-{sum(v < 0 for v in vals)}/0:{sum(v == 0 for v in vals)}"

    lam_d, gam_d = DECAY_RATES
    lam_g, gam_g = GROWTH_RATES
    results.append(CheckResult(
        "10r remaining signs (reported only)",
        True,
        f"decay lambda={lam_d} gamma={gam_d}: dT/dlambda {signs(decay_rows, 'lam', -1)}, "
        f"dT/dgamma {signs(decay_rows, 'gamma', -1)}; "
        f"growth lambda={lam_g} gamma={gam_g} (gamma/lambda={gam_g / lam_g:g}): "
        f"dtau1/da {signs(growth_rows, 'a', 0)}, dtau1/db {signs(growth_rows, 'b', 0)}, "
        f"dT/da {signs(growth_rows, 'a', -1)}, dT/db {signs(growth_rows, 'b', -1)}, "
        f"dT/dlambda {signs(growth_rows, 'lam', -1)}, dT/dgamma {signs(growth_rows, 'gamma', -1)}",
        0.0,
        report_only=True,
    ))
    return results


# -- sweeps and policy -------------------------------------------------------


def check_sweep_patterns(seed: int = 0, trials: int | None = None) -> CheckResult:
    start = time.perf_counter()
    decay = run_sweep(default_spec(Mode.DYNAMIC, DecayParams(*DECAY_RATES, Regime.DECAY)))
    growth = run_sweep(default_spec(Mode.DYNAMIC, DecayParams(*GROWTH_RATES, Regime.GROWTH),
                                    horizon=GROWTH_HORIZON))
    elapsed = time.perf_counter() - start
    errors = sum(r.error is not None for r in decay + growth)
    bad_decay = sum(r.error is None and not r.tau1_star >= r.tau2_star for r in decay)
    bad_growth = sum(r.error is None and not r.tau2_star >= r.tau1_star for r in growth)
    return CheckResult(
        "11 sweep patterns",
        errors == 0 and bad_decay == 0 and bad_growth == 0 and elapsed < 60.0,
        f"decay {len(decay)} cells, {bad_decay} with tau1<tau2; growth {len(growth)} cells, "
        f"{bad_growth} with tau2<tau1; {errors} errors",
        elapsed,
    )


def golden_policy_text() -> str:
    return resources.files("multisig_opt").joinpath("data").joinpath(GOLDEN_POLICY).read_text()


def check_policy_fixture(seed: int = 0, trials: int | None = None) -> CheckResult:
    start = time.perf_counter()
    text = serialize_policy(example_degrading_policy())
    same = text == golden_policy_text()
    m = threshold_to_m(2 / 3, 3)
    return CheckResult(
        "12 policy fixture",
        same and m == 2,
        f"golden byte-identical: {same}; threshold_to_m(2/3, 3) = {m}",
        time.perf_counter() - start,
    )


def check_fixed_point_vs_grid(seed: int = 0, trials: int | None = None) -> CheckResult:
    """Extra: alternating solver and coordinate-grid oracle agree on 2-stage optima."""
    start = time.perf_counter()
    worst_x = worst_obj = 0.0
    count = trials or 100
    rng = _rng(seed, 11)
    for i in range(count):
        params = _curvature(rng)
        if i % 2 == 0:
            decay = DecayParams(float(rng.uniform(0.02, 0.3)), float(rng.uniform(0.01, 0.3)))
            horizon = math.inf
        else:
            lam = float(rng.uniform(0.02, 0.1))
            decay = DecayParams(lam, float(rng.uniform(lam + 0.05, 0.4)), Regime.GROWTH)
            horizon = float(rng.uniform(10.0, 40.0))
        sched = solve_schedule(2, params, decay, 1.0, SolverConfig(horizon=horizon))
        grid = oracle.direct_minimize_schedule(2, params, decay, 1.0, horizon)
        worst_obj = max(worst_obj, abs(sched.objective - grid.objective))
        # Switch time is immaterial when both stages share a corner/clamp value.
        coords = [(sched.taus[0], grid.taus[0]), (sched.taus[1], grid.taus[1])]
        if sched.taus[0] != sched.taus[1]:
            coords.append((sched.boundaries[0], grid.boundaries[0]))
        worst_x = max(worst_x, max(abs(x - y) for x, y in coords))
    return CheckResult(
        "fixed point vs grid oracle",
        worst_x <= 1e-3 and worst_obj <= 1e-6,
        f"{count} draws; max coordinate gap {worst_x:.1e} (<= 1e-3), "
        f"max objective gap {worst_obj:.1e} (<= 1e-6 V)",
        time.perf_counter() - start,
    )


CHECKS = (
    check_formula_adjudication,
    check_static_oracle,
    check_sosc_property,
    check_static_monotonicity,
    check_stage_weights,
    check_dynamic_beats_benchmark,
    check_degradation,
    check_timelock_stationarity,
    check_gamma_zero_collapse,
    check_statics,
    check_sweep_patterns,
    check_policy_fixture,
    check_fixed_point_vs_grid,
)


def run_all(seed: int = 0, trials: int | None = None, echo: Callable[[str], None] | None = None):
    results = []
    for check in CHECKS:
        out = check(seed, trials)
        for result in out if isinstance(out, list) else [out]:
            results.append(result)
            if echo:
                echo(result.line())
    return results
