"""Parameter sweeps over (a, b) and their CSV representation.

Cells with ``b <= a`` are skipped.  Rows come out a-major, then by b, and
every real is stored at the 9-significant-digit precision used in the CSV so
that a CSV round trip reproduces the rows exactly.
"""

from __future__ import annotations

import csv
import enum
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from typing import Iterable

from .dynamic_opt import SolverConfig, solve_schedule
from .errors import InvalidParameter, ModelError
from .formatting import fmt_bool, fmt_real, quantize
from .model import CurvatureParams, DecayParams, Regime, valid_domain
from .oracle import GridSpec
from .static_opt import optimal_static_threshold

CSV_HEADER = (
    "a,b,lambda,gamma,regime,tau_star,tau1_star,tau2_star,T_star,corner,domain_warning,error"
)
THREADS_ENV = "MULTISIG_OPT_THREADS"


class Mode(enum.Enum):
    STATIC = "static"
    DYNAMIC = "dynamic"


@dataclass(frozen=True)
class SweepSpec:
    a_grid: GridSpec
    b_grid: GridSpec
    mode: Mode = Mode.STATIC
    decay: DecayParams | None = None
    V: float = 1.0
    horizon: float = math.inf

    def __post_init__(self):
        if isinstance(self.mode, str):
            object.__setattr__(self, "mode", Mode(self.mode))
        if self.mode is Mode.DYNAMIC and self.decay is None:
            raise InvalidParameter("dynamic sweeps need decay parameters")
        if not self.V > 0:
            raise InvalidParameter("V must be positive")

    def cells(self) -> list[tuple[float, float]]:
        return [
            (float(a), float(b))
            for a in self.a_grid.values()
            for b in self.b_grid.values()
            if b > a
        ]


def default_spec(mode: Mode = Mode.STATIC, decay: DecayParams | None = None,
                 horizon: float = math.inf) -> SweepSpec:
    """a in {0.25, ..., 3} and b in (a, 4], both on a 0.25 step."""
    return SweepSpec(
        a_grid=GridSpec(0.25, 3.0, step=0.25),
        b_grid=GridSpec(0.25, 4.0, step=0.25),
        mode=mode,
        decay=decay,
        horizon=horizon,
    )


def _opt(x: float | None) -> float | None:
    return None if x is None else quantize(x)


@dataclass(frozen=True)
class SweepRow:
    a: float
    b: float
    lam: float | None = None
    gamma: float | None = None
    regime: str | None = None
    tau_star: float | None = None
    tau1_star: float | None = None
    tau2_star: float | None = None
    T_star: float | None = None
    corner: bool = False
    domain_warning: bool = False
    error: str | None = None

    def __post_init__(self):
        for f in fields(self):
            if f.name in ("a", "b", "lam", "gamma", "tau_star", "tau1_star", "tau2_star", "T_star"):
                object.__setattr__(self, f.name, _opt(getattr(self, f.name)))

    @property
    def thresholds(self) -> dict[str, float]:
        names = ("tau_star", "tau1_star", "tau2_star")
        return {n: getattr(self, n) for n in names if getattr(self, n) is not None}


def _static_cell(a: float, b: float, spec: SweepSpec) -> SweepRow:
    sol = optimal_static_threshold(CurvatureParams(a, b), spec.V)
    return SweepRow(a, b, tau_star=sol.tau_star, corner=sol.corner or sol.clamped,
                    domain_warning=sol.domain_warning)


def _dynamic_cell(a: float, b: float, spec: SweepSpec) -> SweepRow:
    decay = spec.decay
    base = SweepRow(a, b, lam=decay.lam, gamma=decay.gamma, regime=decay.regime.value)
    params = CurvatureParams(a, b)
    sched = solve_schedule(2, params, decay, spec.V, SolverConfig(horizon=spec.horizon))
    bound = valid_domain(params)
    return replace(
        base,
        tau1_star=sched.taus[0],
        tau2_star=sched.taus[1],
        T_star=sched.boundaries[0],
        corner=any(sched.corners) or any(sched.clamped),
        domain_warning=any(t > bound for t in sched.taus),
    )


def _cell(args) -> SweepRow:
    a, b, spec = args
    try:
        if spec.mode is Mode.STATIC:
            return _static_cell(a, b, spec)
        return _dynamic_cell(a, b, spec)
    except ModelError as exc:
        row = SweepRow(a, b)
        if spec.decay is not None:
            d = spec.decay
            row = replace(row, lam=d.lam, gamma=d.gamma, regime=d.regime.value)
        return replace(row, error=f"{type(exc).__name__}: {exc}")


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV, "0")
    try:
        n = int(raw)
    except ValueError:
        raise InvalidParameter(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if n < 0:
        raise InvalidParameter(f"{THREADS_ENV} must be >= 0")
    return n or (os.cpu_count() or 1)


def run_sweep(spec: SweepSpec, workers: int | None = None) -> list[SweepRow]:
    jobs = [(a, b, spec) for a, b in spec.cells()]
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(jobs) < 2:
        return [_cell(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map preserves submission order, so output order is deterministic.
        return list(pool.map(_cell, jobs, chunksize=8))


@dataclass
class MonotonicityReport:
    comparisons: int = 0
    violations: list[str] = field(default_factory=list)
    excluded_cells: list[tuple[str, float, float]] = field(default_factory=list)
    series: dict[str, bool] = field(default_factory=dict)

    @property
    def n_violations(self) -> int:
        return len(self.violations)

    @property
    def monotone(self) -> bool:
        return not self.violations


def _check_series(report, label, points, increasing):
    ok = True
    for (x0, v0), (x1, v1) in zip(points, points[1:]):
        report.comparisons += 1
        if not (v1 > v0 if increasing else v1 < v0):
            ok = False
            report.violations.append(f"{label}: {v0!r} at {x0!r} -> {v1!r} at {x1!r}")
    report.series[label] = ok


def monotonicity_report(rows: Iterable[SweepRow]) -> MonotonicityReport:
    """Check thresholds rise strictly in b (fixed a) and fall strictly in a (fixed b).

    Cells where a threshold sits at 0 or 1 (corner or clamp) and errored rows
    are left out of the comparisons and listed in ``excluded_cells``.
    """
    report = MonotonicityReport()
    by_field: dict[str, dict[tuple[float, float], float]] = {}
    for row in rows:
        if row.error:
            report.excluded_cells.append(("error", row.a, row.b))
            continue
        for name, value in row.thresholds.items():
            if value in (0.0, 1.0):
                report.excluded_cells.append((name, row.a, row.b))
                continue
            by_field.setdefault(name, {})[(row.a, row.b)] = value

    for name, cells in by_field.items():
        for a in sorted({a for a, _ in cells}):
            pts = sorted((b, v) for (aa, b), v in cells.items() if aa == a)
            _check_series(report, f"{name} along b at a={fmt_real(a)}", pts, increasing=True)
        for b in sorted({b for _, b in cells}):
            pts = sorted((a, v) for (a, bb), v in cells.items() if bb == b)
            _check_series(report, f"{name} along a at b={fmt_real(b)}", pts, increasing=False)
    return report


def _cell_text(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return fmt_bool(value)
    if isinstance(value, float):
        return fmt_real(value)
    return str(value)


_COLUMNS = ("a", "b", "lam", "gamma", "regime", "tau_star", "tau1_star", "tau2_star",
            "T_star", "corner", "domain_warning", "error")


def emit_csv(rows: Iterable[SweepRow], out=None) -> str:
    """Write rows as CSV (to ``out`` if given) and return the text."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    buf.write(CSV_HEADER + "\n")
    for row in rows:
        writer.writerow([_cell_text(getattr(row, c)) for c in _COLUMNS])
    text = buf.getvalue()
    if out is not None:
        out.write(text)
    return text


def parse_csv(text: str) -> list[SweepRow]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if ",".join(header) != CSV_HEADER:
        raise InvalidParameter(f"unexpected CSV header: {header}")
    rows = []
    for record in reader:
        values = dict(zip(_COLUMNS, record))
        kwargs = {}
        for name, text_value in values.items():
            if name in ("corner", "domain_warning"):
                kwargs[name] = text_value == "true"
            elif name in ("regime", "error"):
                kwargs[name] = text_value or None
            else:
                kwargs[name] = float(text_value) if text_value else None
        rows.append(SweepRow(**kwargs))
    return rows


def sweep_spec_from_dict(data: dict) -> SweepSpec:
    """Build a spec from the JSON form used by ``sweep --spec``.

    Keys: ``mode``, ``a`` and ``b`` as ``[lo, hi, step]``, and for dynamic
    sweeps ``lambda``, ``gamma``, ``regime`` and optionally ``horizon``.
    """
    base = default_spec()
    a_grid = GridSpec(*data["a"][:2], step=data["a"][2]) if "a" in data else base.a_grid
    b_grid = GridSpec(*data["b"][:2], step=data["b"][2]) if "b" in data else base.b_grid
    mode = Mode(data.get("mode", "static"))
    decay = None
    if mode is Mode.DYNAMIC:
        decay = DecayParams(float(data["lambda"]), float(data["gamma"]),
                            Regime(data.get("regime", "decay")))
    horizon = data.get("horizon")
    return SweepSpec(a_grid, b_grid, mode, decay, float(data.get("V", 1.0)),
                     math.inf if horizon is None else float(horizon))

