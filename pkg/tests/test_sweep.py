import math

import pytest

from multisig_opt.model import DecayParams, Regime
from multisig_opt.oracle import GridSpec
from multisig_opt.sweep import (
    CSV_HEADER,
    Mode,
    SweepRow,
    SweepSpec,
    default_spec,
    emit_csv,
    monotonicity_report,
    parse_csv,
    run_sweep,
    sweep_spec_from_dict,
    worker_count,
)


def test_static_sweep_shape_and_order():
    rows = run_sweep(default_spec(Mode.STATIC), workers=1)
    cells = [(r.a, r.b) for r in rows]
    assert all(b > a for a, b in cells)
    assert cells == sorted(cells)
    assert len(rows) == sum(1 for a in range(1, 13) for b in range(1, 17) if b > a)


def test_csv_round_trip_static_and_dynamic():
    static = run_sweep(default_spec(Mode.STATIC), workers=1)
    dyn = run_sweep(SweepSpec(GridSpec(0.5, 1.5, step=0.5), GridSpec(1.0, 3.0, step=0.5),
                              Mode.DYNAMIC, DecayParams(0.1, 0.05)), workers=1)
    for rows in (static, dyn):
        text = emit_csv(rows)
        assert text.splitlines()[0] == CSV_HEADER
        assert parse_csv(text) == rows
        assert emit_csv(parse_csv(text)) == text


def test_parallel_matches_serial():
    spec = SweepSpec(GridSpec(0.5, 2.0, step=0.5), GridSpec(1.0, 4.0, step=0.5),
                     Mode.DYNAMIC, DecayParams(0.05, 0.2, Regime.GROWTH), horizon=20.0)
    assert emit_csv(run_sweep(spec, workers=1)) == emit_csv(run_sweep(spec, workers=2))


def test_errors_recorded_not_raised():
    # growth with gamma > lambda on an infinite horizon diverges
    spec = SweepSpec(GridSpec(0.5, 1.0, step=0.5), GridSpec(1.0, 2.0, step=0.5),
                     Mode.DYNAMIC, DecayParams(0.05, 0.2, Regime.GROWTH))
    rows = run_sweep(spec, workers=1)
    assert rows and all(r.error and r.error.startswith("DivergentIntegral") for r in rows)
    assert parse_csv(emit_csv(rows)) == rows


def test_monotonicity_report_flags_violation():
    rows = [SweepRow(1.0, 2.0, tau_star=0.5), SweepRow(1.0, 3.0, tau_star=0.4),
            SweepRow(1.0, 4.0, tau_star=1.0)]
    report = monotonicity_report(rows)
    assert report.n_violations == 1 and not report.monotone
    assert ("tau_star", 1.0, 4.0) in report.excluded_cells


def test_default_static_sweep_is_monotone():
    report = monotonicity_report(run_sweep(default_spec(Mode.STATIC), workers=1))
    assert report.monotone and report.comparisons > 0


def test_rows_are_quantized():
    row = SweepRow(1 / 3, 2.0, tau_star=2 / 3)
    assert row.a == 0.333333333 and row.tau_star == 0.666666667


def test_spec_from_dict():
    spec = sweep_spec_from_dict({"mode": "dynamic", "a": [0.5, 1.0, 0.5], "lambda": 0.1,
                                 "gamma": 0.05, "regime": "growth", "horizon": 10})
    assert spec.mode is Mode.DYNAMIC and spec.horizon == 10.0
    assert spec.decay.regime is Regime.GROWTH
    assert sweep_spec_from_dict({}).horizon == math.inf


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("MULTISIG_OPT_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("MULTISIG_OPT_THREADS", "-1")
    with pytest.raises(ValueError):
        worker_count()
