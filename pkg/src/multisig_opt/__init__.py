"""Optimal static and time-degrading thresholds for m-of-n custody."""

from .dynamic_opt import (
    SolverConfig,
    benchmark_threshold,
    optimal_timelock,
    reduced_objective,
    solve_schedule,
    stage_threshold,
)
from .errors import ModelError
from .model import CurvatureParams, DecayParams, Regime, StageInterval, stage_weights
from .policy import PolicyDocument, compile_policy, parse_policy, serialize_policy, threshold_to_m
from .schedule import Schedule
from .static_opt import StaticSolution, optimal_static_threshold
from .sweep import SweepSpec, emit_csv, monotonicity_report, run_sweep

__version__ = "0.1.0"

__all__ = [
    "CurvatureParams",
    "DecayParams",
    "ModelError",
    "PolicyDocument",
    "Regime",
    "Schedule",
    "SolverConfig",
    "StageInterval",
    "StaticSolution",
    "SweepSpec",
    "benchmark_threshold",
    "compile_policy",
    "emit_csv",
    "monotonicity_report",
    "optimal_static_threshold",
    "optimal_timelock",
    "parse_policy",
    "reduced_objective",
    "run_sweep",
    "serialize_policy",
    "solve_schedule",
    "stage_threshold",
    "stage_weights",
    "threshold_to_m",
]
