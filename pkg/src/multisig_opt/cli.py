"""Command-line front end.

Exit codes: 0 success, 2 invalid arguments, 3 infeasible or divergent model,
4 verification failure.  Results go to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

from .dynamic_opt import SolverConfig, benchmark_threshold, solve_schedule
from .errors import InvalidParameter, ModelError
from .formatting import fmt_bool, fmt_real
from .model import CurvatureParams, DecayParams, Regime
from .policy import Unit, compile_policy, serialize_policy
from .schedule import Schedule
from .static_opt import optimal_static_threshold
from .sweep import Mode, SweepSpec, default_spec, emit_csv, run_sweep, sweep_spec_from_dict

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_MODEL = 3
EXIT_VERIFY = 4

log = logging.getLogger("multisig_opt")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # Raise instead of exiting so run() stays usable as a library call.
    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def _horizon(text: str) -> float:
    return math.inf if text.lower() in ("inf", "infinity") else float(text)


def _add_curvature(p):
    p.add_argument("--a", type=float, required=True, help="user curvature a")
    p.add_argument("--b", type=float, required=True, help="attacker curvature b")
    p.add_argument("--v", type=float, default=1.0, help="value at stake V (default 1)")


def _add_decay(p, stages: bool):
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--regime", choices=[r.value for r in Regime], default="decay")
    p.add_argument("--horizon", type=_horizon, default=math.inf,
                   help="finite horizon (default: infinite)")
    if stages:
        p.add_argument("--stages", type=_positive_int, default=2)
        p.add_argument("--out", help="also write the schedule as JSON to this path")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="multisig-opt", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="more diagnostics on stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("static", help="optimal time-invariant threshold")
    _add_curvature(p)

    p = sub.add_parser("dynamic", help="optimal multi-stage schedule")
    _add_curvature(p)
    _add_decay(p, stages=True)

    p = sub.add_parser("benchmark", help="best single threshold under decay")
    _add_curvature(p)
    _add_decay(p, stages=True)

    p = sub.add_parser("verify", help="run the acceptance property suite")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--trials", type=_positive_int, default=None,
                   help="override the number of random draws per check")

    p = sub.add_parser("sweep", help="(a, b) sweep as CSV")
    p.add_argument("--spec", help="JSON sweep description")
    p.add_argument("--mode", choices=[m.value for m in Mode], default="static")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--regime", choices=[r.value for r in Regime], default="decay")
    p.add_argument("--horizon", type=_horizon, default=math.inf)
    p.add_argument("--out", help="output path (default: stdout)")

    p = sub.add_parser("policy", help="compile a schedule into a spend policy")
    p.add_argument("--schedule", required=True, help="schedule JSON (as written by dynamic --out)")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--unit", choices=[u.value for u in Unit], default="abstract")
    p.add_argument("--scale", type=float, default=1.0, help="ticks per model time unit")
    p.add_argument("--out", help="output path (default: stdout)")
    return parser


def _emit(text: str, path: str | None) -> None:
    if path and path != "-":
        Path(path).write_text(text)
        log.info("wrote %s", path)
    else:
        sys.stdout.write(text)


def _degradation_verdict(taus) -> str:
    down = any(t1 < t0 for t0, t1 in zip(taus, taus[1:]))
    up = any(t1 > t0 for t0, t1 in zip(taus, taus[1:]))
    if down and up:
        return "mixed"
    return "degrading" if down else ("anti-degrading" if up else "flat")


def _cmd_static(args) -> int:
    sol = optimal_static_threshold(CurvatureParams(args.a, args.b), args.v)
    lines = [
        f"tau_star {fmt_real(sol.tau_star)}",
        f"loss {fmt_real(sol.loss_at_opt)}",
        f"sosc {fmt_bool(sol.sosc_holds)}",
        f"corner {fmt_bool(sol.corner)}",
        f"clamped {fmt_bool(sol.clamped)}",
        f"domain_warning {fmt_bool(sol.domain_warning)}",
    ]
    print("\n".join(lines))
    if sol.corner:
        print("warning: b <= a, optimum is the corner tau = 0", file=sys.stderr)
    if sol.domain_warning:
        print("warning: optimum lies outside the domain where q >= 0", file=sys.stderr)
    return EXIT_OK


def _decay(args) -> DecayParams:
    return DecayParams(args.lam, args.gamma, Regime(args.regime))


def _cmd_dynamic(args) -> int:
    params = CurvatureParams(args.a, args.b)
    decay = _decay(args)
    sched = solve_schedule(args.stages, params, decay, args.v, SolverConfig(horizon=args.horizon))
    bench = benchmark_threshold(params, decay, args.horizon, args.v)
    lines = [f"stages {sched.n_stages}"]
    for i, (tau, iv) in enumerate(zip(sched.taus, sched.intervals), 1):
        flag = " corner" if sched.corners and sched.corners[i - 1] else ""
        flag += " clamped" if sched.clamped and sched.clamped[i - 1] else ""
        lines.append(f"tau{i} {fmt_real(tau)} start {fmt_real(iv.start)} end {fmt_real(iv.end)}{flag}")
    for j, T in enumerate(sched.boundaries, 1):
        lines.append(f"T{j} {fmt_real(T)}")
    lines += [
        f"objective {fmt_real(sched.objective)}",
        f"benchmark_objective {fmt_real(bench.loss_at_opt)}",
        f"improvement {fmt_real(bench.loss_at_opt - sched.objective)}",
        f"degradation {_degradation_verdict(sched.taus)}",
        f"method {sched.method}",
        f"converged {fmt_bool(sched.converged)}",
    ]
    print("\n".join(lines))
    if not sched.converged:
        print("warning: fixed point did not converge; grid-search result shown", file=sys.stderr)
    if args.out:
        Path(args.out).write_text(sched.to_json())
        log.info("wrote %s", args.out)
    return EXIT_OK


def _cmd_benchmark(args) -> int:
    sol = benchmark_threshold(CurvatureParams(args.a, args.b), _decay(args), args.horizon, args.v)
    print("\n".join([
        f"tau_star {fmt_real(sol.tau_star)}",
        f"objective {fmt_real(sol.loss_at_opt)}",
        f"sosc {fmt_bool(sol.sosc_holds)}",
        f"corner {fmt_bool(sol.corner)}",
        f"clamped {fmt_bool(sol.clamped)}",
        f"domain_warning {fmt_bool(sol.domain_warning)}",
    ]))
    if args.out:
        Path(args.out).write_text(Schedule((sol.tau_star,), (), args.horizon).to_json())
    return EXIT_OK


def _cmd_verify(args) -> int:
    from . import verify

    results = verify.run_all(args.seed, args.trials, echo=lambda line: print(line, flush=True))
    failed = [r for r in results if not r.report_only and not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_VERIFY if failed else EXIT_OK


def _sweep_spec(args) -> SweepSpec:
    if args.spec:
        try:
            data = json.loads(Path(args.spec).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidParameter(f"cannot read sweep spec {args.spec}: {exc}") from None
        return sweep_spec_from_dict(data)
    mode = Mode(args.mode)
    decay = None
    if mode is Mode.DYNAMIC:
        if args.lam is None or args.gamma is None:
            raise _UsageError("sweep --mode dynamic needs --lambda and --gamma")
        decay = DecayParams(args.lam, args.gamma, Regime(args.regime))
    return default_spec(mode, decay, args.horizon)


def _cmd_sweep(args) -> int:
    rows = run_sweep(_sweep_spec(args))
    _emit(emit_csv(rows), args.out)
    errors = sum(r.error is not None for r in rows)
    if errors:
        print(f"warning: {errors} cells failed; see the error column", file=sys.stderr)
    return EXIT_OK


def _cmd_policy(args) -> int:
    try:
        schedule = Schedule.from_json(Path(args.schedule).read_text())
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise InvalidParameter(f"cannot read schedule {args.schedule}: {exc}") from None
    doc = compile_policy(schedule, args.n, Unit(args.unit), args.scale)
    _emit(serialize_policy(doc), args.out)
    return EXIT_OK


_COMMANDS = {
    "static": _cmd_static,
    "dynamic": _cmd_dynamic,
    "benchmark": _cmd_benchmark,
    "verify": _cmd_verify,
    "sweep": _cmd_sweep,
    "policy": _cmd_policy,
}


def run(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"multisig-opt: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvalidParameter as exc:
        print(f"multisig-opt: invalid argument: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ModelError as exc:
        print(f"multisig-opt: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_MODEL


def main() -> None:
    sys.exit(run())
