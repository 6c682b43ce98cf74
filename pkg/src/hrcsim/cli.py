"""Command-line interface.

Subcommands: run (both phases), optimize (trajectory generation only),
track (tracking against previously written reference files), verify
(randomized property suites), oracle (direct-transcription solve).

Exit codes: 0 success, 1 failed verification, 2 configuration error,
3 numerical failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .config import load_config
from .errors import ConfigError, NumericsError
from .reporting import (emit_all_figures, read_phase1_csv, read_reference_csv,
                        write_config_echo, write_phase1_csv,
                        write_reference_csv, write_table_csv,
                        write_timeseries, write_tracking_csv)
from .riccati import transcription_oracle
from .simulation import (ReferenceTrajectory, build_lq_problem,
                         cartesian_to_joint_reference, phase1_optimize,
                         phase2_track, run_scenario)
from .verification import SUITES, run_suites

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4


def _load(args):
    config = load_config(args.config)
    if getattr(args, "step", None) is not None:
        config.h = args.step
        n = (config.tf - config.t0) / config.h
        if abs(n - round(n)) > 1e-6 or round(n) < 1:
            raise ConfigError(f"'--step': {args.step} does not divide the horizon")
    if getattr(args, "seed", None) is not None:
        config.rbf_seed = args.seed
    return config


def _cmd_run(args) -> int:
    config = _load(args)
    report = run_scenario(config)
    bundle = write_timeseries(report, args.out)
    if args.emit_plots:
        emit_all_figures(bundle)
    for key, value in report.metrics.items():
        print(f"{key} = {value:.6g}")
    print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_optimize(args) -> int:
    config = _load(args)
    phase1 = phase1_optimize(config)
    reference = cartesian_to_joint_reference(config, phase1)
    os.makedirs(args.out, exist_ok=True)
    write_phase1_csv(os.path.join(args.out, "phase1_state.csv"),
                     phase1.trajectory.grid, phase1.x_imp, phase1.xd_imp,
                     phase1.f_h, phase1.trajectory.u)
    write_reference_csv(os.path.join(args.out, "reference.csv"),
                        reference.grid, reference.q_d, reference.qd_d)
    write_config_echo(os.path.join(args.out, "config_resolved.yaml"), config)
    err = np.linalg.norm(phase1.trajectory.X[-1] - config.Xf)
    print(f"cost = {phase1.trajectory.cost:.6g}")
    print(f"terminal error = {err:.6g}")
    print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_track(args) -> int:
    config = _load(args)
    grid, x_imp, xd_imp, f_h, _ = read_phase1_csv(
        os.path.join(args.ref, "phase1_state.csv"))
    _, q_d, qd_d = read_reference_csv(os.path.join(args.ref, "reference.csv"))
    reference = ReferenceTrajectory(grid, x_imp, xd_imp, f_h, q_d, qd_d)
    record = phase2_track(config, reference)
    os.makedirs(args.out, exist_ok=True)
    write_tracking_csv(os.path.join(args.out, "tracking.csv"), record)
    e_norm = np.linalg.norm(record.e, axis=1)
    print(f"max tracking error = {e_norm.max():.6g}")
    print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    names = list(SUITES) if args.suite == "all" else [args.suite]
    results = run_suites(names, cases=args.cases, seed=args.seed)
    failed = 0
    for name, passed, detail in results:
        status = "PASS" if passed else "FAIL"
        print(f"{status}  {name}: {detail}")
        failed += 0 if passed else 1
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_VERIFY_FAILED


def _cmd_oracle(args) -> int:
    config = _load(args)
    problem = build_lq_problem(config)
    cost, traj = transcription_oracle(problem, args.intervals)
    print(f"transcription cost = {cost:.6g}")
    print(f"terminal state = {np.array2string(traj.X[-1], precision=6)}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        n, m = problem.n, problem.m
        cols = ["t"] + [f"x{i+1}" for i in range(n)] + [f"u{i+1}" for i in range(m)]
        arrays = [traj.grid] + [traj.X[:, i] for i in range(n)] \
            + [traj.u[:, i] for i in range(m)]
        write_table_csv(os.path.join(args.out, "oracle_trajectory.csv"),
                        cols, arrays)
        print(f"wrote {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hrcsim",
        description="Optimal human-robot trajectory generation and "
                    "neuro-adaptive tracking on a simulated 2-link arm.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="optimize and track one scenario")
    run.add_argument("--config", required=True, help="scenario YAML file")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--step", type=float, default=None, help="override step size (s)")
    run.add_argument("--seed", type=int, default=None, help="override RBF seed")
    run.add_argument("--emit-plots", action="store_true",
                     help="render PNG figures and write plot scripts")
    run.set_defaults(func=_cmd_run)

    opt = sub.add_parser("optimize", help="trajectory optimization only")
    opt.add_argument("--config", required=True)
    opt.add_argument("--out", required=True)
    opt.add_argument("--step", type=float, default=None)
    opt.set_defaults(func=_cmd_optimize)

    track = sub.add_parser("track", help="track a previously optimized reference")
    track.add_argument("--config", required=True)
    track.add_argument("--ref", required=True,
                       help="directory with phase1_state.csv and reference.csv")
    track.add_argument("--out", required=True)
    track.add_argument("--seed", type=int, default=None)
    track.set_defaults(func=_cmd_track)

    verify = sub.add_parser("verify", help="run randomized property suites")
    verify.add_argument("--suite", choices=sorted(SUITES) + ["all"], default="all")
    verify.add_argument("--cases", type=int, default=None,
                        help="random cases per suite (suite-specific default)")
    verify.add_argument("--seed", type=int, default=0)
    verify.set_defaults(func=_cmd_verify)

    oracle = sub.add_parser("oracle",
                            help="direct-transcription solve of the scenario's "
                                 "optimization problem")
    oracle.add_argument("--config", required=True)
    oracle.add_argument("--intervals", type=int, default=200)
    oracle.add_argument("--out", default=None)
    oracle.set_defaults(func=_cmd_oracle)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericsError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
