"""Command-line entry point: ``thermofield {run,analyze,verify,report}``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from contextlib import nullcontext

from threadpoolctl import threadpool_limits

THREADS_ENV = "THERMOFIELD_NUM_THREADS"

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3


def _threads(args):
    if args.threads is not None:
        return args.threads
    env = os.environ.get(THREADS_ENV)
    return int(env) if env else None


def _cmd_run(args):
    from .experiment import ExperimentConfig, run_experiment

    config = ExperimentConfig.load(args.config)
    if args.max_seconds is not None:
        config.evolution.max_seconds = args.max_seconds
    if args.max_bytes is not None:
        config.evolution.max_bytes = args.max_bytes
    result = run_experiment(config, args.output, resume=args.resume)
    print(f"{result.status}: {len(result.rows)} rows in {result.output_dir}")
    if result.resume_token is not None:
        print(f"resume with: thermofield run {args.config} --output {result.output_dir} "
              f"--resume {result.resume_token}")
        return EXIT_BUDGET
    return EXIT_OK


def _load_spec(path):
    import json

    if path is None:
        return None
    with open(path) as fh:
        return json.load(fh)


def _cmd_analyze(args):
    from .analysis import analyze, write_report

    report = analyze(args.results, _load_spec(args.spec))
    out = args.output or os.path.join(args.results, "report.json")
    write_report(report, out)
    for key, entry in report["entropy"].items():
        fit = entry.get("fit")
        if fit:
            print(f"{key}: slope {fit['slope']:.4f} (CFT {entry['cft_slope']:.4f})")
    for eps, entry in report["D_eps"].items():
        fit = entry.get("fit")
        lam_star = entry.get("theory", {}).get("lambda_star")
        if fit:
            extra = f", lambda* {lam_star:.4f}" if lam_star is not None else ""
            print(f"D_eps({eps}): lambda {fit['slope']:.4f}{extra}")
    print(f"report written to {out}")
    return EXIT_OK


def _cmd_report(args):
    from .analysis import report_tables

    for path in report_tables(args.results, args.output, _load_spec(args.spec)):
        print(path)
    return EXIT_OK


def _cmd_verify(args):
    from .verify import SUITES, run_suites

    names = SUITES if args.suite == "all" else tuple(s.strip() for s in args.suite.split(","))
    unknown = set(names) - set(SUITES)
    if unknown:
        print(f"unknown suite(s): {sorted(unknown)}", file=sys.stderr)
        return EXIT_USAGE
    results = run_suites(names, seed=args.seed, results_dir=args.results, quick=args.quick,
                         tolerance=args.tolerance)
    for r in results:
        print("\n".join(r.lines()))
    ok = all(r.passed for r in results)
    print("all suites passed" if ok else "some suites FAILED")
    return EXIT_OK if ok else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="thermofield",
                                     description="Thermofield-double MPS simulations.")
    parser.add_argument("--threads", type=int, default=None,
                        help=f"BLAS/LAPACK threads (default: ${THREADS_ENV} or library default)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="evolve a configured state and write results")
    p.add_argument("config", help="experiment config (JSON)")
    p.add_argument("--output", help="output directory (default: config output_dir)")
    p.add_argument("--resume", help="resume token or checkpoint from an earlier run")
    p.add_argument("--max-seconds", type=float, help="wall-clock budget")
    p.add_argument("--max-bytes", type=int, help="state memory budget")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("analyze", help="fit scaling laws and compare with theory")
    p.add_argument("results", help="run output directory")
    p.add_argument("--spec", help="analysis overrides (JSON)")
    p.add_argument("--output", help="report path (default: RESULTS/report.json)")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("report", help="write plot-ready CSV tables")
    p.add_argument("results", help="run output directory")
    p.add_argument("--spec", help="analysis overrides (JSON)")
    p.add_argument("--output", help="table directory (default: RESULTS)")
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("verify", help="oracle and inequality self-checks")
    p.add_argument("--suite", default="all",
                   help="comma-separated subset of ed,inequality,majorization,trotter,norms")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--results", help="compare a finished small-L run with exact diagonalization")
    p.add_argument("--quick", action="store_true", help="smaller random samples")
    p.add_argument("--tolerance", type=float, default=1e-6,
                   help="allowed deviation from exact diagonalization (ed suite)")
    p.set_defaults(func=_cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    n = _threads(args)
    with threadpool_limits(limits=n) if n else nullcontext():
        from .errors import DataError, ParameterError

        try:
            return args.func(args)
        except (DataError, ParameterError, FileNotFoundError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
