"""
CLI module for the benchmark harness.
Contains the `solve` and `bench` subcommands.

Exit codes: 0 on success, 2 on a configuration error, 3 on a runtime error.
"""
import argparse
import json
import logging
import os
import sys
from dataclasses import asdict
from typing import List, Optional

from dotenv import load_dotenv
from pydantic import ValidationError

from cubic_newton.config import DEFAULT_BUDGET, DEFAULT_EPS, DEFAULT_TAU0, DriverConfig
from cubic_newton.driver import first_order_cnm, zero_order_cnm
from cubic_newton.errors import CubicNewtonError, UnknownProblem

from .problems import get_entry
from .runner import BenchmarkSpec, resolve_m, run_benchmark

# Load environment variables
load_dotenv()

# Setup logging
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _split(value: str) -> List[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cnm", description="Lazy finite-difference cubic Newton methods: single runs and benchmarks.")
    commands = parser.add_subparsers(dest="command", required=True)

    def common(sub: argparse.ArgumentParser):
        sub.add_argument("--tau0", type=float, default=DEFAULT_TAU0, help="initial regularization proxy")
        sub.add_argument("--eps", type=float, default=DEFAULT_EPS, help="target stationarity")
        sub.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="oracle call budget")
        sub.add_argument("--second-order", action="store_true", help="enforce the curvature certificate")
        sub.add_argument("--seed", type=int, default=0, help="seed for synthetic problems")

    solve = commands.add_parser("solve", help="run one method on one problem and print the report")
    solve.add_argument("--method", choices=["fo", "zo"], default="fo")
    solve.add_argument("--problem", "-p", required=True)
    solve.add_argument("--m", default="n", help="lazy steps per Hessian: integer, n or 2n")
    solve.add_argument("--trace", action="store_true", help="include the inner trace in the report")
    common(solve)

    bench = commands.add_parser("bench", help="run a benchmark sweep and write its artifacts")
    bench.add_argument("--methods", "--method", dest="methods", default="fo",
                       help="comma-separated subset of fo,zo")
    bench.add_argument("--m", default="1,n,2n", help="comma-separated m choices")
    bench.add_argument("--problem", "-p", default="all", help="comma-separated names or 'all'")
    bench.add_argument("--out", default=os.getenv("CNM_OUTPUT_DIR", "./results"))
    bench.add_argument("--jobs", type=int, default=None, help="parallel runs (default: CNM_JOBS or 1)")
    bench.add_argument("--trace", action=argparse.BooleanOptionalAction, default=True,
                       help="write per-run trace files (default on)")
    common(bench)
    return parser


def _solve(args) -> int:
    try:
        entry = get_entry(args.problem, args.seed)
        cfg = DriverConfig(tau0=args.tau0, eps=args.eps, m=resolve_m(args.m, entry.dim),
                           budget=args.budget, second_order=args.second_order,
                           record_trace=args.trace or args.second_order)
        problem = entry.build()
    except (ValidationError, UnknownProblem, ValueError) as e:
        logger.error(f"❌ configuration error: {e}")
        return EXIT_CONFIG

    solver = first_order_cnm if args.method == "fo" else zero_order_cnm
    try:
        report = solver(problem, entry.start, cfg)
    except (CubicNewtonError, OSError) as e:
        logger.error(f"❌ run failed: {e}")
        return EXIT_RUNTIME

    payload = report.summary()
    if args.trace and report.full_trace is not None:
        payload["trace"] = [asdict(row) for row in report.full_trace]
    print(json.dumps(payload, indent=2))
    return EXIT_OK


def _bench(args) -> int:
    # unset --jobs falls back to CNM_JOBS, validated by BenchmarkSpec
    jobs = {} if args.jobs is None else {"jobs": args.jobs}
    try:
        spec = BenchmarkSpec(methods=_split(args.methods), m_choices=_split(args.m),
                             problems=_split(args.problem), tau0=args.tau0, eps=args.eps,
                             budget=args.budget, seed=args.seed, output_dir=args.out,
                             second_order=args.second_order, trace=args.trace, **jobs)
        for name in spec.problems:
            if name.lower() != "all":
                get_entry(name, spec.seed)
    except (ValidationError, UnknownProblem, ValueError) as e:
        logger.error(f"❌ configuration error: {e}")
        return EXIT_CONFIG

    try:
        result = run_benchmark(spec)
    except (CubicNewtonError, OSError) as e:
        logger.error(f"❌ benchmark failed: {e}")
        return EXIT_RUNTIME

    for path in result.files:
        if path.parent.name != "traces":
            print(path)
    return EXIT_OK


def cli_main(argv: Optional[List[str]] = None) -> int:
    """Parse argv, dispatch to a subcommand and return the exit code."""
    logging.basicConfig(level=getattr(logging, os.getenv("LOG_LEVEL", "INFO").upper(), logging.INFO))
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code not in (0, None) else EXIT_OK
    if args.command == "solve":
        return _solve(args)
    return _bench(args)


if __name__ == "__main__":
    sys.exit(cli_main())
