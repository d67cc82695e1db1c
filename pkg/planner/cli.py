"""
Command-line interface for the SRBD planner.

Usage:
    srbd-planner run scenarios/flat_crawl.yaml                  # Plan, validate, write artifacts
    srbd-planner run scenarios/pallet10_*.yaml --jobs 3         # Several scenarios in parallel
    srbd-planner run scenarios/flat_crawl.yaml --no-polytope    # Baseline formulation
    srbd-planner check out/flat_crawl/trajectory.csv scenarios/flat_crawl.yaml
    srbd-planner polytope-dump scenarios/flat_crawl.yaml --leg LH --l-samples 10 --alpha-samples 5
    srbd-planner jacobian-check scenarios/flat_crawl.yaml

Exit codes: 0 converged and every validator passed, 1 solver did not converge,
2 a validator failed (or the input was rejected).
"""

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

from planner import pipeline
from planner.config import configure_logging, get_settings
from planner.errors import PlannerError


def _print_report(name: str, report) -> None:
    if report.exit_code == pipeline.EXIT_OK:
        print(f"✓ {name}: converged, all validators passed")
        return
    if report.solve is not None and not report.solve.converged:
        print(f"✗ {name}: solver {report.solve.status} "
              f"(violation {report.solve.max_violation:.2e} in {report.solve.worst_block})")
    for failure in report.failures:
        print(f"✗ {name}: {failure}")


def _run_one(path: str, out_dir: str, no_polytope: bool, no_shin: bool, no_foot_radius: bool,
             log_level: str) -> int:
    configure_logging(log_level)
    try:
        report = pipeline.run_scenario(path, out_dir, no_polytope, no_shin, no_foot_radius)
    except PlannerError as e:
        print(f"✗ {path}: {pipeline.describe_error(e)}")
        return pipeline.EXIT_VALIDATION
    _print_report(report.scenario, report)
    return report.exit_code


def run_command(args) -> int:
    settings = get_settings()
    jobs = args.jobs or settings.jobs
    shared = (str(args.out_dir), args.no_polytope, args.no_shin, args.no_foot_radius, settings.log_level)

    if jobs == 1 or len(args.scenarios) == 1:
        codes = [_run_one(path, *shared) for path in args.scenarios]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_run_one, path, *shared) for path in args.scenarios]
            codes = [future.result() for future in futures]
    return max(codes)


def check_command(args) -> int:
    try:
        report = pipeline.check_trajectory(args.trajectory, args.scenario, args.out_dir)
    except PlannerError as e:
        print(f"✗ {args.trajectory}: {pipeline.describe_error(e)}")
        return pipeline.EXIT_VALIDATION
    _print_report(report.scenario, report)
    return report.exit_code


def polytope_dump_command(args) -> int:
    try:
        polytopes, errors = pipeline.polytope_dump(
            args.scenario, args.leg, args.l_samples, args.alpha_samples, args.alpha_max, args.out_dir
        )
    except (PlannerError, KeyError) as e:
        print(f"✗ polytope dump failed: {e}")
        return pipeline.EXIT_VALIDATION
    print(f"✓ Wrote {polytopes} and {errors}")
    return pipeline.EXIT_OK


def jacobian_check_command(args) -> int:
    try:
        report = pipeline.jacobian_check(args.scenario, args.out_dir, args.seed, args.step)
    except PlannerError as e:
        print(f"✗ jacobian check failed: {pipeline.describe_error(e)}")
        return pipeline.EXIT_VALIDATION
    for check in report.blocks:
        if not check.analytic:
            print(f"  {check.name}: finite differences ({check.blocks} blocks)")
            continue
        mark = "✓" if check.max_rel_error < report.tolerance else "✗"
        kinks = f", {check.kinks} at a kink" if check.kinks else ""
        print(f"{mark} {check.name}: max relative error {check.max_rel_error:.2e} ({check.blocks} blocks{kinks})")
    return pipeline.EXIT_OK if report.passed else pipeline.EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="srbd-planner", description="SRBD trajectory planner for legged robots")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out-dir", type=Path, default=None, help="Artifact directory (default: PLANNER_OUT_DIR)")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="Plan, validate and write artifacts")
    run.add_argument("scenarios", nargs="+", help="Scenario YAML files")
    run.add_argument("--no-polytope", action="store_true", help="Drop force polytope and lateral force limits")
    run.add_argument("--no-shin", action="store_true", help="Drop shin clearance")
    run.add_argument("--no-foot-radius", action="store_true", help="Drop foot radius safety")
    run.add_argument("--jobs", type=int, default=None, help="Scenarios solved in parallel (default: PLANNER_JOBS)")
    run.set_defaults(handler=run_command)

    check = sub.add_parser("check", parents=[common], help="Validate an existing trajectory without solving")
    check.add_argument("trajectory", help="trajectory.csv")
    check.add_argument("scenario", help="Scenario YAML the trajectory was planned for")
    check.set_defaults(handler=check_command)

    dump = sub.add_parser("polytope-dump", parents=[common], help="Write morphed and exact polytopes over an (l, alpha) grid")
    dump.add_argument("scenario")
    dump.add_argument("--leg", default="LH")
    dump.add_argument("--l-samples", type=int, default=10)
    dump.add_argument("--alpha-samples", type=int, default=5)
    dump.add_argument("--alpha-max", type=float, default=0.4, help="rad")
    dump.set_defaults(handler=polytope_dump_command)

    jac = sub.add_parser("jacobian-check", parents=[common], help="Compare analytic constraint Jacobians with finite differences")
    jac.add_argument("scenario")
    jac.add_argument("--seed", type=int, default=0)
    jac.add_argument("--step", type=float, default=1e-6)
    jac.set_defaults(handler=jacobian_check_command)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    settings = get_settings()
    configure_logging(settings.log_level)
    if args.out_dir is None:
        args.out_dir = settings.out_dir
    if getattr(args, "jobs", None) is not None and args.jobs < 1:
        parser.error("--jobs must be at least 1")
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
