"""Command-line interface.

``swarmfv run CONFIG [--out DIR] [--snapshot-every K] [--fatal-invariants]``
    Run a simulation and write snapshots, diagnostics and metadata.
``swarmfv check CONFIG``
    Print the certified gradient bounds and the CFL verdict for a config.
``swarmfv convergence CONFIG [--levels N] [--mode M] [--out DIR]``
    Grid-refinement study; prints distances and empirical orders.

CONFIG is a path to a YAML file or the name of a shipped scenario.  Exit
codes: 0 success, 2 configuration/validation error, 3 numerical-integrity
failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from .config import list_scenarios, resolve_config
from .convergence import MODES, refinement_study
from .errors import ConfigurationError, NumericalIntegrityError
from .scheme import CFL_SLACK, FixedDt
from .sim import simulate


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swarmfv",
        description="Finite-volume solver for two-species nonlocal transport",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_parser = sub.add_parser("run", help="run a simulation and write its outputs")
    run_parser.add_argument("config", help="config file path or shipped scenario name")
    run_parser.add_argument("--out", help="output directory (default from config, else ./out)")
    run_parser.add_argument(
        "--snapshot-every", type=int, default=None, metavar="K",
        help="write snapshots every K steps (0 = endpoints only)",
    )
    run_parser.add_argument(
        "--fatal-invariants", action="store_true",
        help="abort on any runtime invariant failure instead of warning",
    )

    check_parser = sub.add_parser("check", help="validate a config and print its CFL budget")
    check_parser.add_argument("config", help="config file path or shipped scenario name")

    conv_parser = sub.add_parser("convergence", help="run a grid-refinement study")
    conv_parser.add_argument("config", help="config file path or shipped scenario name")
    conv_parser.add_argument("--levels", type=int, default=4, help="number of refinement levels")
    conv_parser.add_argument("--mode", choices=MODES, default="successive")
    conv_parser.add_argument("--out", help="directory for refinement.csv")
    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    config = resolve_config(args.config)
    out_dir = args.out or config.output_dir or "out"
    invariant_policy = "fatal" if args.fatal_invariants else None
    result = simulate(
        config,
        out_dir=out_dir,
        snapshot_every=args.snapshot_every,
        invariant_policy=invariant_policy,
    )
    final = result.records[-1]
    print(f"ran {final.step_index} steps to t = {final.time}")
    print(f"final masses: species1 = {final.mass1}, species2 = {final.mass2}")
    failures = sum(1 for report in result.invariant_reports if not report.passed)
    checked = len(result.invariant_reports)
    print(f"invariant checks: {checked - failures}/{checked} passed")
    print(f"outputs in {Path(out_dir).resolve()}")
    return 0


def _cmd_check(args: argparse.Namespace) -> int:
    config = resolve_config(args.config, enforce_cfl=False)
    bounds = config.certified_bounds()
    limit = config.cfl_limit()
    print(f"grid: cells {list(config.grid.cells)}, steps {list(config.grid.steps)}")
    print(f"gradient bound intra1 ({config.intra1}): {bounds[0]}")
    print(f"gradient bound intra2 ({config.intra2}): {bounds[1]}")
    print(f"gradient bound cross ({config.cross}): {bounds[2]}")
    print(f"mobility: {config.mobility}")
    print(f"largest stable dt: {limit}")
    if isinstance(config.dt_policy, FixedDt):
        dt = config.dt_policy.dt
        print(f"configured dt: {dt}")
        if dt > limit * (1.0 + CFL_SLACK):
            print("verdict: VIOLATION (dt exceeds the CFL budget)")
            return 2
        usage = dt / limit if math.isfinite(limit) else 0.0
        print(f"verdict: OK (uses {usage:.1%} of the budget)")
    else:
        fraction = config.dt_policy.fraction
        print(f"configured CFL fraction: {fraction} (dt = {fraction * limit})")
        print("verdict: OK")
    return 0


def _cmd_convergence(args: argparse.Namespace) -> int:
    config = resolve_config(args.config)
    report = refinement_study(config, levels=args.levels, mode=args.mode)
    lines = report.to_csv_lines()
    for line in lines:
        print(line)
    for name in report.distance_names:
        orders = report.observed_orders(name)
        if orders:
            printable = ", ".join(f"{order:.3f}" for order in orders)
            print(f"observed order ({name}): {printable}")
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        target = out_dir / "refinement.csv"
        target.write_text("\n".join(lines) + "\n")
        print(f"wrote {target.resolve()}")
    return 0


def run_cli(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {"run": _cmd_run, "check": _cmd_check, "convergence": _cmd_convergence}
    try:
        return handlers[args.command](args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalIntegrityError as exc:
        print(f"numerical integrity failure: {exc}", file=sys.stderr)
        return 3


def main() -> int:
    return run_cli(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
