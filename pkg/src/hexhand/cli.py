"""Command line front end.

Exit codes: 0 success, 2 configuration error, 3 scenario/runtime error,
4 I/O error.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import __version__
from .config import ConfigError, expand_scenarios, parse_config, with_overrides
from .simulator import (
    ScenarioError,
    format_summary,
    run_scenario,
    run_sweep,
    write_events_csv,
    write_summary,
    write_trace_csv,
)
from .topology import hex_ring_map, save_map

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SCENARIO = 3
EXIT_IO = 4


def _cmd_run(args: argparse.Namespace) -> int:
    try:
        with open(args.config, encoding="utf-8") as f:
            text = f.read()
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO

    cfg = parse_config(text)
    cfg = with_overrides(cfg, seed=args.seed, out_dir=args.out)
    if not args.sweep and cfg.has_grids():
        raise ConfigError("config declares sweep grids; run with --sweep")

    specs = expand_scenarios(cfg)
    out_dir = cfg.out_dir
    os.makedirs(out_dir, exist_ok=True)

    if args.sweep:
        result = run_sweep(specs, jobs=args.jobs)
        for idx, reason in result.failures:
            print(f"scenario {idx} ({specs[idx].label}): {reason}", file=sys.stderr)
        write_events_csv(result.events, os.path.join(out_dir, "events.csv"))
        write_summary(result.metrics, os.path.join(out_dir, "summary.txt"))
        print(format_summary(result.metrics), end="")
        if args.figures:
            print("note: --figures applies to single runs; skipped", file=sys.stderr)
        if specs and result.metrics.n_failed == len(specs):
            return EXIT_SCENARIO
        return EXIT_OK

    result = run_scenario(specs[0])
    write_trace_csv(result.trace, os.path.join(out_dir, "trace.csv"))
    write_events_csv(result.events, os.path.join(out_dir, "events.csv"))
    write_summary(result.metrics, os.path.join(out_dir, "summary.txt"))
    print(format_summary(result.metrics), end="")
    if args.figures:
        from .report import render_run_figures

        for path in render_run_figures(out_dir):
            print(path)
    return EXIT_OK


def _cmd_genmap(args: argparse.Namespace) -> int:
    ap_map = hex_ring_map(
        args.rings,
        args.edge,
        orientation=args.orientation,
        neighbor_threshold=args.threshold,
    )
    save_map(ap_map, args.out)
    print(f"{args.out}: {len(ap_map.aps)} APs, edge {args.edge} m")
    return EXIT_OK


def _cmd_report(args: argparse.Namespace) -> int:
    from .report import render_run_figures

    try:
        written = render_run_figures(args.run_dir, args.out)
    except FileNotFoundError as exc:
        print(f"missing run output: {exc}", file=sys.stderr)
        return EXIT_IO
    for path in written:
        print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hexhand",
        description="GPS-assisted access point prediction: scenario simulator and reporting",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario or sweep from a config file")
    p_run.add_argument("config", help="path to a key=value config file")
    p_run.add_argument("--out", help="output directory (overrides config out_dir)")
    p_run.add_argument("--seed", type=int, help="master seed (overrides config seed)")
    p_run.add_argument("--sweep", action="store_true", help="expand declared parameter grids")
    p_run.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    p_run.add_argument("--figures", action="store_true", help="render figures after a single run")
    p_run.set_defaults(func=_cmd_run)

    p_map = sub.add_parser("genmap", help="generate a hexagonal ring map file")
    p_map.add_argument("--rings", type=int, required=True, help="ring count around the center cell")
    p_map.add_argument("--edge", type=float, required=True, help="hexagon edge length in meters")
    p_map.add_argument("--orientation", choices=("flat", "pointy"), default="flat")
    p_map.add_argument("--threshold", type=float, default=0.0,
                       help="neighbor distance threshold in meters (0 = default)")
    p_map.add_argument("--out", required=True, help="output map file")
    p_map.set_defaults(func=_cmd_genmap)

    p_rep = sub.add_parser("report", help="render figures for a completed run directory")
    p_rep.add_argument("run_dir", help="directory containing trace.csv/events.csv")
    p_rep.add_argument("--out", help="directory for figures (default: run_dir)")
    p_rep.set_defaults(func=_cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_SCENARIO
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
