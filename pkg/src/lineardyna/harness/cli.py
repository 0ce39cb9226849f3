"""Command line entry point: ``lineardyna run|sweep|verify``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..errors import ConfigError
from .config import load_config
from .runner import run_experiment
from .sweep import run_sweep, write_run
from .verify import run_checks

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGED = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lineardyna", description="Linear Dyna experiments.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in (("run", "run one configuration"), ("sweep", "run every cell of a grid config")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("config", type=Path)
        p.add_argument("--out", type=Path, default=Path("."), help="output directory")
        p.add_argument("--seeds", type=int, default=None, help="override run.seeds")
        p.add_argument("--jobs", type=int, default=1, help="worker processes")
        p.add_argument("--strict", action="store_true", help="exit 2 if any run diverged")
    v = sub.add_parser("verify", help="run the analysis oracle self-checks")
    v.add_argument("--seed", type=int, default=0)
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "verify":
        return EXIT_OK if run_checks(args.seed) else 1

    try:
        text = args.config.read_text(encoding="utf-8")
        if args.command == "run":
            cfg = load_config(args.config, seeds=args.seeds)
    except (OSError, ConfigError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    stem = args.config.stem
    if args.command == "run":
        curves = run_experiment(cfg, args.jobs)
        path = write_run(cfg, curves, args.out, stem)
        diverged = sum(c.diverged for c in curves)
        print(f"wrote {path} ({len(curves)} runs, {diverged} diverged)")
    else:
        try:
            results = run_sweep(text, args.out, stem, args.jobs, seeds=args.seeds)
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        diverged = sum(r.n_diverged for r in results)
        print(f"wrote {len(results)} cells and {args.out / (stem + '.summary.csv')} ({diverged} diverged runs)")
    if args.strict and diverged:
        return EXIT_DIVERGED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
