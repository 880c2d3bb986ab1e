"""Command line entry point.

    burg2d <subcommand> --config experiment.cfg --out results/

Subcommands mirror the experiment families (run, sweep, semigroup,
selfsim, calibrate, validate); the subcommand must agree with the
config's experiment name.  Exit codes: 0 all checks passed, 1 at least
one check failed, 2 configuration problem.

Environment variables BURG2D_<SECTION>_<KEY> override config values
(for example BURG2D_GRID_N1=512); BURG2D_KERNELS selects the compute
backend (auto, numba, numpy).
"""

from __future__ import annotations

import argparse
import sys

from .config import (EXPERIMENTS, ConfigError, apply_env_overrides,
                     parse_config)
from .experiments import execute


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="burg2d",
        description="Finite-volume laboratory for the 2-D Burgers equation "
                    "with nearly singular data.")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run a '{name}' experiment config")
        p.add_argument("--config", required=True, help="path to the config file")
        p.add_argument("--out", required=True, help="output directory for artifacts")
        p.add_argument("--jobs", type=int, default=1,
                       help="parallel jobs for sweep members (default 1)")
        p.add_argument("--format", choices=("csv", "raw"), default=None,
                       help="snapshot payload format (default: from config)")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"burg2d: cannot read config: {exc}", file=sys.stderr)
        return 2
    try:
        cfg = parse_config(text)
        overrides = apply_env_overrides(cfg)
    except ConfigError as exc:
        print(f"burg2d: config error: {exc}", file=sys.stderr)
        return 2
    if cfg.experiment != args.subcommand:
        print(f"burg2d: config declares experiment {cfg.experiment!r} but "
              f"subcommand is {args.subcommand!r}", file=sys.stderr)
        return 2
    for sec, key, val in overrides:
        print(f"burg2d: override {sec}.{key} = {val}")
    if args.jobs < 1:
        print("burg2d: --jobs must be at least 1", file=sys.stderr)
        return 2
    summary = execute(cfg, args.out, fmt=args.format, jobs=args.jobs)
    for v in summary["verdicts"]:
        print(f"burg2d: [{v['status']}] {v['name']}: "
              f"value {v['value']:.6g} vs bound {v['bound']:.6g}")
    print(f"burg2d: {'all checks passed' if summary['ok'] else 'CHECK FAILURE'}; "
          f"artifacts in {args.out}")
    return 0 if summary["ok"] else 1


if __name__ == "__main__":
    sys.exit(main())
