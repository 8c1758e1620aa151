"""Command line entry point: dbm-edge <experiment> --config <file> ...

Exit codes: 0 when the run completes with all verdicts passing, 2 when it
completes but a verdict fails, 1 on configuration or runtime errors.
The output directory can be overridden by DBM_EDGE_OUTDIR.
"""

from __future__ import annotations

import argparse
import os
import sys

from .errors import DbmEdgeError
from .experiments import EXPERIMENTS, RunConfig, parse_config_text, render_report, run_experiment


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dbm-edge",
        description="Desk-scale edge statistics of Dyson Brownian motion")
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--seed", type=int, help="master seed override")
    parser.add_argument("--workers", type=int, help="worker count override")
    parser.add_argument("--out", help="output directory override")
    parser.add_argument("--render", action="store_true",
                        help="also emit plot-data files after the run")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config:
            with open(args.config) as fh:
                config = parse_config_text(fh.read())
        else:
            config = RunConfig()
        config.experiment = args.experiment
        if args.seed is not None:
            config.master_seed = args.seed
        if args.workers is not None:
            config.workers = args.workers
        outdir = args.out or os.environ.get("DBM_EDGE_OUTDIR") or config.outdir
        config.outdir = outdir
        config.validate()
        manifest = run_experiment(config)
        if args.render:
            render_report(outdir)
    except DbmEdgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1

    for name, ok in manifest.verdicts.items():
        print(f"{name}: {'pass' if ok else 'FAIL'}")
    print(f"outputs in {outdir}")
    return 0 if manifest.passed() else 2


if __name__ == "__main__":
    sys.exit(main())
