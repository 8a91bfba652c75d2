"""
Command-line entry point::

    risstat run --mode {convergence,sweep} --config CFG [--seed S] [--out DIR] [--workers K]

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .experiment import ConfigError, parse_config, run_convergence, run_rate_sweep
from .model import SingularMatrixError

log = logging.getLogger("risstat")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


def build_parser():
    parser = argparse.ArgumentParser(
        prog="risstat", description="Statistical-CSI RIS phase design experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a convergence study or a rate sweep")
    run.add_argument("--mode", choices=("convergence", "sweep"), required=True)
    run.add_argument("--config", required=True, help="INI experiment configuration")
    run.add_argument("--seed", type=int, default=None,
                     help="override the scenario seed (unsigned 64-bit)")
    run.add_argument("--out", default=None, help="output directory (overrides config)")
    run.add_argument("--workers", type=int, default=1,
                     help="worker processes for sweeps; results do not depend on it")
    run.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = parse_config(args.config)
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigError(f"--seed must be an unsigned 64-bit integer, got {args.seed}")
            cfg = cfg.with_seed(args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if args.mode == "convergence":
            path = run_convergence(cfg, args.out)
        else:
            path = run_rate_sweep(cfg, args.out, workers=args.workers)
    except SingularMatrixError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    log.info("wrote %s", path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
