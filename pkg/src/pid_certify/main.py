"""Command-line entry point"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .artifacts import load_run_config
from .commands import (
    CommandContext,
    certify,
    classes,
    falsify,
    gap,
    region,
    simulate,
    sweep,
)
from .config import get_settings
from .errors import PidCertifyError

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    """Create the argument parser with every command group registered"""
    settings = get_settings()
    parser = argparse.ArgumentParser(
        prog="pid-certify",
        description="PID gain regions, Lyapunov certificates and counterexamples",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--config", type=Path, required=True, help="run config JSON")
    parser.add_argument(
        "--out", type=Path, default=settings.OUTPUT_DIR, help="artifact directory"
    )
    parser.add_argument(
        "--jobs", type=int, default=settings.JOBS, help="sweep worker threads"
    )
    parser.add_argument(
        "--seed", type=int, default=None, help="seed for sampled procedures"
    )
    parser.add_argument("--log-level", default=settings.LOG_LEVEL)

    subparsers = parser.add_subparsers(dest="command", required=True)
    for group in (region, certify, simulate, sweep, falsify, gap, classes):
        group.register(subparsers)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command; 0 success, 2 negative verdict, 1 error"""
    parser = build_parser()
    args = parser.parse_args(argv)

    # Configure logging
    logging.basicConfig(
        level=args.log_level.upper(),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    command = " ".join(filter(None, (args.command, getattr(args, "action", None))))

    try:
        if args.jobs < 1:
            raise PidCertifyError(f"--jobs must be >= 1, got {args.jobs}")
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise PidCertifyError(f"--seed must be a u64, got {args.seed}")
        config = load_run_config(args.config)
        ctx = CommandContext(
            config=config,
            out=args.out,
            jobs=args.jobs,
            seed=args.seed if args.seed is not None else config.seed,
        )
        logger.info("Running %s with %s", command, args.config)
        return args.handler(ctx)
    except PidCertifyError as e:
        logger.error("%s failed: %s", command, e.detail)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
