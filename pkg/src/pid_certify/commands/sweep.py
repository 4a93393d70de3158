"""sweep: convergence map over gains x plants x initial states"""

import argparse
import asyncio
import logging

from ..artifacts import write_sweep_csv
from ..sweep import run_sweep
from . import CommandContext

logger = logging.getLogger(__name__)


def sweep(ctx: CommandContext) -> int:
    config = ctx.config
    spec = ctx.require(config.sweep, "sweep")
    bounds = ctx.require(config.bounds, "bounds")
    seed = ctx.require_seed()

    rows = asyncio.run(
        run_sweep(
            spec,
            bounds,
            config.sim,
            seed,
            jobs=ctx.jobs,
            b_actual=config.b_actual,
            setpoint=config.setpoint,
        )
    )
    write_sweep_csv(rows, ctx.out / "sweep.csv")
    failed = sum(1 for r in rows if r.status == "failed")
    if failed:
        logger.warning("%d of %d sweep runs failed", failed, len(rows))
    return 0


def register(subparsers: argparse._SubParsersAction) -> None:
    subparsers.add_parser("sweep", help="convergence map CSV").set_defaults(
        handler=sweep
    )
