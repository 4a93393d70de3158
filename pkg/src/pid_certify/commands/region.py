"""region check / region slice"""

import argparse
import logging

from ..artifacts import write_report, write_slice_csv
from ..models import RegionCheckReport
from ..regions import check_gains, scale_gains, slice_grid
from . import CommandContext

logger = logging.getLogger(__name__)


def check(ctx: CommandContext) -> int:
    """Verdicts and margins for both regions; exit 2 outside the target region"""
    config = ctx.config
    gains = ctx.require(config.gains, "gains")
    bounds = ctx.require(config.bounds, "bounds")
    omega1, omega2 = check_gains(gains, bounds)
    report = RegionCheckReport(
        gains=gains,
        bounds=bounds,
        scaled=scale_gains(gains, gains.b_lower),
        target=config.region,
        omega1=omega1,
        omega2=omega2,
    )
    write_report(report, ctx.out / "region_check.json")
    logger.info(
        "omega1=%s (gap %.6g), omega2=%s (gap %.6g)",
        omega1.in_region,
        omega1.product_gap,
        omega2.in_region,
        omega2.product_gap,
    )
    target = omega1 if config.region == "omega1" else omega2
    return 0 if target.in_region else 2


def slice_(ctx: CommandContext) -> int:
    """Region membership over a grid of two free gains"""
    bounds = ctx.require(ctx.config.bounds, "bounds")
    grid = ctx.require(ctx.config.grid, "grid")
    result = slice_grid(
        bounds,
        grid.b_lower,
        grid.fixed,
        grid.value,
        (grid.x_range, grid.y_range),
        grid.resolution,
    )
    write_slice_csv(result, ctx.out / "region_slice.csv")
    return 0


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("region", help="PID gain region queries")
    actions = parser.add_subparsers(dest="action", required=True)
    actions.add_parser("check", help="verdicts for both regions").set_defaults(
        handler=check
    )
    actions.add_parser("slice", help="CSV grid over two gains").set_defaults(
        handler=slice_
    )
