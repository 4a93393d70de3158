"""class check: sampled F / G membership of a plant"""

import argparse
import logging

from ..artifacts import write_report
from ..models import PlantClass
from ..plants import check_membership, plant_from_spec
from . import CommandContext

logger = logging.getLogger(__name__)


def check(ctx: CommandContext) -> int:
    """Exit 2 when the plant fails the class it claims (F when unchecked)"""
    config = ctx.config
    spec = ctx.require(config.plant, "plant")
    bounds = ctx.require(config.bounds or spec.bounds, "bounds")
    seed = ctx.require_seed()
    box = config.membership

    report = check_membership(
        plant_from_spec(spec),
        bounds,
        (box.lower, box.upper),
        samples=box.samples,
        seed=seed,
    )
    write_report(report, ctx.out / "membership.json")
    passed = report.member_g if spec.claim is PlantClass.G else report.member_f
    if not passed:
        logger.warning(
            "Plant fails the %s conditions on the sampled box", spec.claim.value
        )
    return 0 if passed else 2


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("class", help="plant class membership")
    actions = parser.add_subparsers(dest="action", required=True)
    actions.add_parser("check", help="sampled F / G conditions").set_defaults(
        handler=check
    )
