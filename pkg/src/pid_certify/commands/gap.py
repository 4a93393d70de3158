"""gap: simulate plants for gains between Omega1 and Omega2"""

import argparse
import logging

import numpy as np

from ..artifacts import write_report
from ..errors import UsageError
from ..falsifier import run_gap
from ..models import GapReport, Verdict
from ..plants import plant_from_spec
from . import CommandContext

logger = logging.getLogger(__name__)


def record(ctx: CommandContext) -> int:
    """Record the runs; the gap is open, so no verdict changes the exit code"""
    config = ctx.config
    gains = ctx.require(config.gains, "gains")
    bounds = ctx.require(config.bounds, "bounds")
    spec = ctx.require(config.gap, "gap")
    seed = ctx.require_seed()

    plants = [plant_from_spec(p) for p in spec.plants]
    dims = {p.n for p in plants}
    if len(dims) != 1:
        raise UsageError("plants must share one dimension", field="gap.plants")
    n = dims.pop()
    rng = np.random.default_rng(seed)
    radius = spec.state_radius
    starts = rng.uniform(-radius, radius, (spec.initial_states, n))
    ystar = ctx.vector(config.setpoint, n, "setpoint", 1.0)

    runs = run_gap(gains, bounds, plants, list(starts), ystar=ystar, cfg=config.sim)
    write_report(
        GapReport(gains=gains, bounds=bounds, runs=runs), ctx.out / "gap_runs.json"
    )
    stalled = sum(1 for r in runs if r.verdict is not Verdict.CONVERGED)
    if stalled:
        logger.warning("%d of %d gap runs did not converge", stalled, len(runs))
    return 0


def register(subparsers: argparse._SubParsersAction) -> None:
    subparsers.add_parser(
        "gap", help="simulate plants for gains in omega2 outside omega1"
    ).set_defaults(handler=record)
