"""falsify: worst-case counterexample for gains outside Omega2"""

import argparse

from ..artifacts import write_report, write_trajectory_csv
from ..falsifier import find_counterexample
from . import CommandContext


def falsify(ctx: CommandContext) -> int:
    config = ctx.config
    gains = ctx.require(config.gains, "gains")
    bounds = ctx.require(config.bounds, "bounds")
    n = len(config.setpoint) if config.setpoint else 1

    found = find_counterexample(gains, bounds, n=n)
    path = write_trajectory_csv(
        found.trajectory, ctx.out / "counterexample_trajectory.csv"
    )
    evidence = found.report.evidence.model_copy(update={"trajectory_path": str(path)})
    write_report(
        found.report.model_copy(update={"evidence": evidence}),
        ctx.out / "counterexample.json",
    )
    return 0


def register(subparsers: argparse._SubParsersAction) -> None:
    subparsers.add_parser(
        "falsify", help="counterexample for gains outside omega2"
    ).set_defaults(handler=falsify)
