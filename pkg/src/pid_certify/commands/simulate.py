"""simulate: one closed-loop trajectory with its verdict"""

import argparse
import logging

from ..artifacts import write_report, write_trajectory_csv
from ..certificates import build_certificate, vdot_along
from ..errors import CertificateInapplicableError, RegionError
from ..models import CertificateMode, PlantClass, SimulationSummary, Verdict
from ..plants import plant_from_spec
from ..regions import scale_gains
from ..simulator import resolve_horizon, simulate
from . import CommandContext

logger = logging.getLogger(__name__)


def run(ctx: CommandContext) -> int:
    """Trajectory CSV plus summary; exit 2 unless the run converged"""
    config = ctx.config
    gains = ctx.require(config.gains, "gains")
    plant = plant_from_spec(ctx.require(config.plant, "plant"))
    b = config.b_actual or gains.b_lower
    ystar = ctx.vector(config.setpoint, plant.n, "setpoint", 1.0)

    traj = simulate(
        plant,
        gains,
        b,
        ystar,
        ctx.vector(config.x0, plant.n, "x0", 0.0),
        ctx.vector(config.v0, plant.n, "v0", 0.0),
        resolve_horizon(config.sim, gains, b, config.bounds or plant.bounds),
    )

    # V is attached only when the plant claims a class and a certificate exists
    vdot = None
    if config.bounds is not None and plant.claim is not PlantClass.UNCHECKED:
        try:
            cert = build_certificate(
                scale_gains(gains, b),
                config.bounds,
                plant,
                ystar,
                CertificateMode.THEOREM1,
            )
            vdot = vdot_along(cert, traj)
        except (RegionError, CertificateInapplicableError) as e:
            logger.info("No certificate attached: %s", e.detail)

    path = write_trajectory_csv(
        traj, ctx.out / "trajectory.csv", V=None if vdot is None else vdot.V
    )
    summary = SimulationSummary(
        verdict=traj.verdict,
        decision_time=traj.decision_time,
        final_error=traj.final_error,
        final_time=float(traj.times[-1]),
        samples=int(traj.times.size),
        trajectory_path=str(path),
        certificate_mode=None if vdot is None else CertificateMode.THEOREM1,
        vdot_max=None if vdot is None else vdot.max_value,
    )
    write_report(summary, ctx.out / "simulation.json")
    logger.info("Verdict: %s, |e(T)| = %.3e", traj.verdict.value, traj.final_error)
    return 0 if traj.verdict is Verdict.CONVERGED else 2


def register(subparsers: argparse._SubParsersAction) -> None:
    subparsers.add_parser("simulate", help="simulate the PID loop").set_defaults(
        handler=run
    )
