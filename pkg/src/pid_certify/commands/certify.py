"""certify: build, check and report a Lyapunov certificate"""

import argparse
import logging

from ..artifacts import write_report, write_trajectory_csv
from ..certificates import (
    build_certificate,
    certificate_report,
    check_P,
    estimate_constants,
    eval_V_series,
)
from ..config import get_settings
from ..errors import CertificateInvalidError
from ..plants import plant_from_spec
from ..regions import scale_gains
from ..simulator import resolve_horizon, simulate
from . import CommandContext

logger = logging.getLogger(__name__)


def certify(ctx: CommandContext) -> int:
    config = ctx.config
    settings = get_settings()
    gains = ctx.require(config.gains, "gains")
    bounds = ctx.require(config.bounds, "bounds")
    plant = plant_from_spec(ctx.require(config.plant, "plant"))
    seed = ctx.require_seed()

    b = config.b_actual or gains.b_lower
    ystar = ctx.vector(config.setpoint, plant.n, "setpoint", 1.0)
    cert = build_certificate(
        scale_gains(gains, b), bounds, plant, ystar, config.certify.mode
    )

    traj = None
    if config.certify.simulate:
        traj = simulate(
            plant,
            gains,
            b,
            ystar,
            ctx.vector(config.x0, plant.n, "x0", 0.0),
            ctx.vector(config.v0, plant.n, "v0", 0.0),
            resolve_horizon(config.sim, gains, b, bounds),
        )

    samples = config.certify.samples or settings.CERTIFY_SAMPLES
    radius = config.certify.radius or settings.SAMPLE_RADIUS
    report = certificate_report(
        cert, samples=samples, seed=seed, radius=radius, traj=traj
    )
    if config.certify.empirical:
        empirical = estimate_constants(cert, samples, seed, radius)
        report = report.model_copy(update={"empirical": empirical})
    write_report(report, ctx.out / "certificate.json")
    if traj is not None:
        write_trajectory_csv(
            traj, ctx.out / "certified_trajectory.csv", V=eval_V_series(cert, traj)
        )

    try:
        check_P(cert)
    except CertificateInvalidError as e:
        logger.error("Certificate invalid: %s", e.detail)
        return e.exit_code
    logger.info(
        "Certificate valid (%s): mu=%.6g, sampled min eig Q=%.6g",
        cert.mode.value,
        cert.mu,
        report.q_min_eig_sampled,
    )
    return 0


def register(subparsers: argparse._SubParsersAction) -> None:
    subparsers.add_parser(
        "certify", help="Lyapunov certificate report"
    ).set_defaults(handler=certify)
