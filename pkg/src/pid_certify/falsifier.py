"""Necessity side: worst-case plants that defeat gains outside Omega2.

With f(x1, x2) = L1 x1 + L2 x2 + c every coordinate decouples. Writing
e = y* - x1 and differentiating the scalar loop

    x1'' = L1 x1 + L2 x1' + c + b (kp e + ki int e - kd x1')

once more gives, since e' = -x1',

    e''' + (b kd - L2) e'' + (b kp - L1) e' + b ki e = 0.

The Routh-Hurwitz conditions of this cubic are exactly the Omega2
inequalities, so a failed condition leaves a root with Re >= 0 and the error
cannot decay for a generic start.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import NoCounterexampleError, RegionError
from .models import (
    ClassBounds,
    CounterexampleEvidence,
    CounterexampleReport,
    CubicPoly,
    GainTriple,
    GapRun,
    InequalityMargin,
    PlantKind,
    SimConfig,
    Verdict,
)
from .plants import Plant, make_builtin
from .regions import check_gains, scale_gains
from .simulator import Trajectory, resolve_horizon, simulate

logger = logging.getLogger(__name__)

COUNTEREXAMPLE_HORIZON = 200.0


def worst_case_poly(g: GainTriple, b: float, bounds: ClassBounds) -> CubicPoly:
    """Characteristic cubic of the error under the worst-case plant"""
    s = scale_gains(g, b)
    return CubicPoly(a2=s.k2 - bounds.L2, a1=s.k1 - bounds.L1, a0=s.k0)


def hurwitz_violations(p: CubicPoly) -> list[InequalityMargin]:
    """Every failed Routh-Hurwitz inequality of a monic cubic"""
    checks = [
        InequalityMargin(name="a2 > 0", lhs=p.a2, rhs=0.0),
        InequalityMargin(name="a1 > 0", lhs=p.a1, rhs=0.0),
        InequalityMargin(name="a0 > 0", lhs=p.a0, rhs=0.0),
        InequalityMargin(name="a2 a1 > a0", lhs=p.a2 * p.a1, rhs=p.a0),
    ]
    return [c for c in checks if not c.holds]


def hurwitz_cubic(p: CubicPoly) -> bool:
    """True iff every root lies in the open left half-plane"""
    return not hurwitz_violations(p)


def cubic_roots(p: CubicPoly) -> NDArray[np.complex128]:
    """Companion-matrix eigenvalues, each polished by one Newton step"""
    companion = np.array(
        [[-p.a2, -p.a1, -p.a0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], dtype=float
    )
    roots = np.linalg.eigvals(companion).astype(complex)
    coeffs = np.array(p.coefficients, dtype=float)
    deriv = np.polyder(coeffs)
    polished = []
    for r in roots:
        value = np.polyval(coeffs, r)
        slope = np.polyval(deriv, r)
        if slope != 0:
            step = r - value / slope
            if abs(np.polyval(coeffs, step)) <= abs(value):
                r = step
        polished.append(r)
    return np.array(sorted(polished, key=lambda z: (z.real, z.imag)))


@dataclass(frozen=True)
class Counterexample:
    """Worst-case plant, its run and the report that documents it"""

    plant: Plant
    b: float
    ystar: NDArray[np.float64]
    x0: NDArray[np.float64]
    trajectory: Trajectory
    report: CounterexampleReport


def _worst_case_run(
    g: GainTriple, bounds: ClassBounds, n: int, offset: float, cfg: SimConfig
) -> tuple[Plant, NDArray, NDArray, Trajectory]:
    c = np.zeros(n)
    c[0] = offset
    plant = make_builtin(PlantKind.WORST_CASE, n, bounds=bounds, c=c)
    ystar = np.zeros(n)
    ystar[0] = 1.0
    x0 = np.zeros(n)
    traj = simulate(plant, g, g.b_lower, ystar, x0, np.zeros(n), cfg)
    return plant, ystar, x0, traj


def find_counterexample(
    g: GainTriple,
    bounds: ClassBounds,
    n: int = 1,
    cfg: Optional[SimConfig] = None,
) -> Counterexample:
    """
    Build the worst-case plant for gains outside Omega2 and show it fails.

    Args:
        g: Raw gains; scaled by g.b_lower
        bounds: Class bounds
        n: State dimension of the plant
        cfg: Simulation settings; the default horizon is 200

    Returns:
        Counterexample with the failed inequality, roots and a non-converged run
    """
    _, v2 = check_gains(g, bounds)
    if v2.in_region:
        raise NoCounterexampleError(
            f"gains are inside omega2 (gap {v2.product_gap:.6g}); "
            "no counterexample is claimed there"
        )
    cfg = cfg or SimConfig(horizon=COUNTEREXAMPLE_HORIZON)

    poly = worst_case_poly(g, g.b_lower, bounds)
    failed = hurwitz_violations(poly)[0]
    roots = cubic_roots(poly)

    offset = 0.0
    plant, ystar, x0, traj = _worst_case_run(g, bounds, n, offset, cfg)
    if traj.verdict is Verdict.CONVERGED:
        logger.warning("Worst-case run converged by coincidence; retrying with c = 1")
        offset = 1.0
        plant, ystar, x0, traj = _worst_case_run(g, bounds, n, offset, cfg)
    if traj.verdict is Verdict.CONVERGED:
        logger.error("Worst-case run still converged for gains %s", g)

    evidence = CounterexampleEvidence(
        coefficients=poly.coefficients,
        failed_inequality=failed.name,
        inequality_margin=failed.margin,
        roots=[(float(r.real), float(r.imag)) for r in roots],
        max_real_part=float(roots.real.max()),
        verdict=traj.verdict,
        final_error=traj.final_error,
        offset=offset,
    )
    report = CounterexampleReport(
        gains=g,
        bounds=bounds,
        b=g.b_lower,
        setpoint=ystar.tolist(),
        evidence=evidence,
    )
    logger.info(
        "Counterexample: %s fails, max Re = %.6g, run %s",
        failed.name,
        evidence.max_real_part,
        traj.verdict.value,
    )
    return Counterexample(
        plant=plant, b=g.b_lower, ystar=ystar, x0=x0, trajectory=traj, report=report
    )


def run_gap(
    g: GainTriple,
    bounds: ClassBounds,
    plants: Sequence[Plant],
    initial_states: Sequence[ArrayLike],
    ystar: Optional[ArrayLike] = None,
    cfg: Optional[SimConfig] = None,
) -> list[GapRun]:
    """
    Simulate plants for gains in Omega2 but outside Omega1.

    Whether some class F plant destabilizes such gains is open; this only
    records what happens and draws no conclusion. An unset horizon is sized
    from the gains.
    """
    v1, v2 = check_gains(g, bounds)
    if not v2.in_region:
        raise RegionError(
            "gains outside omega2",
            inequality=v2.failed_inequality or "",
            margin=min(v2.margins),
        )
    if v1.in_region:
        raise RegionError(
            "gains inside omega1, not in the gap",
            inequality="omega1 product gap <= 0",
            margin=v1.product_gap,
        )
    cfg = resolve_horizon(cfg or SimConfig(), g, g.b_lower, bounds)

    observations = []
    for i, plant in enumerate(plants):
        target = np.ones(plant.n) if ystar is None else ystar
        for trial, x0 in enumerate(initial_states):
            traj = simulate(plant, g, g.b_lower, target, x0, np.zeros(plant.n), cfg)
            observations.append(
                GapRun(
                    plant=i,
                    trial=trial,
                    verdict=traj.verdict,
                    final_error=traj.final_error,
                )
            )
    logger.info("Gap runs: %d runs", len(observations))
    return observations
