"""Closed-form PID gain regions.

Omega1 (sufficient) and Omega2 (necessary) are open sets in the scaled gains
(k1, k0, k2) = (b kp, b ki, b kd):

    Omega1: k1 > L1, k2 > L2, k0 > 0, (k1 - L1)(k2 - L2) > k0 + kbar
    Omega2: k1 > L1, k2 > L2, k0 > 0, (k1 - L1)(k2 - L2) > k0

with kbar = 2 L2 sqrt(k0 (k2 + L2)). Boundary points are outside and report
a zero margin.
"""

import logging
import math
from typing import Literal, Sequence

import numpy as np

from .errors import DomainError, RegionError
from .models import (
    ClassBounds,
    GainTriple,
    RayReport,
    RegionSlice,
    RegionVerdict,
    ScaledGains,
    SliceCell,
)

logger = logging.getLogger(__name__)

RAY_TOL = 1e-9
AXES = ("kp", "ki", "kd")


def kbar(ki: float, kd: float, L2: float) -> float:
    """2 L2 sqrt(ki (kd + L2))"""
    radicand = ki * (kd + L2)
    if ki < 0 or kd + L2 < 0:
        raise DomainError(f"kbar undefined for ki={ki}, kd + L2={kd + L2}")
    return 2.0 * L2 * math.sqrt(radicand)


def scale_gains(g: GainTriple, b: float) -> ScaledGains:
    """(k1, k0, k2) = (b kp, b ki, b kd)"""
    if not b > 0:
        raise DomainError(f"input gain b must be positive, got {b}")
    return ScaledGains(k1=b * g.kp, k0=b * g.ki, k2=b * g.kd)


def _verdict(
    region: Literal["omega1", "omega2"], s: ScaledGains, b: ClassBounds, gap: float
) -> RegionVerdict:
    margins = (s.k1 - b.L1, s.k2 - b.L2, s.k0, gap)
    return RegionVerdict(
        region=region,
        in_region=all(m > 0 for m in margins),
        margin_p=margins[0],
        margin_d=margins[1],
        margin_i=margins[2],
        product_gap=margins[3],
    )


def in_omega1(s: ScaledGains, b: ClassBounds) -> RegionVerdict:
    """Membership in the sufficient region"""
    # k0 <= 0 or k2 + L2 < 0 already fails a margin; clip so kbar stays defined
    kb = kbar(max(s.k0, 0.0), max(s.k2, -b.L2), b.L2)
    gap = (s.k1 - b.L1) * (s.k2 - b.L2) - s.k0 - kb
    return _verdict("omega1", s, b, gap)


def in_omega2(s: ScaledGains, b: ClassBounds) -> RegionVerdict:
    """Membership in the necessary region"""
    gap = (s.k1 - b.L1) * (s.k2 - b.L2) - s.k0
    return _verdict("omega2", s, b, gap)


def check_gains(
    g: GainTriple, bounds: ClassBounds
) -> tuple[RegionVerdict, RegionVerdict]:
    """Both verdicts for raw gains, scaled once by the known lower bound b_lower"""
    s = scale_gains(g, g.b_lower)
    return in_omega1(s, bounds), in_omega2(s, bounds)


def zeta(alpha: float, s: ScaledGains, b: ClassBounds) -> float:
    """(a k1 - L1)(a k2 - L2) - a k0 - 2 L2 sqrt(a k0 (a k2 + L2))"""
    if alpha < 1:
        raise DomainError(f"alpha must be >= 1, got {alpha}")
    radicand = alpha * s.k0 * (alpha * s.k2 + b.L2)
    if radicand < 0:
        raise DomainError(f"negative radicand {radicand} at alpha={alpha}")
    return (
        (alpha * s.k1 - b.L1) * (alpha * s.k2 - b.L2)
        - alpha * s.k0
        - 2.0 * b.L2 * math.sqrt(radicand)
    )


def check_ray_monotonicity(
    s: ScaledGains, b: ClassBounds, alphas: Sequence[float]
) -> RayReport:
    """Check that zeta is nondecreasing on an increasing grid of alphas"""
    verdict = in_omega1(s, b)
    if not verdict.in_region:
        raise RegionError(
            "ray monotonicity needs gains inside Omega1",
            inequality=verdict.failed_inequality or "",
            margin=min(verdict.margins),
        )
    grid = sorted(float(a) for a in alphas)
    if len(grid) < 2:
        raise DomainError("need at least two alphas")
    values = [zeta(a, s, b) for a in grid]
    diffs = np.diff(values)
    scaled = diffs / (1.0 + np.abs(values[:-1]))
    min_scaled = float(scaled.min())
    return RayReport(
        alphas=grid,
        zetas=values,
        min_forward_difference=float(diffs.min()),
        min_scaled_difference=min_scaled,
        passed=min_scaled >= -RAY_TOL,
    )


def slice_grid(
    b: ClassBounds,
    b_lower: float,
    fixed: Literal["kp", "ki", "kd"],
    value: float,
    ranges: tuple[tuple[float, float], tuple[float, float]],
    resolution: tuple[int, int],
) -> RegionSlice:
    """
    Evaluate both regions on a grid over the two free raw gains.

    Args:
        b: Class bounds
        b_lower: Gain lower bound used for scaling
        fixed: Name of the gain held at value
        ranges: (lo, hi) for the free axes in kp, ki, kd order
        resolution: Points per free axis, each >= 2

    Returns:
        Row-major cells (first free axis outer)
    """
    if fixed not in AXES:
        raise DomainError(f"unknown gain axis {fixed!r}")
    if not b_lower > 0:
        raise DomainError(f"b_lower must be positive, got {b_lower}")
    free = tuple(a for a in AXES if a != fixed)
    for (lo, hi), count in zip(ranges, resolution):
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise DomainError(f"degenerate range ({lo}, {hi})")
        if count < 2:
            raise DomainError(f"resolution must be >= 2, got {count}")

    xs = np.linspace(ranges[0][0], ranges[0][1], resolution[0])
    ys = np.linspace(ranges[1][0], ranges[1][1], resolution[1])
    cells: list[SliceCell] = []
    for x in xs:
        for y in ys:
            raw = {fixed: value, free[0]: float(x), free[1]: float(y)}
            s = scale_gains(GainTriple(**raw, b_lower=b_lower), b_lower)
            v1 = in_omega1(s, b)
            v2 = in_omega2(s, b)
            cells.append(
                SliceCell(
                    x=float(x),
                    y=float(y),
                    in_omega1=v1.in_region,
                    in_omega2=v2.in_region,
                    gap1=v1.product_gap,
                    gap2=v2.product_gap,
                )
            )
    logger.info("Region slice: %d cells over %s x %s", len(cells), *free)
    return RegionSlice(axes=free, fixed=fixed, fixed_value=value, cells=cells)
