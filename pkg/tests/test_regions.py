import math

import numpy as np
import pytest

from pid_certify.errors import DomainError, RegionError
from pid_certify.models import ClassBounds, GainTriple, ScaledGains
from pid_certify.regions import (
    check_gains,
    check_ray_monotonicity,
    in_omega1,
    in_omega2,
    kbar,
    scale_gains,
    slice_grid,
    zeta,
)

UNIT = ClassBounds(L1=1.0, L2=1.0)


def random_omega1(rng, count):
    """Scaled gains inside Omega1 with a product gap of at least 0.05"""
    samples = []
    for _ in range(count):
        b = ClassBounds(L1=rng.uniform(-2, 3), L2=rng.uniform(0, 3))
        k0 = rng.uniform(0.01, 5)
        d = rng.uniform(0.05, 5)
        k2 = b.L2 + d
        need = k0 + kbar(k0, k2, b.L2) + rng.uniform(0.05, 5)
        samples.append((ScaledGains(k1=b.L1 + need / d, k0=k0, k2=k2), b))
    return samples


def test_kbar_value_and_domain():
    assert kbar(1.0, 3.0, 1.0) == pytest.approx(4.0)
    assert kbar(5.0, 2.0, 0.0) == 0.0
    with pytest.raises(DomainError):
        kbar(-1.0, 1.0, 1.0)


def test_scale_gains_requires_positive_b():
    g = GainTriple(kp=1, ki=2, kd=3, b_lower=1)
    assert scale_gains(g, 2.0) == ScaledGains(k1=2, k0=4, k2=6)
    with pytest.raises(DomainError):
        scale_gains(g, 0.0)


def test_reference_triple_is_in_both_regions():
    s = ScaledGains(k1=5, k0=1, k2=3)
    v1, v2 = in_omega1(s, UNIT), in_omega2(s, UNIT)
    assert v1.in_region and v1.product_gap == pytest.approx(3.0)
    assert v2.in_region and v2.product_gap == pytest.approx(7.0)
    assert v1.failed_inequality is None


def test_boundary_is_outside_with_zero_margin():
    v = in_omega2(ScaledGains(k1=3, k0=2, k2=2), UNIT)
    assert not v.in_region
    assert v.product_gap == 0.0
    assert v.failed_inequality == "product gap > 0"


@pytest.mark.parametrize(
    "s, failed",
    [
        (ScaledGains(k1=1, k0=1, k2=3), "k1 > L1"),
        (ScaledGains(k1=5, k0=1, k2=0.5), "k2 > L2"),
        (ScaledGains(k1=5, k0=0, k2=3), "k0 > 0"),
    ],
)
def test_failed_inequality_names(s, failed):
    assert in_omega1(s, UNIT).failed_inequality == failed
    assert in_omega2(s, UNIT).failed_inequality == failed


def test_omega1_inside_omega2():
    rng = np.random.default_rng(0)
    for _ in range(10_000):
        b = ClassBounds(L1=rng.uniform(-2, 3), L2=rng.uniform(0, 3))
        s = ScaledGains(
            k1=rng.uniform(-3, 10), k0=rng.uniform(-1, 10), k2=rng.uniform(-1, 10)
        )
        if in_omega1(s, b).in_region:
            assert in_omega2(s, b).in_region


def test_rays_stay_in_omega1_and_zeta_is_nondecreasing():
    rng = np.random.default_rng(3)
    alphas = [1.0, 1.5, 2.0, 5.0, 10.0]
    for s, b in random_omega1(rng, 1000):
        report = check_ray_monotonicity(s, b, alphas)
        assert report.passed
        for a in alphas:
            scaled = ScaledGains(k1=a * s.k1, k0=a * s.k0, k2=a * s.k2)
            assert in_omega1(scaled, b).in_region


def test_zeta_at_one_is_the_product_gap():
    s = ScaledGains(k1=5, k0=1, k2=3)
    assert zeta(1.0, s, UNIT) == pytest.approx(in_omega1(s, UNIT).product_gap)
    with pytest.raises(DomainError):
        zeta(0.5, s, UNIT)


def test_ray_check_refuses_gains_outside_omega1():
    with pytest.raises(RegionError) as exc:
        check_ray_monotonicity(ScaledGains(k1=2, k0=2, k2=2), UNIT, [1.0, 2.0])
    assert exc.value.inequality == "product gap > 0"
    assert exc.value.margin < 0


def test_check_gains_scales_by_lower_bound():
    g = GainTriple(kp=2.5, ki=0.5, kd=1.5, b_lower=2.0)
    v1, v2 = check_gains(g, UNIT)
    assert v1.in_region and v2.in_region
    assert v2.product_gap == pytest.approx(7.0)


def test_slice_hyperbola_without_uncertainty():
    bounds = ClassBounds(L1=0.0, L2=0.0)
    grid = slice_grid(bounds, 1.0, "ki", 1.0, ((0.0, 3.0), (0.0, 3.0)), (4, 7))
    assert grid.axes == ("kp", "kd")
    assert len(grid.cells) == 28
    assert (grid.cells[0].x, grid.cells[0].y) == (0.0, 0.0)
    assert (grid.cells[1].x, grid.cells[1].y) == (0.0, 0.5)
    for cell in grid.cells:
        assert cell.in_omega1 == (cell.x * cell.y > 1.0)
        assert cell.in_omega1 == cell.in_omega2


def test_slice_rejects_degenerate_input():
    with pytest.raises(DomainError):
        slice_grid(UNIT, 1.0, "kp", 1.0, ((1.0, 1.0), (0.0, 1.0)), (5, 5))
    with pytest.raises(DomainError):
        slice_grid(UNIT, 1.0, "kp", 1.0, ((0.0, 1.0), (0.0, 1.0)), (1, 5))
    with pytest.raises(DomainError):
        slice_grid(UNIT, 1.0, "kp", 1.0, ((0.0, math.inf), (0.0, 1.0)), (5, 5))


def test_membership_is_preserved_for_larger_input_gain():
    rng = np.random.default_rng(4)
    for s, bounds in random_omega1(rng, 200):
        g = GainTriple(kp=s.k1, ki=s.k0, kd=s.k2, b_lower=1.0)
        for ratio in (1.0, 2.5, 10.0):
            assert in_omega1(scale_gains(g, ratio), bounds).in_region
            assert in_omega2(scale_gains(g, ratio), bounds).in_region


def test_regions_coincide_without_damping_uncertainty():
    rng = np.random.default_rng(6)
    bounds = ClassBounds(L1=0.5, L2=0.0)
    for _ in range(1000):
        s = ScaledGains(
            k1=rng.uniform(-1, 5), k0=rng.uniform(-1, 5), k2=rng.uniform(-1, 5)
        )
        assert in_omega1(s, bounds).in_region == in_omega2(s, bounds).in_region
