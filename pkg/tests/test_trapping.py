import math

import numpy as np
import pytest

from mptrap.params import BlackHoleParams
from mptrap.trapping import (R_ab, R_ab_dx, R_ab_oracle, rho2_p,
                             trapped_radius, trapped_radius_vec, tau_roots,
                             tau_roots_vec, trapping_cutoffs, chi_geq_one,
                             measure_cone_constant, NoRoot)
from mptrap.geodesic import trapped_sphere


def test_static_reduction():
    p0 = BlackHoleParams(1.0, 0.0, 0.0)
    for x in (0.7, 1.3, 2.0, 2.5, 7.0):
        for tau in (1.0, -0.7, 2.3):
            expect = tau**2 * x**3 * (x - 2.0)
            assert abs(R_ab(p0, x, tau, 0.0, 0.0) - expect) < 1e-12 * max(1.0, abs(expect))
    assert R_ab(p0, 2.0, 1.0, 0.0, 0.0) == 0.0


def test_pinned_sample(bh_small):
    val = R_ab(bh_small, 2.1, 1.0, 0.1, -0.05)
    assert abs(val - 0.9899715111671025) < 1e-12


def test_oracle_agreement(bh_small, rng):
    worst = 0.0
    for _ in range(400):
        x = rng.uniform(1.3, 6.0)
        tau = rng.normal()
        Ph, Ps = 0.3 * rng.standard_normal(2)
        r1 = R_ab(bh_small, x, tau, Ph, Ps)
        r2 = R_ab_oracle(bh_small, x, tau, Ph, Ps)
        worst = max(worst, abs(r1 - r2) / max(1.0, abs(r1)))
    assert worst < 1e-8


def test_oracle_theta_independent(bh_small):
    v1 = R_ab_oracle(bh_small, 2.1, 1.0, 0.1, -0.05, theta=0.5)
    v2 = R_ab_oracle(bh_small, 2.1, 1.0, 0.1, -0.05, theta=1.2)
    assert abs(v1 - v2) < 1e-9 * max(1.0, abs(v1))


def test_radial_identity(bh_small, rng):
    """d_r(rho^2 p) = -2 r R Delta^-2 + d_r(Delta/r^2) xi^2, exactly in all
    fiber variables (not only on the characteristic set)."""
    a2, b2, rs2 = bh_small.a**2, bh_small.b**2, 1.0
    worst = 0.0
    for _ in range(400):
        r = rng.uniform(1.15, 2.4)
        th = rng.uniform(0.3, math.pi / 2 - 0.3)
        tau, xi, Th, Ph, Ps = rng.standard_normal(5)
        h = 1e-5
        d1 = (rho2_p(bh_small, r + h, th, tau, xi, Th, Ph, Ps)
              - rho2_p(bh_small, r - h, th, tau, xi, Th, Ph, Ps)) / (2 * h)
        d2 = (rho2_p(bh_small, r + h / 2, th, tau, xi, Th, Ph, Ps)
              - rho2_p(bh_small, r - h / 2, th, tau, xi, Th, Ph, Ps)) / h
        lhs = (4 * d2 - d1) / 3.0
        x = r * r
        Delta = (x + a2) * (x + b2) - rs2 * x
        ddr_D_r2 = (2 * r * (x + b2) + (x + a2) * 2 * r
                    - 2 * (x + a2) * (x + b2) / r) / x - 0.0
        ddr_D_r2 = 2 * r * ((x + b2) + (x + a2)) / x \
            - 2 * (x + a2) * (x + b2) / (x * r)
        rhs = -2 * r * R_ab(bh_small, x, tau, Ph, Ps) / Delta**2 + ddr_D_r2 * xi**2
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs), abs(rhs)))
    assert worst < 1e-8


def test_fiber_identity(bh_small, rng):
    """d_xi(rho^2 p) = 2 (Delta/r^2) xi; the symbol is quadratic in xi so the
    centered difference is exact up to rounding."""
    a2, b2 = bh_small.a**2, bh_small.b**2
    for _ in range(100):
        r = rng.uniform(1.15, 2.4)
        th = rng.uniform(0.3, math.pi / 2 - 0.3)
        tau, xi, Th, Ph, Ps = rng.standard_normal(5)
        h = 0.25
        d = (rho2_p(bh_small, r, th, tau, xi + h, Th, Ph, Ps)
             - rho2_p(bh_small, r, th, tau, xi - h, Th, Ph, Ps)) / (2 * h)
        x = r * r
        Delta = (x + a2) * (x + b2) - x
        assert abs(d - 2 * Delta / x * xi) < 1e-12 * max(1.0, abs(d))


def test_trapped_radius_static():
    p0 = BlackHoleParams(1.0, 0.0, 0.0)
    for tau, Ph, Ps in ((-1.0, 0.0, 0.0), (2.0, 0.0, 0.0), (1.0, 0.1, 0.2)):
        assert abs(trapped_radius(p0, tau, Ph, Ps) - math.sqrt(2.0)) < 1e-12


def test_trapped_radius_homogeneity(bh_small):
    r1 = trapped_radius(bh_small, 1.0, 0.1, -0.05)
    r2 = trapped_radius(bh_small, 2.0, 0.2, -0.10)
    assert abs(r1 - r2) < 1e-13


def test_trapped_radius_pinned(bh_small):
    assert abs(trapped_radius(bh_small, 1.0, 0.1, -0.05) - 1.4117712254820005) < 1e-10
    assert abs(trapped_radius(bh_small, 1.0, 0.1, -0.05) - math.sqrt(2.0)) <= 0.15


def test_trapped_radius_vs_sphere(bh_small):
    ts = trapped_sphere(bh_small, 0.1, -0.05)
    r_t = trapped_radius(bh_small, -1.0, 0.1, -0.05)
    assert abs(r_t - math.sqrt(ts.x0)) < 1e-8


def test_root_simplicity(rng):
    for _ in range(100):
        p = BlackHoleParams(1.0, rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1))
        tau = 1.0 if rng.uniform() < 0.5 else -1.0
        Ph, Ps = rng.uniform(-0.2, 0.2, 2)
        r_t = trapped_radius(p, tau, Ph, Ps)
        slope = R_ab_dx(p, r_t**2, tau, Ph, Ps) * 2 * r_t
        assert abs(slope) > 1.0      # grid floor, static value is 8 tau^2


def test_trapped_radius_vec_matches_scalar(bh_small, rng):
    tau = rng.standard_normal(50) + np.sign(rng.standard_normal(50)) * 0.5
    Ph, Ps = 0.2 * rng.standard_normal((2, 50))
    rv, iters = trapped_radius_vec(bh_small, tau, Ph, Ps)
    for i in range(0, 50, 7):
        assert abs(rv[i] - trapped_radius(bh_small, tau[i], Ph[i], Ps[i])) < 1e-11
    assert np.all(iters <= 60)


def test_tau_roots_static(sp):
    p0 = BlackHoleParams(1.0, 0.0, 0.0)
    roots = tau_roots(p0, math.sqrt(2.0), 0.8, 0.0, 1.0, 0.0, 0.0)
    assert abs(roots.tau1 - 0.5) < 1e-14
    assert abs(roots.tau2 + 0.5) < 1e-14
    # p vanishes at both roots
    from mptrap.trapping import rho2_p
    for t in (roots.tau1, roots.tau2):
        assert abs(rho2_p(p0, math.sqrt(2.0), 0.8, t, 0.0, 1.0, 0.0, 0.0)) < 1e-12


def test_tau_roots_ordering_symmetry():
    p0 = BlackHoleParams(1.0, 0.0, 0.0)
    a = tau_roots(p0, 1.4, 0.7, 0.1, 0.3, 0.2, -0.1)
    b = tau_roots(p0, 1.4, 0.7, 0.1, 0.3, -0.2, 0.1)
    assert a.tau1 >= a.tau2
    assert abs(a.tau1 - b.tau1) < 1e-13 and abs(a.tau2 - b.tau2) < 1e-13


def test_tau_roots_pinned():
    p = BlackHoleParams(1.0, 0.05, 0.03)
    roots = tau_roots(p, 1.42, 1.0, 0.1, 0.3, 0.1, -0.05)
    assert abs(roots.tau1 - 0.176162753227254) < 1e-13
    assert abs(roots.tau2 + 0.174445841953409) < 1e-13


def test_tau_roots_vec(bh_small, rng):
    r = rng.uniform(1.15, 1.75, 40)
    th = rng.uniform(0.3, math.pi / 2 - 0.3, 40)
    xi, Th, Ph, Ps = rng.standard_normal((4, 40))
    t1, t2 = tau_roots_vec(bh_small, r, th, xi, Th, Ph, Ps)
    for i in range(0, 40, 5):
        roots = tau_roots(bh_small, r[i], th[i], xi[i], Th[i], Ph[i], Ps[i])
        assert abs(t1[i] - roots.tau1) < 1e-13
        assert abs(t2[i] - roots.tau2) < 1e-13


def test_cutoffs(bh_small):
    # far from the trapped radius at high frequency: saturated
    spec = trapping_cutoffs(bh_small, 3.0, 0.8, 0.0, 1.0, 0.05, -0.02, 100.0)
    assert spec.c1 == 1.0 and spec.c2 == 1.0
    # at the trapped radius: vanishing
    r_t = trapped_radius(bh_small, 1.0, 0.05, -0.02)
    roots = tau_roots(bh_small, r_t, 0.8, 0.0, 1.0, 0.05, -0.02)
    r_t1 = trapped_radius(bh_small, roots.tau1, 0.05, -0.02)
    spec = trapping_cutoffs(bh_small, r_t1, 0.8, 0.0, 1.0, 0.05, -0.02, 100.0)
    assert spec.c1 == 0.0
    # low frequency: zero regardless of position
    spec = trapping_cutoffs(bh_small, 3.0, 0.8, 0.0, 1.0, 0.05, -0.02, 0.5)
    assert spec.c1 == 0.0 and spec.c2 == 0.0
    # chi shape
    assert chi_geq_one(0.5) == 0.0 and chi_geq_one(2.5) == 1.0


def test_cone_constant(bh_small, rng):
    C = measure_cone_constant(bh_small, rng, n_samples=500)
    assert 0.5 < C < 50.0
