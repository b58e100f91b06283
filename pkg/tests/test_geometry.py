import math

import numpy as np
import pytest

from mptrap.params import BlackHoleParams, SchwParams, NakedSingularity, horizons
from mptrap.geometry import (ChartPoint, metric_pair, covariant_metric,
                             contravariant_metric, inverse_metric_components,
                             inverse_metric_x_derivatives,
                             inverse_metric_theta_derivatives,
                             CoordinateSingularity)
from mptrap.chart import ingoing_chart, tortoise


def test_horizons_static():
    hz = horizons(BlackHoleParams(1.0, 0.0, 0.0))
    assert hz.x_minus == 0.0
    assert abs(hz.x_plus - 1.0) < 1e-15
    assert abs(hz.r_ps - math.sqrt(2.0)) < 1e-15


def test_horizons_single_spin():
    hz = horizons(BlackHoleParams(1.0, 0.3, 0.0))
    assert abs(hz.x_plus - 0.91) < 1e-14
    assert abs(hz.x_minus) < 1e-14


def test_horizons_pinned_double_spin():
    # independent root-finder value, pinned to 12 digits before the build
    hz = horizons(BlackHoleParams(1.0, 0.3, 0.2))
    assert abs(hz.x_minus - 0.004157801509648) < 1e-12
    assert abs(hz.x_plus - 0.865842198490352) < 1e-12
    d = (hz.x_plus + 0.3**2) * (hz.x_plus + 0.2**2) - hz.x_plus
    assert abs(d) < 1e-14


def test_naked_singularity_raises():
    with pytest.raises(NakedSingularity):
        BlackHoleParams(1.0, 0.9, 0.9)


def test_tangherlini_limit_components():
    p = BlackHoleParams(1.0, 0.0, 0.0)
    pt = ChartPoint(t=0.0, x=4.0, theta=math.pi / 4)
    _, gi, _ = metric_pair(p, pt)
    assert abs(gi[0, 0] + 4.0 / 3.0) < 1e-13
    assert abs(gi[1, 1] - 12.0) < 1e-13
    # mixed components vanish identically
    assert gi[0, 3] == 0.0 and gi[0, 4] == 0.0 and gi[3, 4] == 0.0


PINNED_CONTRAVARIANT = {
    # (r_s=1, a=0.3, b=0.2, x=2, theta=pi/3), from 40-digit matrix inversion
    (0, 0): -1.917684935490210,
    (0, 3): 0.131725110357446,
    (0, 4): 0.089969111322570,
    (3, 3): 0.619050622117751,
    (4, 4): 1.951963812615434,
    (3, 4): -0.012914226505632,
    (1, 1): 4.411400730816078,
    (2, 2): 0.487210718635810,
}


def test_pinned_contravariant_sample():
    p = BlackHoleParams(1.0, 0.3, 0.2)
    pt = ChartPoint(t=0.0, x=2.0, theta=math.pi / 3)
    g, gi, _ = metric_pair(p, pt)
    for (i, j), val in PINNED_CONTRAVARIANT.items():
        assert abs(gi[i, j] - val) < 1e-13
    # cross-check against direct numerical inversion of the covariant array
    gi_num = np.linalg.inv(g)
    assert np.abs(gi - gi_num).max() < 1e-12


def test_inversion_identity_random(rng):
    for _ in range(300):
        a = rng.uniform(-0.3, 0.3)
        b = rng.uniform(-0.3, 0.3)
        try:
            p = BlackHoleParams(1.0, a, b)
        except NakedSingularity:
            continue
        hz = horizons(p)
        x = rng.uniform(hz.x_plus * 1.05 + 0.05, 50.0)
        th = rng.uniform(0.1, math.pi / 2 - 0.1)
        g, gi, _ = metric_pair(p, ChartPoint(0.0, x, th))
        assert np.abs(g @ gi - np.eye(5)).max() < 1e-12


def test_analytic_derivatives_vs_fd():
    p = BlackHoleParams(1.0, 0.23, 0.11)
    for x0, th0 in ((2.37, 0.9), (1.4, 0.5), (7.0, 1.3)):
        h = 1e-6
        ax = inverse_metric_x_derivatives(p, x0, th0)
        fdx = [(c1 - c2) / (2 * h) for c1, c2 in
               zip(inverse_metric_components(p, x0 + h, th0),
                   inverse_metric_components(p, x0 - h, th0))]
        for a_, f_ in zip(ax, fdx):
            assert abs(a_ - f_) <= 1e-8 * max(1.0, abs(f_))
        at = inverse_metric_theta_derivatives(p, x0, th0)
        fdt = [(c1 - c2) / (2 * h) for c1, c2 in
               zip(inverse_metric_components(p, x0, th0 + h),
                   inverse_metric_components(p, x0, th0 - h))]
        for a_, f_ in zip(at, fdt):
            assert abs(a_ - f_) <= 1e-8 * max(1.0, abs(f_))


def test_static_reduction_closed_forms(rng):
    p0 = BlackHoleParams(1.0, 0.0, 0.0)
    for _ in range(50):
        x = rng.uniform(1.2, 80.0)
        th = rng.uniform(0.1, math.pi / 2 - 0.1)
        gi = contravariant_metric(p0, ChartPoint(0.0, x, th))
        assert abs(gi[0, 0] + 1.0 / (1.0 - 1.0 / x)) < 1e-13
        assert abs(gi[1, 1] - 4.0 * (x - 1.0)) < 1e-12


def test_spin_continuity_envelope():
    # contravariant components approach the static values with the linear
    # spin envelope c * max(|a|,|b|) / r^2 at fixed (x, theta); the constant
    # was measured at build over the sample set below.  The range starts
    # above the static horizon because the stationary-chart components
    # degenerate there (the regular-chart perturbation bound does not apply
    # to these components at the horizon).
    p0 = BlackHoleParams(1.0, 0.0, 0.0)
    c_pinned = 100.0   # measured 88.5 over this sample set
    for (a, b) in ((0.05, 0.03), (0.1, 0.1), (0.3, 0.2)):
        p = BlackHoleParams(1.0, a, b)
        eps0 = max(abs(a), abs(b))
        for x in np.geomspace(1.1, 100.0, 40):
            th = 0.8
            d = np.abs(contravariant_metric(p, ChartPoint(0.0, x, th))
                       - contravariant_metric(p0, ChartPoint(0.0, x, th)))
            assert d.max() * x <= c_pinned * eps0


def test_degeneracies_rejected():
    p = BlackHoleParams(1.0, 0.2, 0.1)
    with pytest.raises(CoordinateSingularity):
        metric_pair(p, ChartPoint(0.0, 2.0, 1e-10))
    with pytest.raises(CoordinateSingularity):
        metric_pair(p, ChartPoint(0.0, 0.5, 0.7))   # inside the horizon


# ---------------------------------------------------------------------------
# ingoing chart
# ---------------------------------------------------------------------------

def test_tortoise_anchor_and_pinned_value(sp):
    assert tortoise(sp, sp.r_ps) == 0.0
    # closed-form antiderivative r + (1/2) ln((r-1)/(r+1)), anchored at r_ps
    assert abs(tortoise(sp, 2.0) - 0.917853880312393) < 1e-14


def test_tortoise_quadrature_matches_closed_form():
    sp2 = SchwParams(1.0, 2)
    # generic-d quadrature path vs an independent dense Romberg-style sum
    import scipy.integrate as si
    val, _ = si.quad(lambda s: 1.0 / (1.0 - s**-3), sp2.r_ps, 2.5, epsrel=1e-12)
    assert abs(tortoise(sp2, 2.5) - val) < 1e-10


def test_chart_far_block(sp, chart):
    # beyond the matching radius mu = r_star, so the chart coincides with the
    # static one: block diag(-A, 1/A); equivalently the (v, r) block with
    # v = vtilde + mu is exactly [[-A, 1], [1, 0]]
    r = np.array([1.6, 2.0, 10.0])
    g_vv, g_vr, g_rr = chart.block(r)
    A = sp.A(r)
    assert np.abs(g_vv + A).max() < 1e-14
    assert np.abs(g_vr).max() < 1e-12
    assert np.abs(g_rr - 1.0 / A).max() < 1e-12
    M = chart.mu_prime(r)
    v_block = (-A, 1.0 - A * M + A * M, 0.0)   # (v, r)-chart components
    assert np.abs(v_block[1] - 1.0).max() < 1e-14


def test_chart_invariants(sp, chart):
    r = np.linspace(chart.r_e, 50.0, 3000)
    M = chart.mu_prime(r)
    A = chart.A(r)
    assert np.all(M > 0)
    assert np.all(2.0 - A * M > 0)
    _, _, g_rr = chart.block(r)
    assert np.all(g_rr > 0)
    # block determinant is exactly -1
    g_vv, g_vr, _ = chart.block(r)
    det = g_vv * g_rr - g_vr**2
    assert np.abs(det + 1.0).max() < 1e-12
    # inverse consistency
    gi_vv, gi_vr, gi_rr = chart.block_inverse(r)
    assert np.abs(g_vv * gi_vv + g_vr * gi_vr - 1.0).max() < 1e-12
    assert np.abs(g_vr * gi_vv + g_rr * gi_vr).max() < 1e-12


def test_mu_dominates_tortoise(sp, chart):
    r = np.linspace(1.001, 30.0, 500)
    gap = chart.mu(r) - tortoise(sp, r)
    assert np.min(gap) > -1e-10
    far = r > chart.r_match
    assert np.abs(gap[far]).max() < 1e-10


def test_chart_c1_across_match(sp, chart):
    rm = chart.r_match
    h = 1e-6
    # jumps across the matching radius are bounded by slope * (2h): smooth
    assert abs(chart.mu_prime(rm + h) - chart.mu_prime(rm - h)) < 1e-4
    assert abs(chart.mu_pp(rm + h) - chart.mu_pp(rm - h)) < 1e-3


def test_chart_csv_export(tmp_path, chart):
    path = tmp_path / "chart.csv"
    chart.export_csv(path, n_grid=32)
    head = path.read_text().splitlines()[0]
    assert head == "r,r_star,mu,mu_prime,g_vv,g_vr,g_rr"


def test_horizon_roots_and_positivity(rng):
    for _ in range(40):
        try:
            p = BlackHoleParams(1.0, rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4))
        except NakedSingularity:
            continue
        hz = horizons(p)
        a2, b2 = p.a**2, p.b**2
        for xr in (hz.x_minus, hz.x_plus):
            assert abs((xr + a2) * (xr + b2) - xr) < 1e-14
        x = np.linspace(hz.x_plus * (1 + 1e-9) + 1e-12, 100.0, 500)
        delta = (x + a2) * (x + b2) - x
        assert np.all(delta > 0)
