"""Symbol-level trapping machinery for the rotating five-dimensional hole.

The radial-trapping polynomial R(x, tau, Phi, Psi) is the x-derivative of the
radial part of the separated Hamiltonian: writing rho^2 p = U(x) +
(Delta/r^2) xi^2 + T(theta) with U rational, R = -Delta^2 dU/dx.  Since
U = N(x)/Delta with N cubic, R = N Delta' - N' Delta is an exact quartic in
x; its coefficients in the quadratic fiber monomials are

    tau^2   : (x+a^2)^2 (x+b^2)^2 - 2 r_s^2 x (x+a^2)(x+b^2) + a^2 b^2 r_s^4
    tau*Phi : 2 a r_s^2 [ (x+b^2)^2 - b^2 r_s^2 ]
    tau*Psi : 2 b r_s^2 [ (x+a^2)^2 - a^2 r_s^2 ]
    Phi^2   : b^2 (x+b^2-r_s^2)^2 - a^2 (x+b^2)^2
    Psi^2   : a^2 (x+a^2-r_s^2)^2 - b^2 (x+a^2)^2
    Phi*Psi : -2 a b r_s^2 (2x + a^2 + b^2 - r_s^2)

At a = b = 0 this reduces to tau^2 x^3 (x - 2 r_s^2) whose positive root is
the photon sphere x = 2 r_s^2.  The finite-difference oracle below
reconstructs R independently from the assembled Hamiltonian.
"""

from dataclasses import dataclass
import math

import numpy as np

from .params import BlackHoleParams, NoRoot, ComplexRoots, OracleFailure
from .geometry import inverse_metric_components

TAU_WINDOW = (1.1, 1.8)     # r/r_s window for the frequency factorization
SOS_WINDOW = (1.2, 1.7)     # r/r_s window for the sum-of-squares checks


def R_ab(params: BlackHoleParams, x, tau, Phi, Psi):
    """Exact quartic trapping polynomial (vectorized in any argument)."""
    a, b = params.a, params.b
    rs2 = params.r_s**2
    a2, b2 = a * a, b * b
    xa = x + a2
    xb = x + b2
    ct = xa * xa * xb * xb - 2 * rs2 * x * xa * xb + a2 * b2 * rs2 * rs2
    ctp = 2 * a * rs2 * (xb * xb - b2 * rs2)
    cts = 2 * b * rs2 * (xa * xa - a2 * rs2)
    cpp = b2 * (xb - rs2) ** 2 - a2 * xb * xb
    css = a2 * (xa - rs2) ** 2 - b2 * xa * xa
    cps = -2 * a * b * rs2 * (2 * x + a2 + b2 - rs2)
    return (ct * tau**2 + ctp * tau * Phi + cts * tau * Psi
            + cpp * Phi**2 + css * Psi**2 + cps * Phi * Psi)


def R_ab_dx(params: BlackHoleParams, x, tau, Phi, Psi):
    """d/dx of the trapping polynomial."""
    a, b = params.a, params.b
    rs2 = params.r_s**2
    a2, b2 = a * a, b * b
    xa = x + a2
    xb = x + b2
    dct = 2 * xa * xb * (xa + xb) - 2 * rs2 * (xa * xb + x * (xa + xb))
    dctp = 2 * a * rs2 * 2 * xb
    dcts = 2 * b * rs2 * 2 * xa
    dcpp = 2 * b2 * (xb - rs2) - 2 * a2 * xb
    dcss = 2 * a2 * (xa - rs2) - 2 * b2 * xa
    dcps = -4 * a * b * rs2
    return (dct * tau**2 + dctp * tau * Phi + dcts * tau * Psi
            + dcpp * Phi**2 + dcss * Psi**2 + dcps * Phi * Psi)


def rho2_p(params: BlackHoleParams, r, theta, tau, xi, Theta, Phi, Psi):
    """rho^2 * p with the r-dual fiber variable xi = 2 r Xi (vectorizable)."""
    x = r * r
    Xi = xi / (2.0 * r)
    gtt, gtph, gtps, gphph, gpsps, gphps, gxx, gthth = \
        inverse_metric_components(params, x, theta)
    a2, b2 = params.a**2, params.b**2
    rho2 = x + a2 * np.cos(theta) ** 2 + b2 * np.sin(theta) ** 2
    p = (gtt * tau**2 + 2 * gtph * tau * Phi + 2 * gtps * tau * Psi
         + gphph * Phi**2 + gpsps * Psi**2 + 2 * gphps * Phi * Psi
         + gxx * Xi**2 + gthth * Theta**2)
    return rho2 * p


def R_ab_oracle(params: BlackHoleParams, x, tau, Phi, Psi, theta: float = 0.7,
                rel_step: float = 1e-4):
    """Independent reconstruction -Delta^2/(2r) d_r(rho^2 p)|_{xi=0, Theta=0}.

    Richardson-extrapolated central differences of the assembled symbol; the
    value is theta-independent because the theta-content of rho^2 p separates
    from the radial part.
    """
    r = math.sqrt(x)
    h = rel_step * max(r, params.r_s)
    if r - 2 * h <= 0:
        raise OracleFailure("finite-difference stencil leaves r > 0")

    def f(rr):
        return rho2_p(params, rr, theta, tau, 0.0, 0.0, Phi, Psi)

    d_h = (f(r + h) - f(r - h)) / (2 * h)
    d_h2 = (f(r + h / 2) - f(r - h / 2)) / h
    deriv = (4 * d_h2 - d_h) / 3.0
    a2, b2, rs2 = params.a**2, params.b**2, params.r_s**2
    Delta = (x + a2) * (x + b2) - rs2 * x
    if Delta == 0:
        raise OracleFailure("Delta = 0 at the requested point")
    return -Delta**2 / (2.0 * r) * deriv


def trapped_radius(params: BlackHoleParams, tau, Phi, Psi,
                   eps0: float = 0.3, tol: float = 1e-13) -> float:
    """Root r of R(r^2, tau, Phi, Psi) near the static photon sphere.

    Newton seeded at sqrt(2) r_s; zero-homogeneous in (tau, Phi, Psi).
    """
    params.require_small_spin(eps0)
    if tau == 0:
        raise NoRoot("tau = 0 outside the admissible cone")
    s = 1.0 / abs(tau)
    tau, Phi, Psi = tau * s, Phi * s, Psi * s  # exact 0-homogeneity
    r = math.sqrt(2.0) * params.r_s
    for it in range(60):
        g = R_ab(params, r * r, tau, Phi, Psi)
        dg = R_ab_dx(params, r * r, tau, Phi, Psi) * 2.0 * r
        if dg == 0:
            raise NoRoot("stationary Newton iteration")
        step = g / dg
        r -= step
        if not (0.5 * params.r_s < r < 3.0 * params.r_s):
            raise NoRoot(f"iterate left the trapping window: r = {r}")
        if abs(step) < tol * params.r_s:
            return r
    raise NoRoot("Newton did not converge in 60 iterations")


def trapped_radius_vec(params: BlackHoleParams, tau, Phi, Psi,
                       tol: float = 1e-13, max_iter: int = 60):
    """Vectorized Newton for the trapped radius; NaN where not converged."""
    tau = np.asarray(tau, dtype=float)
    Phi = np.asarray(Phi, dtype=float)
    Psi = np.asarray(Psi, dtype=float)
    s = 1.0 / np.abs(tau)
    t, P1, P2 = tau * s, Phi * s, Psi * s
    r = np.full(np.broadcast(t, P1, P2).shape, math.sqrt(2.0) * params.r_s)
    active = np.ones(r.shape, dtype=bool)
    iters = np.zeros(r.shape, dtype=int)
    for _ in range(max_iter):
        if not np.any(active):
            break
        x = r[active] ** 2
        g = R_ab(params, x, t[active] if t.shape else t,
                 P1[active] if P1.shape else P1,
                 P2[active] if P2.shape else P2)
        dg = R_ab_dx(params, x, t[active] if t.shape else t,
                     P1[active] if P1.shape else P1,
                     P2[active] if P2.shape else P2) * 2.0 * r[active]
        step = g / dg
        r[active] -= step
        iters[active] += 1
        done = np.abs(step) < tol * params.r_s
        idx = np.nonzero(active)[0]
        active[idx[done]] = False
    bad = active | (r < 0.5 * params.r_s) | (r > 3.0 * params.r_s)
    r = np.where(bad, np.nan, r)
    return r, iters


@dataclass(frozen=True)
class TauRoots:
    tau1: float
    tau2: float


def tau_root_coefficients(params: BlackHoleParams, r, theta, xi, Theta, Phi, Psi):
    """(a2, b1, c0) with p = a2 tau^2 + 2 b1 tau + c0."""
    x = r * r
    Xi = xi / (2.0 * r)
    gtt, gtph, gtps, gphph, gpsps, gphps, gxx, gthth = \
        inverse_metric_components(params, x, theta)
    a2 = gtt
    b1 = gtph * Phi + gtps * Psi
    c0 = (gphph * Phi**2 + gpsps * Psi**2 + 2 * gphps * Phi * Psi
          + gxx * Xi**2 + gthth * Theta**2)
    return a2, b1, c0


def tau_roots_vec(params: BlackHoleParams, r, theta, xi, Theta, Phi, Psi):
    """Vectorized frequency roots (tau1 >= tau2); NaN where complex."""
    A, B, C = tau_root_coefficients(params, np.asarray(r, dtype=float),
                                    np.asarray(theta, dtype=float),
                                    np.asarray(xi, dtype=float),
                                    np.asarray(Theta, dtype=float),
                                    np.asarray(Phi, dtype=float),
                                    np.asarray(Psi, dtype=float))
    disc = B * B - A * C
    ok = disc >= 0
    sq = np.sqrt(np.where(ok, disc, 0.0))
    t_a = np.where(B >= 0, (-B - sq) / A, (-B + sq) / A)
    with np.errstate(divide="ignore", invalid="ignore"):
        t_b = np.where(t_a != 0, C / (A * t_a), -2 * B / A - t_a)
    t1 = np.maximum(t_a, t_b)
    t2 = np.minimum(t_a, t_b)
    t1 = np.where(ok, t1, np.nan)
    t2 = np.where(ok, t2, np.nan)
    return t1, t2


def tau_roots(params: BlackHoleParams, r, theta, xi, Theta, Phi, Psi) -> TauRoots:
    """Real roots of p = 0 as a quadratic in the temporal frequency.

    Ordering tau1 >= tau2.  With g^{tt} < 0 and a nonnegative spatial part
    the discriminant is automatically nonnegative; a negative value flags
    exit from the verification region.
    """
    A, B, C = tau_root_coefficients(params, r, theta, xi, Theta, Phi, Psi)
    disc = B * B - A * C
    if disc < 0:
        raise ComplexRoots(f"negative discriminant {disc} at r = {r}")
    sq = math.sqrt(disc)
    # stable quadratic roots for A != 0
    if B >= 0:
        t_a = (-B - sq) / A
    else:
        t_a = (-B + sq) / A
    t_b = C / (A * t_a) if t_a != 0 else (-2 * B / A - t_a)
    t1, t2 = max(t_a, t_b), min(t_a, t_b)
    return TauRoots(tau1=t1, tau2=t2)


@dataclass(frozen=True)
class CutoffSpec:
    c1: float
    c2: float
    freq_scale: float


def chi_geq_one(s):
    """Smooth symbol: 0 for s <= 1, 1 for s >= 2."""
    from .smooth import smoothstep
    return smoothstep(np.asarray(s, dtype=float) - 1.0)


def trapping_cutoffs(params: BlackHoleParams, r, theta, xi, Theta, Phi, Psi,
                     freq_scale: float) -> CutoffSpec:
    """Classical-symbol cutoffs c_i built on the frequency-dependent trapped radius.

    c_i = chi_{>=1}(freq_scale * |r - r_trap(tau_i, Phi, Psi)|): saturates to 1
    away from the trapped radius at high frequency and vanishes identically in
    the low-frequency regime where no degeneracy is needed.
    """
    roots = tau_roots(params, r, theta, xi, Theta, Phi, Psi)
    vals = []
    for taui in (roots.tau1, roots.tau2):
        if taui == 0:
            vals.append(0.0)
            continue
        try:
            r_t = trapped_radius(params, taui, Phi, Psi)
        except NoRoot:
            vals.append(float(chi_geq_one(freq_scale * 10.0)))
            continue
        vals.append(float(chi_geq_one(freq_scale * abs(r - r_t))))
    return CutoffSpec(c1=vals[0], c2=vals[1], freq_scale=freq_scale)


def measure_cone_constant(params: BlackHoleParams, rng, n_samples: int = 4000,
                          window=TAU_WINDOW) -> float:
    """Measured C with |Phi|, |Psi| <= C |tau_i| over on-shell window samples."""
    rs = params.r_s
    worst = 0.0
    for _ in range(n_samples):
        r = rng.uniform(window[0] * rs, window[1] * rs)
        theta = rng.uniform(0.3, math.pi / 2 - 0.3)
        xi, Theta, Phi, Psi = rng.standard_normal(4)
        try:
            roots = tau_roots(params, r, theta, xi, Theta, Phi, Psi)
        except ComplexRoots:
            continue
        for taui in (roots.tau1, roots.tau2):
            if abs(taui) > 1e-12:
                worst = max(worst, abs(Phi) / abs(taui), abs(Psi) / abs(taui))
    return worst
