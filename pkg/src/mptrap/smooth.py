"""Smooth bump/step primitives with analytic derivatives.

Everything is built from sigma(t) = exp(-1/t) (t > 0), giving C-infinity
transitions with all derivatives vanishing at the junctions.  Derivatives up
to third order are provided analytically; the test suite cross-checks them
against Richardson finite differences.
"""

import numpy as np


def _sigma_derivs(t):
    """sigma = exp(-1/t) on t > 0 (0 on t <= 0) and derivatives to order 3."""
    t = np.asarray(t, dtype=float)
    pos = t > 1e-12
    s = np.zeros_like(t)
    s1 = np.zeros_like(t)
    s2 = np.zeros_like(t)
    s3 = np.zeros_like(t)
    ts = np.where(pos, t, 1.0)
    e = np.where(pos, np.exp(-1.0 / ts), 0.0)
    s = e
    s1 = np.where(pos, e / ts**2, 0.0)
    s2 = np.where(pos, e * (1.0 / ts**4 - 2.0 / ts**3), 0.0)
    s3 = np.where(pos, e * (1.0 / ts**6 - 6.0 / ts**5 + 6.0 / ts**4), 0.0)
    return s, s1, s2, s3


def smoothstep(t, order: int = 0):
    """Symmetric C-infinity step S(t): 0 for t <= 0, 1 for t >= 1.

    S = sigma(t) / (sigma(t) + sigma(1-t)); satisfies S(t) + S(1-t) = 1, so
    its integral over [0,1] is exactly 1/2.  order in {0,1,2,3} selects the
    derivative.
    """
    t = np.asarray(t, dtype=float)
    u, u1, u2, u3 = _sigma_derivs(t)
    w, w1_, w2_, w3_ = _sigma_derivs(1.0 - t)
    w1, w2, w3 = -w1_, w2_, -w3_
    D = u + w
    D1 = u1 + w1
    D2 = u2 + w2
    D3 = u3 + w3
    lo = t <= 1e-12
    hi = t >= 1.0 - 1e-12
    Ds = np.where(D == 0, 1.0, D)
    S = u / Ds
    if order == 0:
        out = S
        out = np.where(lo, 0.0, out)
        out = np.where(hi, 1.0, out)
        return out if out.shape else float(out)
    S1 = u1 / Ds - u * D1 / Ds**2
    if order == 1:
        out = np.where(lo | hi, 0.0, S1)
        return out if out.shape else float(out)
    S2 = u2 / Ds - 2 * u1 * D1 / Ds**2 - u * D2 / Ds**2 + 2 * u * D1**2 / Ds**3
    if order == 2:
        out = np.where(lo | hi, 0.0, S2)
        return out if out.shape else float(out)
    S3 = (u3 / Ds - 3 * u2 * D1 / Ds**2 - 3 * u1 * D2 / Ds**2
          + 6 * u1 * D1**2 / Ds**3 - u * D3 / Ds**2
          + 6 * u * D1 * D2 / Ds**3 - 6 * u * D1**3 / Ds**4)
    if order == 3:
        out = np.where(lo | hi, 0.0, S3)
        return out if out.shape else float(out)
    raise ValueError("order must be 0..3")


def ramp(r, r0, w, amplitude=1.0, order: int = 0):
    """amplitude * S((r - r0)/w) and derivatives in r."""
    return amplitude * smoothstep((np.asarray(r, dtype=float) - r0) / w, order) / w**order


def plateau_bump(r, left0, left1, right0, right1, order: int = 0):
    """C-infinity bump: 0 below left0, 1 on [left1, right0], 0 above right1."""
    r = np.asarray(r, dtype=float)
    up = smoothstep((r - left0) / (left1 - left0), order) / (left1 - left0) ** order
    dn = smoothstep((right1 - r) / (right1 - right0), order) / (right1 - right0) ** order
    if order == 0:
        return up * dn
    # supports are disjoint for the profiles used here (left1 < right0), so
    # derivative cross terms vanish
    sgn = (-1.0) ** order
    return up * smoothstep((right1 - r) / (right1 - right0), 0) \
        + smoothstep((r - left0) / (left1 - left0), 0) * sgn * dn


_GL_CACHE = {}


def gauss_legendre(n: int):
    if n not in _GL_CACHE:
        xn, wn = np.polynomial.legendre.leggauss(n)
        _GL_CACHE[n] = (xn, wn)
    return _GL_CACHE[n]


def integrate_gl(f, lo, hi, n: int = 60):
    """Fixed-order Gauss-Legendre integral of a vectorized callable."""
    xn, wn = gauss_legendre(n)
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    return half * np.sum(wn * f(mid + half * xn))


def smoothstep_integral(t):
    """Integral of S from 0 to t; equals t - 1/2 for t >= 1 (S symmetric)."""
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    tv = np.atleast_1d(t).astype(float)
    out = np.where(tv >= 1.0, tv - 0.5, 0.0)
    mask = (tv > 0.0) & (tv < 1.0)
    if np.any(mask):
        tm = tv[mask]
        xn, wn = gauss_legendre(64)
        nodes = 0.5 * tm[:, None] * (xn[None, :] + 1.0)
        out[mask] = 0.5 * tm * np.sum(wn[None, :] * smoothstep(nodes), axis=1)
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# saturation function rho: identity above -1, constant -2 below -3, smooth and
# increasing in between.  rho' = S((R+3)/2), which integrates to exactly 1
# over the transition by the symmetry of S.
# ---------------------------------------------------------------------------

def rho_saturate(R, order: int = 0):
    R = np.asarray(R, dtype=float)
    t = (R + 3.0) / 2.0
    if order == 0:
        scalar = R.ndim == 0
        Rv = np.atleast_1d(R)
        out = np.where(Rv >= -1.0, Rv, -2.0)
        mask = (Rv > -3.0) & (Rv < -1.0)
        if np.any(mask):
            tm = (Rv[mask] + 3.0) / 2.0
            out[mask] = -2.0 + 2.0 * np.atleast_1d(smoothstep_integral(tm))
        return float(out[0]) if scalar else out
    if order == 1:
        return np.where(R >= -1.0, 1.0, smoothstep(t, 0))
    if order == 2:
        return np.where(R >= -1.0, 0.0, smoothstep(t, 1) / 2.0)
    if order == 3:
        return np.where(R >= -1.0, 0.0, smoothstep(t, 2) / 4.0)
    raise ValueError("order must be 0..3")


# ---------------------------------------------------------------------------
# standard mollifier, unit mass on (-1, 1)
# ---------------------------------------------------------------------------

_PSI_NORM = None


def _psi_norm():
    global _PSI_NORM
    if _PSI_NORM is None:
        _PSI_NORM = integrate_gl(lambda u: np.exp(-1.0 / (1.0 - u**2)), -1.0, 1.0, n=120)
    return _PSI_NORM


def mollifier(u):
    """Unit-mass bump on (-1, 1)."""
    u = np.asarray(u, dtype=float)
    inside = np.abs(u) < 1.0 - 1e-14
    us = np.where(inside, u, 0.0)
    return np.where(inside, np.exp(-1.0 / (1.0 - us**2)), 0.0) / _psi_norm()


def mollify(f, y, N: float, n_nodes: int = 80, kinks=()):
    """(psi_N * f)(y) = int psi(u) f(y - u/N) du  for vectorized f.

    Points whose sampling interval contains a kink of f get per-point
    Gauss-Legendre panels split at the kink images; all other points are
    handled in one vectorized single-panel pass (the integrand is smooth
    there).
    """
    y = np.asarray(y, dtype=float)
    scalar = y.ndim == 0
    y = np.atleast_1d(y).astype(float)
    out = np.zeros_like(y)
    xn, wn = gauss_legendre(n_nodes)
    psi_w = mollifier(xn) * wn
    near_kink = np.zeros(y.shape, dtype=bool)
    for k in kinks:
        near_kink |= np.abs(y - k) < 1.05 / N
    bulk = ~near_kink
    if np.any(bulk):
        yy = y[bulk]
        args = yy[:, None] - xn[None, :] / N
        out[bulk] = f(args) @ psi_w
    for i in np.nonzero(near_kink)[0]:
        yi = y[i]
        cuts = [-1.0, 1.0]
        for k in kinks:
            u_k = N * (yi - k)
            if -1.0 < u_k < 1.0:
                cuts.append(u_k)
        cuts = sorted(cuts)
        total = 0.0
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            mid = 0.5 * (lo + hi)
            half = 0.5 * (hi - lo)
            uu = mid + half * xn
            total += half * np.sum(wn * mollifier(uu) * f(yi - uu / N))
        out[i] = total
    return float(out[0]) if scalar else out
