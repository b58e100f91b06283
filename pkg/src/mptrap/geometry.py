"""Exact metric evaluation for the (1+4)-dimensional rotating black hole.

Coordinates (t, x, theta, phi, psi) with x = r^2.  The covariant matrix is
assembled by expanding the line element; the contravariant one uses the
closed-form inverse components.  Both carry the mostly-plus signature.
"""

from dataclasses import dataclass
import math

import numpy as np

from .params import BlackHoleParams, CoordinateSingularity, horizons

POLE_TOL = 1e-8


@dataclass(frozen=True)
class ChartPoint:
    t: float
    x: float
    theta: float
    phi: float = 0.0
    psi: float = 0.0

    @property
    def r(self) -> float:
        return math.sqrt(self.x)


@dataclass(frozen=True)
class GeometryCache:
    Delta: float
    rho2: float
    sqrt_det: float


def geometry_scalars(params: BlackHoleParams, x: float, theta: float) -> GeometryCache:
    a2, b2, rs2 = params.a**2, params.b**2, params.r_s**2
    s2 = math.sin(theta) ** 2
    c2 = math.cos(theta) ** 2
    Delta = (x + a2) * (x + b2) - rs2 * x
    rho2 = x + a2 * c2 + b2 * s2
    sqrt_det = 0.5 * math.sin(theta) * math.cos(theta) * rho2
    return GeometryCache(Delta=Delta, rho2=rho2, sqrt_det=sqrt_det)


def _check_point(params: BlackHoleParams, point: ChartPoint):
    if point.x <= 0:
        raise CoordinateSingularity(f"x = {point.x} <= 0")
    st, ct = math.sin(point.theta), math.cos(point.theta)
    if abs(st) < POLE_TOL or abs(ct) < POLE_TOL:
        raise CoordinateSingularity(f"theta = {point.theta} within {POLE_TOL} of a pole")
    hz = horizons(params)
    if point.x <= hz.x_plus:
        raise CoordinateSingularity(f"x = {point.x} not outside the horizon x_+ = {hz.x_plus}")


def covariant_metric(params: BlackHoleParams, point: ChartPoint) -> np.ndarray:
    """5x5 covariant metric in (t, x, theta, phi, psi), from the line element."""
    a, b, rs2 = params.a, params.b, params.r_s**2
    x, th = point.x, point.theta
    s2 = math.sin(th) ** 2
    c2 = math.cos(th) ** 2
    cache = geometry_scalars(params, x, th)
    k = rs2 / cache.rho2
    # null 1-form weights of (dt, dphi, dpsi) in the squared term
    w_t, w_ph, w_ps = 1.0, a * s2, b * c2
    g = np.zeros((5, 5))
    g[0, 0] = -1.0 + k * w_t * w_t
    g[0, 3] = g[3, 0] = k * w_t * w_ph
    g[0, 4] = g[4, 0] = k * w_t * w_ps
    g[3, 3] = (x + a * a) * s2 + k * w_ph * w_ph
    g[4, 4] = (x + b * b) * c2 + k * w_ps * w_ps
    g[3, 4] = g[4, 3] = k * w_ph * w_ps
    g[1, 1] = cache.rho2 / (4.0 * cache.Delta)
    g[2, 2] = cache.rho2
    return g


def contravariant_metric(params: BlackHoleParams, point: ChartPoint) -> np.ndarray:
    """5x5 inverse metric from the closed-form components."""
    a, b, rs2 = params.a, params.b, params.r_s**2
    a2, b2 = a * a, b * b
    x, th = point.x, point.theta
    s2 = math.sin(th) ** 2
    c2 = math.cos(th) ** 2
    cache = geometry_scalars(params, x, th)
    D, rho2 = cache.Delta, cache.rho2
    gi = np.zeros((5, 5))
    gi[0, 0] = ((a2 - b2) * s2 - (x + a2) * (D + rs2 * (x + b2)) / D) / rho2
    gi[0, 3] = gi[3, 0] = a * rs2 * (x + b2) / (rho2 * D)
    gi[0, 4] = gi[4, 0] = b * rs2 * (x + a2) / (rho2 * D)
    gi[3, 3] = (1.0 / s2 - ((a2 - b2) * (x + b2) + b2 * rs2) / D) / rho2
    gi[4, 4] = (1.0 / c2 + ((a2 - b2) * (x + a2) - a2 * rs2) / D) / rho2
    gi[3, 4] = gi[4, 3] = -a * b * rs2 / (rho2 * D)
    gi[1, 1] = 4.0 * D / rho2
    gi[2, 2] = 1.0 / rho2
    return gi


def metric_pair(params: BlackHoleParams, point: ChartPoint):
    """(covariant, contravariant, cache); raises CoordinateSingularity off-domain."""
    _check_point(params, point)
    cache = geometry_scalars(params, point.x, point.theta)
    if cache.Delta <= 0:
        raise CoordinateSingularity(f"Delta = {cache.Delta} <= 0 at x = {point.x}")
    return covariant_metric(params, point), contravariant_metric(params, point), cache


# ---------------------------------------------------------------------------
# analytic partial derivatives of the contravariant components, needed by the
# geodesic flow.  Each g^{ab} = P(x, theta)/(rho2 * Delta)-type rational; the
# derivatives below were obtained by straightforward differentiation and are
# cross-checked against central finite differences in the test suite.
# ---------------------------------------------------------------------------

def inverse_metric_components(params: BlackHoleParams, x: float, theta: float):
    """Tuple (gtt, gtph, gtps, gphph, gpsps, gphps, gxx, gthth)."""
    a, b, rs2 = params.a, params.b, params.r_s**2
    a2, b2 = a * a, b * b
    s2 = np.sin(theta) ** 2
    c2 = np.cos(theta) ** 2
    D = (x + a2) * (x + b2) - rs2 * x
    rho2 = x + a2 * c2 + b2 * s2
    gtt = ((a2 - b2) * s2 - (x + a2) * (D + rs2 * (x + b2)) / D) / rho2
    gtph = a * rs2 * (x + b2) / (rho2 * D)
    gtps = b * rs2 * (x + a2) / (rho2 * D)
    gphph = (1.0 / s2 - ((a2 - b2) * (x + b2) + b2 * rs2) / D) / rho2
    gpsps = (1.0 / c2 + ((a2 - b2) * (x + a2) - a2 * rs2) / D) / rho2
    gphps = -a * b * rs2 / (rho2 * D)
    gxx = 4.0 * D / rho2
    gthth = 1.0 / rho2
    return gtt, gtph, gtps, gphph, gpsps, gphps, gxx, gthth


def inverse_metric_x_derivatives(params: BlackHoleParams, x: float, theta: float):
    """d/dx of the eight contravariant components, same order as above."""
    a, b, rs2 = params.a, params.b, params.r_s**2
    a2, b2 = a * a, b * b
    s2 = np.sin(theta) ** 2
    c2 = np.cos(theta) ** 2
    D = (x + a2) * (x + b2) - rs2 * x
    D1 = 2 * x + a2 + b2 - rs2
    rho2 = x + a2 * c2 + b2 * s2
    # helper: d/dx [ N / (rho2 * D) ] = (N' - N*(D'/D + 1/rho2)) / (rho2*D)
    def dfrac(N, N1):
        return (N1 - N * (D1 / D + 1.0 / rho2)) / (rho2 * D)

    # gtt = (a2-b2) s2 / rho2 - (x+a2)(D + rs2(x+b2)) / (rho2 D)
    N_tt = (x + a2) * (D + rs2 * (x + b2))
    N1_tt = (D + rs2 * (x + b2)) + (x + a2) * (D1 + rs2)
    dgtt = -(a2 - b2) * s2 / rho2**2 - dfrac(N_tt, N1_tt)
    dgtph = dfrac(a * rs2 * (x + b2), a * rs2)
    dgtps = dfrac(b * rs2 * (x + a2), b * rs2)
    # gphph = 1/(s2 rho2) - ((a2-b2)(x+b2) + b2 rs2)/(rho2 D)
    dgphph = -1.0 / (s2 * rho2**2) - dfrac((a2 - b2) * (x + b2) + b2 * rs2, (a2 - b2))
    dgpsps = -1.0 / (c2 * rho2**2) + dfrac((a2 - b2) * (x + a2) - a2 * rs2, (a2 - b2))
    dgphps = -dfrac(-a * b * rs2, 0.0) * (-1.0)
    # direct: gphps = -ab rs2/(rho2 D): d/dx = +ab rs2 (D'/D + 1/rho2)/(rho2 D)
    dgphps = a * b * rs2 * (D1 / D + 1.0 / rho2) / (rho2 * D)
    dgxx = 4.0 * (D1 - D / rho2) / rho2
    dgthth = -1.0 / rho2**2
    return dgtt, dgtph, dgtps, dgphph, dgpsps, dgphps, dgxx, dgthth


def inverse_metric_theta_derivatives(params: BlackHoleParams, x: float, theta: float):
    """d/dtheta of the eight contravariant components, same order as above."""
    a, b, rs2 = params.a, params.b, params.r_s**2
    a2, b2 = a * a, b * b
    st, ct = np.sin(theta), np.cos(theta)
    s2, c2 = st * st, ct * ct
    D = (x + a2) * (x + b2) - rs2 * x
    rho2 = x + a2 * c2 + b2 * s2
    drho2 = (b2 - a2) * 2.0 * st * ct  # d rho2 / d theta
    ds2 = 2.0 * st * ct

    dgtt = (a2 - b2) * (ds2 * rho2 - s2 * drho2) / rho2**2 \
        + (x + a2) * (D + rs2 * (x + b2)) / D * drho2 / rho2**2
    dgtph = -a * rs2 * (x + b2) / D * drho2 / rho2**2
    dgtps = -b * rs2 * (x + a2) / D * drho2 / rho2**2
    dgphph = (-ds2 / s2**2 * rho2 - drho2 / s2) / rho2**2 \
        + ((a2 - b2) * (x + b2) + b2 * rs2) / D * drho2 / rho2**2
    dgpsps = (ds2 / c2**2 * rho2 - drho2 / c2) / rho2**2 \
        - ((a2 - b2) * (x + a2) - a2 * rs2) / D * drho2 / rho2**2
    dgphps = a * b * rs2 / D * drho2 / rho2**2
    dgxx = -4.0 * D * drho2 / rho2**2
    dgthth = -drho2 / rho2**2
    return dgtt, dgtph, dgtps, dgphph, dgpsps, dgphps, dgxx, dgthth
