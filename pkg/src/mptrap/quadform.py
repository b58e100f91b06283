"""Exact assembly of the multiplier energy identity in the horizon-penetrating
chart, for the (1+4)-dimensional static black hole.

The interior quadratic form Q[u, X, q, m] and the boundary flux forms were
derived symbolically from first principles (metric -> connection ->
deformation tensor -> divergence identity) in the chart where the
(vtilde, r) block is [[-A, B], [B, D]] with B = 1 - A mu', D = mu'(2 - A mu')
and determinant exactly -1.  The closed-form coefficients are frozen here;
tests/test_quadform_reference.py rebuilds them from scratch with a computer
algebra pass and cross-checks numerically.

Coefficient layout: quadratic forms are reported as symmetric 4x4 matrices
over the vector (d_r u, d_v u, |slash-nabla u|, u).
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy.linalg import eigh

from .params import SchwParams, RedshiftBudgetFailure, LemmaViolation, BoundaryFormFailure
from .chart import IngoingChart
from .multiplier import MultiplierProfile, jet_mul, jet_monomial


@dataclass
class MultiplierTriple:
    """Multiplier data (X, q, m) evaluated through the profile family."""

    profile: MultiplierProfile
    chart: IngoingChart

    @property
    def sp(self) -> SchwParams:
        return self.profile.sp

    def ingredients(self, r):
        """All pointwise inputs of the quadratic-form coefficients."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        pr, ch = self.profile, self.chart
        d = self.sp.d
        delta, delta1 = pr.delta, pr.delta1
        A = ch.A(r)
        A1 = ch.A1(r)
        M = ch.mu_prime(r)
        M1 = ch.mu_pp(r)
        f = pr.f_jet(r)
        b = pr.b_jet(r)
        gam = pr.gamma_jet(r)
        q1 = pr.q1_jet(r)
        q2 = pr.q2_jet(r)
        mt = pr.m_t_jet(r)
        # X = f (A d_r + (1 - A mu') d_v) - delta b (d_r - mu' d_v)
        Xv = f[0] * (1 - A * M) + delta * b[0] * M
        Xr = f[0] * A - delta * b[0]
        Xv1 = f[1] * (1 - A * M) + f[0] * (-A1 * M - A * M1) \
            + delta * (b[1] * M + b[0] * M1)
        Xr1 = f[1] * A + f[0] * A1 - delta * b[1]
        # scalar companion  q = q1 - delta (d+2) b /(2r) - delta1 q2
        br = jet_mul(b, jet_monomial(r, -1.0))
        q = q1[0] - delta * (d + 2) / 2.0 * br[0] - delta1 * q2[0]
        qp = q1[1] - delta * (d + 2) / 2.0 * br[1] - delta1 * q2[1]
        qpp = q1[2] - delta * (d + 2) / 2.0 * br[2] - delta1 * q2[2]
        # 1-form (delta m)
        mv = delta * mt[0]
        mv1 = delta * mt[1]
        mr = mv * M
        mr1 = mv1 * M + mv * M1
        return dict(r=r, A=A, A1=A1, M=M, M1=M1, Xv=Xv, Xr=Xr, Xv1=Xv1, Xr1=Xr1,
                    q=q, qp=qp, qpp=qpp, mv=mv, mv1=mv1, mr=mr, mr1=mr1,
                    f=f, b=b, gam=gam, q1=q1, q2=q2, mt=mt)


# ---------------------------------------------------------------------------
# frozen interior coefficients (derived symbolically; d = 1, 3-sphere)
# ---------------------------------------------------------------------------

def quad_coefficients(ing):
    r = ing["r"]
    A, A1, M, M1 = ing["A"], ing["A1"], ing["M"], ing["M1"]
    Xv, Xr, Xv1, Xr1 = ing["Xv"], ing["Xr"], ing["Xv1"], ing["Xr1"]
    q, qp, qpp = ing["q"], ing["qp"], ing["qpp"]
    mv, mv1, mr, mr1 = ing["mv"], ing["mv1"], ing["mr"], ing["mr1"]
    c = {}
    c["vv"] = ((-A * M * Xr + Xr) * M1 + A * M**2 * q - A * M**2 * Xr1 / 2
               - A * M * Xv1 - M**2 * Xr * A1 / 2 - 2 * M * q + M * Xr1 + Xv1
               - 1.5 * A * M**2 * Xr / r + 3 * M * Xr / r)
    c["vr"] = (-2 * A * M * q + A * Xr * M1 + A * Xv1 + M * Xr * A1 + 2 * q
               + 3 * A * M * Xr / r - 3 * Xr / r)
    c["rr"] = A * q + A * Xr1 / 2 - Xr * A1 / 2 - 1.5 * A * Xr / r
    c["ang"] = q - Xr1 / 2 - Xr / (2 * r)
    c["uv"] = A * M**2 * mv - A * M * mr - 2 * M * mv + mr
    c["ur"] = -A * M * mv + A * mr + mv
    c["uu"] = ((-M * mv / 2 + mr / 2 - qp / 2) * A1 - A * M * mv1 / 2
               - A * mv * M1 / 2 + A * mr1 / 2 - A * qpp / 2 + mv1 / 2
               - 1.5 * A * M * mv / r + 1.5 * A * mr / r - 1.5 * A * qp / r
               + 1.5 * mv / r)
    return c


def quad_matrix(triple: MultiplierTriple, r):
    """Symmetric 4x4 coefficient matrices of Q over (d_r u, d_v u, |snab u|, u)."""
    ing = triple.ingredients(r)
    c = quad_coefficients(ing)
    n = len(ing["r"])
    Mm = np.zeros((n, 4, 4))
    Mm[:, 0, 0] = c["rr"]
    Mm[:, 1, 1] = c["vv"]
    Mm[:, 2, 2] = c["ang"]
    Mm[:, 3, 3] = c["uu"]
    Mm[:, 0, 1] = Mm[:, 1, 0] = c["vr"] / 2
    Mm[:, 0, 3] = Mm[:, 3, 0] = c["ur"] / 2
    Mm[:, 1, 3] = Mm[:, 3, 1] = c["uv"] / 2
    return Mm


def quadform(triple: MultiplierTriple, r):
    """QuadForm at radius r: (r, 4x4 matrix)."""
    return quad_matrix(triple, np.asarray([r], dtype=float))[0]


def zeroth_order_n(triple: MultiplierTriple, r):
    """n(r): u^2 coefficient before completing the horizon square."""
    ing = triple.ingredients(r)
    c = quad_coefficients(ing)
    d = triple.sp.d
    delta = triple.profile.delta
    rs = triple.sp.r_s
    sq_gamma2 = delta * (d + 1) * rs ** (d + 1) * ing["b"][0] \
        * ing["gam"][0] ** 2 / (2.0 * ing["r"] ** (d + 2))
    return c["uu"] - sq_gamma2


def comparison_weights(sp: SchwParams, r):
    """Diagonal comparison form of the localized-energy bound."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    d = sp.d
    w_ps = ((r - sp.r_ps) / r) ** 2
    n = len(r)
    W = np.zeros((n, 4, 4))
    W[:, 0, 0] = r ** (-(d + 3))
    W[:, 1, 1] = w_ps * r ** (-(d + 3))
    W[:, 2, 2] = w_ps / r
    W[:, 3, 3] = r ** (-3)
    return W


def positivity_grid(sp: SchwParams, r_e: float, r_hi: float, n_grid: int):
    """Grid avoiding the exact photon sphere, refined toward the horizon."""
    base = np.linspace(r_e, r_hi, n_grid)
    extra = sp.r_s + np.geomspace(1e-9, 0.2, 101) * sp.r_s
    g = np.unique(np.concatenate([base, extra]))
    g = g[np.abs(g - sp.r_ps) > 1e-7 * sp.r_s]
    return g


def check_positivity(triple: MultiplierTriple, r_range=(None, None),
                     n_grid: int = 2000, raise_on_fail: bool = False):
    """Largest c with Q-matrix(r) - c W(r) >= 0 on the grid.

    Returns dict with c_star, minimizing radius and eigenvector.  c_star > 0
    certifies the localized-energy positivity at the shipped parameters.
    """
    sp = triple.sp
    r_lo = r_range[0] if r_range[0] is not None else triple.chart.r_e
    r_hi = r_range[1] if r_range[1] is not None else 50.0 * sp.r_s
    grid = positivity_grid(sp, r_lo, r_hi, n_grid)
    Mm = quad_matrix(triple, grid)
    W = comparison_weights(sp, grid)
    c_star = math.inf
    argmin = None
    vec = None
    for i in range(len(grid)):
        vals, vecs = eigh(Mm[i], W[i])
        if vals[0] < c_star:
            c_star = vals[0]
            argmin = grid[i]
            vec = vecs[:, 0]
    if raise_on_fail and c_star <= 0:
        raise LemmaViolation(f"c_star = {c_star} <= 0 at r = {argmin}, direction {vec}")
    return {"c_star": float(c_star), "min_r": float(argmin),
            "min_eigvec": [float(v) for v in vec], "grid_points": len(grid),
            "r_range": [float(grid[0]), float(grid[-1])]}


def build_redshift(sp: SchwParams, profile: MultiplierProfile, chart: IngoingChart,
                   n_grid: int = 2000, r_hi: float = 10.0):
    """Verify the horizon-component budget: n(r) > 0 on the sampled grid.

    Returns (b, gamma, m_t, report).  The profile shape was fixed by a
    deterministic search during development; if the budget fails here the
    offending radius is reported so the caller can retune the shape.
    """
    triple = MultiplierTriple(profile=profile, chart=chart)
    grid = positivity_grid(sp, chart.r_e, r_hi * sp.r_s, n_grid)
    n_vals = zeroth_order_n(triple, grid)
    i_min = int(np.argmin(n_vals))
    report = {"n_min": float(n_vals[i_min]), "n_argmin": float(grid[i_min]),
              "grid_points": len(grid)}
    if n_vals[i_min] <= 0:
        raise RedshiftBudgetFailure(
            f"n(r) = {n_vals[i_min]} <= 0 at r = {grid[i_min]}")
    # boundary values required by the energy identity
    rs = np.asarray([sp.r_s])
    ing = triple.ingredients(rs)
    report["X_dr_at_rs"] = float(ing["Xr"][0])
    report["m_dr_at_rs"] = float(ing["mt"][0][0] * profile.delta)
    if not report["X_dr_at_rs"] < 0:
        raise RedshiftBudgetFailure("X(dr)(r_s) must be negative")
    if not report["m_dr_at_rs"] > 0:
        raise RedshiftBudgetFailure("<m, dr>(r_s) must be positive")
    return triple.profile.b_jet, triple.profile.gamma_jet, triple.profile.m_t_jet, report


# ---------------------------------------------------------------------------
# boundary flux forms, from the frozen symbolic derivation
# ---------------------------------------------------------------------------

def flux_matrices(triple: MultiplierTriple, r, C_energy: float):
    """(slice_matrix, lateral_matrix) over (d_r u, d_v u, |snab u|, u).

    slice = -<dv, P[u, X + C K, q, m]>, lateral = +<dr, P[...]>; the signs
    make both positive for admissible data (energy flux conventions).
    """
    ing = triple.ingredients(r)
    A, M = ing["A"], ing["M"]
    B = 1.0 - A * M
    D = M * (2.0 - A * M)
    Xv, Xr = ing["Xv"], ing["Xr"]
    q, qp = ing["q"], ing["qp"]
    mv, mr = ing["mv"], ing["mr"]
    C = C_energy
    n = len(ing["r"])
    S = np.zeros((n, 4, 4))   # slice
    L = np.zeros((n, 4, 4))   # lateral
    CX = C + Xv
    # slice = -P^v
    S[:, 1, 1] = CX * D / 2.0
    S[:, 0, 0] = A * CX / 2.0 + Xr * (A * M - 1.0)
    S[:, 2, 2] = CX / 2.0
    S[:, 0, 1] = S[:, 1, 0] = Xr * D / 2.0
    S[:, 1, 3] = S[:, 3, 1] = q * D / 2.0
    S[:, 0, 3] = S[:, 3, 0] = -q * B / 2.0
    S[:, 3, 3] = -(A * M**2 * mv / 2.0 - A * M * mr / 2.0 + A * M * qp / 2.0
                   - M * mv + mr / 2.0 - qp / 2.0)
    # lateral = +P^r
    L[:, 1, 1] = B * CX + Xr * D / 2.0
    L[:, 0, 0] = A * Xr / 2.0
    L[:, 2, 2] = -Xr / 2.0
    L[:, 0, 1] = L[:, 1, 0] = A * CX / 2.0
    L[:, 1, 3] = L[:, 3, 1] = q * B / 2.0
    L[:, 0, 3] = L[:, 3, 0] = A * q / 2.0
    L[:, 3, 3] = -A * M * mv / 2.0 + A * mr / 2.0 - A * qp / 2.0 + mv / 2.0
    return S, L


def boundary_forms(triple: MultiplierTriple, C_energy: float, r_e: float,
                   r_hi: float = 30.0, n_grid: int = 1200,
                   raise_on_fail: bool = False):
    """Slice-form equivalence constants and lateral-form spectrum at r_e.

    The slice form is compared two-sided against the nondegenerate energy
    density diag(1,1,1) on the derivative block; kappa = sqrt(c_hi/c_lo).
    The lateral form is the full 4x4 at r = r_e.  With raise_on_fail, a
    non-equivalent slice form or indefinite lateral form raises
    BoundaryFormFailure carrying the measured constants.
    """
    sp = triple.sp
    grid = positivity_grid(sp, r_e, r_hi * sp.r_s, n_grid)
    S, _ = flux_matrices(triple, grid, C_energy)
    lo, hi = math.inf, -math.inf
    argmin = None
    for i in range(len(grid)):
        vals = np.linalg.eigvalsh(S[i, :3, :3])
        if vals[0] < lo:
            lo, argmin = vals[0], grid[i]
        hi = max(hi, vals[-1])
    kappa = math.sqrt(hi / lo) if lo > 0 else math.inf
    _, L = flux_matrices(triple, np.asarray([r_e]), C_energy)
    lat_eigs = np.linalg.eigvalsh(L[0])
    report = {
        "slice_min_eig": float(lo), "slice_max_eig": float(hi),
        "slice_min_r": float(argmin), "kappa": float(kappa),
        "lateral_eigs": [float(v) for v in lat_eigs],
        "lateral_min_eig": float(lat_eigs[0]),
        "C_energy": float(C_energy), "r_e": float(r_e),
    }
    if raise_on_fail and (lo <= 0 or lat_eigs[0] <= 0):
        raise BoundaryFormFailure(f"boundary forms not positive: {report}")
    return report


def hardy_check(sp: SchwParams, r_e: float, r_hi: float = 400.0,
                n_grid: int = 4000):
    """Discrete Hardy inequality with measure r^{d+2} dr.

    int r^-2 u^2 r^{d+2} dr <= C_H int (u')^2 r^{d+2} dr for test functions
    decaying at infinity; the classical constant is (2/(d+1))^2.  Returns the
    measured worst ratio over a family of test functions.
    """
    r = np.linspace(r_e, r_hi, n_grid)
    dr = r[1] - r[0]
    d = sp.d
    worst = 0.0
    for p, s in ((1.5, 1.0), (2.0, 2.0), (2.5, 0.5), (3.0, 1.3)):
        u = (1.0 + (r / s)) ** (-p)
        up = np.gradient(u, dr)
        num = np.trapezoid(u**2 * r**d, r)
        den = np.trapezoid(up**2 * r ** (d + 2), r)
        worst = max(worst, num / den)
    return {"hardy_ratio": float(worst), "classical_constant": (2.0 / (d + 1)) ** 2}


def demo_boundary_parameters(triple: MultiplierTriple):
    """(C_demo, r_e_demo) at which both boundary forms are provably positive.

    The saturated profile has |X(dvtilde)| ~ 2(1 + |A| mu')/(eps r^{d+2})
    near the horizon, so the flux positivity mechanism requires C above that
    size and then a horizon margin with |A(r_e)| |f(r_e)| below delta b(r_e).
    Both are derived from the profile rather than guessed.
    """
    sp = triple.sp
    ing = triple.ingredients(np.asarray([sp.r_s * 0.999]))
    C_demo = 2.0 * abs(float(ing["Xv"][0]))
    r_demo = feasible_lateral_radius(triple, C_demo)
    return C_demo, r_demo


def feasible_lateral_radius(triple: MultiplierTriple, C_energy: float,
                            lo_frac: float = 0.994, hi_frac: float = 1.0 - 4e-12):
    """Largest horizon margin at which the lateral form is positive definite.

    The lateral (d_r u)^2 entry is A(r_e) X(dr)(r_e)/2; with the saturated
    profile this forces r_e extremely close to r_s.  Bisect for the
    transition and return a radius safely inside the positive region.
    """
    sp = triple.sp

    def min_eig(re):
        _, L = flux_matrices(triple, np.asarray([re]), C_energy)
        return np.linalg.eigvalsh(L[0])[0]

    lo = lo_frac * sp.r_s
    hi = hi_frac * sp.r_s
    if min_eig(hi) <= 0:
        raise BoundaryFormFailure(
            f"lateral form not positive adjacent to the horizon at C = {C_energy}")
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if min_eig(mid) > 0:
            hi = mid
        else:
            lo = mid
    r_feasible = hi + 0.25 * (sp.r_s - hi)
    return float(r_feasible)
