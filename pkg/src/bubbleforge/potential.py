"""Fundamental solution of the Laplacian and singular potential quadrature.

All ball integrals against the kernel H use polar coordinates about the
singular point, where |H| r^(n-1) is proportional to r, so the radial
integrand is bounded; angular directions use product Gauss rules.  Error
estimates come from rule doubling; accumulation is fixed-order, so results
are deterministic run to run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import gamma, roots_jacobi

from .errors import BadRadii, Coincident, ProfileViolated
from .field_core import ScalarField, as_dim, inv_root_grad_sq, k_function
from .regions import Ball


def unit_sphere_area(n: int) -> float:
    """Surface area of the unit sphere S^(n-1) in R^n."""
    return 2.0 * math.pi ** (n / 2.0) / gamma(n / 2.0)


@dataclass(frozen=True)
class Kernel:
    """Free-space fundamental solution H(x, xi) = |x-xi|^(2-n) / ((2-n) omega_n)."""

    n: int

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("kernel requires n >= 3")

    @property
    def omega_n(self) -> float:
        return unit_sphere_area(self.n)


@dataclass(frozen=True)
class QuadResult:
    """Quadrature value with a rule-doubling error estimate."""

    value: float
    err_est: float
    n_evals: int


@dataclass(frozen=True)
class SingularProfile:
    """Declared blow-up bounds near an isolated singular point p.

    On the punctured ball B(p, delta) the attached field must satisfy
    |lap u| <= c1 / |x-p|^(n-1+mu) and |grad u| <= c2 / |x-p|^(n-1-nu).
    """

    p: np.ndarray
    mu: float
    nu: float
    c1: float
    c2: float
    delta: float

    def __post_init__(self):
        object.__setattr__(self, "p", np.asarray(self.p, dtype=float))
        if not (0 < self.mu < 1 and 0 < self.nu < 1):
            raise ValueError("need mu, nu in (0, 1)")
        if min(self.c1, self.c2, self.delta) <= 0:
            raise ValueError("profile constants must be positive")


# --- quadrature primitives ---------------------------------------------------

_GL16 = leggauss(16)


def _panel_nodes(a, b, k: int):
    """Composite 16-point Gauss-Legendre nodes/weights on [a, b], k panels."""
    x0, w0 = _GL16
    edges = np.linspace(a, b, k + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    return (mid[:, None] + half[:, None] * x0[None, :]).ravel(), (
        half[:, None] * w0[None, :]
    ).ravel()


def _geom_panel_nodes(a, b, k: int):
    """Composite GL nodes on geometrically graded panels (a > 0)."""
    x0, w0 = _GL16
    edges = np.geomspace(a, b, k + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    return (mid[:, None] + half[:, None] * x0[None, :]).ravel(), (
        half[:, None] * w0[None, :]
    ).ravel()


def adaptive_radial(fvec, a: float, b: float, rel_tol: float = 1e-10,
                    abs_tol: float = 1e-14, splits=(), max_panels: int = 4096,
                    geometric: bool = False):
    """Adaptive 1D integral of a vectorized integrand by panel doubling.

    Returns (value, err_est, n_evals); err_est is the last doubling delta.
    Interior breakpoints can be supplied to keep panels off integrand kinks.
    """
    if b <= a:
        return 0.0, 0.0, 0
    cuts = sorted({float(a), float(b), *[float(s) for s in splits if a < s < b]})
    total, err, evals = 0.0, 0.0, 0
    nodes_of = _geom_panel_nodes if geometric else _panel_nodes
    for u, v in zip(cuts[:-1], cuts[1:]):
        k = 4
        nodes, wts = nodes_of(u, v, k)
        prev = float(wts @ np.asarray(fvec(nodes)))
        evals += nodes.size
        while True:
            k *= 2
            nodes, wts = nodes_of(u, v, k)
            cur = float(wts @ np.asarray(fvec(nodes)))
            evals += nodes.size
            delta = abs(cur - prev)
            if delta <= max(abs_tol, rel_tol * abs(cur)) or k >= max_panels:
                total += cur
                err += delta
                break
            prev = cur
    return total, err, evals


def sphere_rule(n: int, m: int):
    """Product quadrature rule on S^(n-1): points (M, n), weights summing to omega_n.

    Polar cosines use Gauss-Jacobi nodes for the (1-t^2)^((n-3)/2) weight;
    the base circle uses 2m equispaced points.
    """
    if n < 2:
        raise ValueError("sphere rule needs n >= 2")
    if n == 2:
        ang = (np.arange(2 * m) + 0.5) * (math.pi / m)
        pts = np.stack([np.cos(ang), np.sin(ang)], axis=-1)
        return pts, np.full(2 * m, math.pi / m)
    t, wt = roots_jacobi(m, (n - 3) / 2.0, (n - 3) / 2.0)
    sub_pts, sub_w = sphere_rule(n - 1, m)
    s = np.sqrt(np.clip(1.0 - t * t, 0.0, None))
    pts = np.concatenate(
        [
            np.repeat(t, sub_pts.shape[0])[:, None],
            (s[:, None, None] * sub_pts[None, :, :]).reshape(-1, n - 1),
        ],
        axis=1,
    )
    w = (wt[:, None] * sub_w[None, :]).ravel()
    return pts, w


# --- kernel and its basic integrals ------------------------------------------


def h_eval(k: Kernel, x, xi):
    """H(x, xi); negative for all x != xi."""
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    s = np.linalg.norm(x - xi, axis=-1)
    if np.any(s == 0.0):
        raise Coincident("kernel is singular at x = xi")
    out = s ** (2.0 - k.n) / ((2.0 - k.n) * k.omega_n)
    return float(out) if out.ndim == 0 else out


def grad_h(k: Kernel, x, xi):
    """Gradient of H in x: (x - xi) / (omega_n |x - xi|^n)."""
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    d = x - xi
    s = np.linalg.norm(d, axis=-1, keepdims=True)
    if np.any(s == 0.0):
        raise Coincident("kernel is singular at x = xi")
    return d / (k.omega_n * s**k.n)


def int_absH_ball(k: Kernel, R: float, xi, m: int = 64) -> QuadResult:
    """Integral of |H(., xi)| over the origin-centered ball of radius R.

    Polar coordinates about xi integrate the radial direction exactly
    (|H| r^(n-1) is linear in r); the polar angle is integrated by a
    Gauss-Jacobi rule, doubled once for the error estimate.
    """
    xi = np.asarray(xi, dtype=float)
    s = float(np.linalg.norm(xi))
    if s >= R:
        raise ValueError("xi must lie inside the ball")

    def angular(mm: int) -> float:
        t, wt = roots_jacobi(mm, (k.n - 3) / 2.0, (k.n - 3) / 2.0)
        rmax = -s * t + np.sqrt(s * s * t * t + R * R - s * s)
        pref = unit_sphere_area(k.n - 1) / (2.0 * (k.n - 2) * k.omega_n)
        return pref * float(wt @ (rmax * rmax))

    v1, v2 = angular(m), angular(2 * m)
    return QuadResult(value=v2, err_est=abs(v2 - v1) + 1e-15 * abs(v2), n_evals=3 * m)


def int_absH_annulus(k: Kernel, rho: float, R: float) -> QuadResult:
    """Integral of |H(., 0)| over the annulus rho < |x| < R."""
    if not 0 < rho < R:
        raise BadRadii("need 0 < rho < R")
    val, err, ev = adaptive_radial(lambda r: r / (k.n - 2.0), rho, R)
    return QuadResult(value=val, err_est=err, n_evals=ev)


# --- weighted potential integrals --------------------------------------------


def _ray_exit(ball: Ball, xi: np.ndarray, dirs: np.ndarray) -> np.ndarray:
    """Distance from xi to the ball boundary along each unit direction."""
    d = xi - ball.center
    b = dirs @ d
    disc = b * b + ball.radius**2 - float(d @ d)
    return -b + np.sqrt(np.clip(disc, 0.0, None))


def _shell_kernel_factor(r, s0: float, n: int):
    """Spherical mean of |x - xi|^(2-n) over the sphere |x| = r, |xi| = s0."""
    r = np.asarray(r, float)
    return np.maximum(r, s0) ** (2.0 - n)


def _polar_ball_integral(k: Kernel, g, ball: Ball, xi: np.ndarray,
                         m_sphere: int, m_rad: int):
    """sum_dirs w int_0^exit r g(xi + r theta) dr / ((n-2) omega_n), doubled."""
    dirs, w = sphere_rule(k.n, m_sphere)
    rexit = _ray_exit(ball, xi, dirs)
    x0, w0 = _GL16

    def radial(krad: int) -> float:
        edges = np.linspace(0.0, 1.0, krad + 1)
        mid = 0.5 * (edges[:-1] + edges[1:])
        half = 0.5 * (edges[1:] - edges[:-1])
        u = (mid[:, None] + half[:, None] * x0[None, :]).ravel()
        wu = (half[:, None] * w0[None, :]).ravel()
        rr = rexit[:, None] * u[None, :]
        pts = xi[None, None, :] + rr[..., None] * dirs[:, None, :]
        vals = np.asarray(g(pts.reshape(-1, k.n))).reshape(rr.shape)
        per_dir = rexit * ((rr * vals) @ wu)
        return float(w @ per_dir) / ((k.n - 2.0) * k.omega_n)

    v1 = radial(m_rad)
    v2 = radial(2 * m_rad)
    n_evals = dirs.shape[0] * 16 * 3 * m_rad
    return v2, abs(v2 - v1), n_evals


def weighted_grad_integral(k: Kernel, f: ScalarField, region: Ball, xi,
                           m_sphere: int = 16, m_rad: int = 16) -> QuadResult:
    """Integral of |H(x, xi)| |grad(f^(-2/(n-2)))(x)|^2 over a ball.

    Radially symmetric fields over origin-centered balls reduce to a 1D
    integral through the spherical mean of the kernel; otherwise a polar
    product rule about xi is used.
    """
    xi = np.asarray(xi, dtype=float)
    g = lambda pts: inv_root_grad_sq(f, pts)
    if f.radial and bool(np.all(region.center == 0.0)):
        s0 = float(np.linalg.norm(xi))
        e1 = np.zeros(k.n)
        e1[0] = 1.0

        def integrand(r):
            pts = r[:, None] * e1
            return g(pts) * r ** (k.n - 1) * _shell_kernel_factor(r, s0, k.n) / (k.n - 2.0)

        val, err, ev = adaptive_radial(integrand, 0.0, region.radius, splits=(s0,))
        return QuadResult(value=val, err_est=err, n_evals=ev)
    val, err, ev = _polar_ball_integral(k, g, region, xi, m_sphere, m_rad)
    return QuadResult(value=val, err_est=err, n_evals=ev)


def _radial_field_splits(field) -> list[float]:
    cut = getattr(field, "cut", None)
    return [cut.r_in, cut.r_out] if cut is not None else []


def rep_identity_report(u_c: ScalarField, u2: ScalarField, omega2: Ball, xi,
                        m_sphere: int = 16, m_rad: int = 32) -> dict:
    """Both sides of the glued-field representation identity on a ball.

    Left side: 4n * integral of H (K - 1) over omega2.  Right side:
    u_c(xi)^(-4/(n-2)) - u2(xi)^(-4/(n-2)) plus (n+2) times the integral of
    |H| (|grad u_c^(-2/(n-2))|^2 - |grad u2^(-2/(n-2))|^2).  Both sides are
    quadratures; for a valid configuration the difference is quadrature
    error only.
    """
    d = as_dim(u_c.n)
    k = Kernel(d.n)
    xi = np.asarray(xi, dtype=float)
    p4 = 4.0 / (d.n - 2)

    def kdev(pts):
        return np.asarray(k_function(u_c, pts)) - 1.0

    def gdiff(pts):
        return inv_root_grad_sq(u_c, pts) - inv_root_grad_sq(u2, pts)

    radial_ok = u_c.radial and u2.radial and bool(np.all(omega2.center == 0.0))
    if radial_ok:
        s0 = float(np.linalg.norm(xi))
        e1 = np.zeros(d.n)
        e1[0] = 1.0
        splits = [s0] + _radial_field_splits(u_c)

        def q1_int(r):
            pts = r[:, None] * e1
            return (kdev(pts) * r ** (d.n - 1)
                    * _shell_kernel_factor(r, s0, d.n) / (2.0 - d.n))

        def q2_int(r):
            pts = r[:, None] * e1
            return (gdiff(pts) * r ** (d.n - 1)
                    * _shell_kernel_factor(r, s0, d.n) / (d.n - 2.0))

        q1, _, _ = adaptive_radial(q1_int, 0.0, omega2.radius, splits=splits)
        q2, _, _ = adaptive_radial(q2_int, 0.0, omega2.radius, splits=splits)
    else:
        neg, _, _ = _polar_ball_integral(k, kdev, omega2, xi, m_sphere, m_rad)
        q1 = -neg  # H = -|H|
        q2, _, _ = _polar_ball_integral(k, gdiff, omega2, xi, m_sphere, m_rad)

    lhs = 4.0 * d.n * q1
    rhs = (float(u_c.value(xi)) ** (-p4) - float(u2.value(xi)) ** (-p4)
           + (d.n + 2) * q2)
    return {"lhs": lhs, "rhs": rhs, "residual": lhs - rhs}


def rep_identity_residual(u_c: ScalarField, u2: ScalarField, omega2: Ball, xi,
                          m_sphere: int = 16, m_rad: int = 32) -> float:
    """Difference of the two sides of the representation identity."""
    return rep_identity_report(u_c, u2, omega2, xi, m_sphere, m_rad)["residual"]


def lower_bound_3_9(u_c: ScalarField, u2: ScalarField, omega2: Ball, xi) -> float:
    """Representation lower bound on sup |K - 1| over a ball of radius R."""
    d = as_dim(u_c.n)
    p4 = 4.0 / (d.n - 2)
    q2 = weighted_grad_integral(Kernel(d.n), u_c, omega2, xi).value - \
        weighted_grad_integral(Kernel(d.n), u2, omega2, xi).value
    bracket = (float(u_c.value(xi)) ** (-p4) - float(u2.value(xi)) ** (-p4)
               + (d.n + 2) * q2)
    return ((d.n - 2) / (2.0 * d.n)) * bracket / omega2.radius**2


# --- representation formula with a point singularity --------------------------


def verify_profile(u: ScalarField, prof: SingularProfile, n_radii: int = 24,
                   m_sphere: int = 4) -> None:
    """Sample the declared singular-profile bounds; raise ProfileViolated on failure."""
    n = u.n
    dirs, _ = sphere_rule(n, m_sphere)
    radii = np.geomspace(prof.delta * 1e-3, prof.delta * 0.999, n_radii)
    pts = (prof.p[None, None, :] + radii[:, None, None] * dirs[None, :, :]).reshape(-1, n)
    s = np.linalg.norm(pts - prof.p, axis=-1)
    lap = np.abs(np.asarray(u.laplacian(pts)))
    if np.any(lap > prof.c1 / s ** (n - 1 + prof.mu)):
        raise ProfileViolated("sampled |lap u| exceeds the declared bound")
    gr = np.linalg.norm(np.asarray(u.gradient(pts)), axis=-1)
    if np.any(gr > prof.c2 / s ** (n - 1 - prof.nu)):
        raise ProfileViolated("sampled |grad u| exceeds the declared bound")


def _boundary_integral(k: Kernel, u: ScalarField, center, radius: float,
                       xi: np.ndarray, m: int, outward: bool = True) -> float:
    """Integral of u dH/dn - H du/dn over a sphere, normal radial (+/-)."""
    dirs, w = sphere_rule(k.n, m)
    pts = np.asarray(center, float)[None, :] + radius * dirs
    sgn = 1.0 if outward else -1.0
    dh = np.sum(np.asarray(grad_h(k, pts, xi)) * dirs, axis=-1)
    du = np.sum(np.asarray(u.gradient(pts)) * dirs, axis=-1)
    h = np.asarray(h_eval(k, pts, xi))
    vals = np.asarray(u.value(pts)) * dh - h * du
    return sgn * radius ** (k.n - 1) * float(w @ vals)


def _complement_frame(axis: np.ndarray) -> np.ndarray:
    """Orthonormal basis of axis^perp as columns (Householder construction)."""
    n = axis.size
    e = np.zeros(n)
    e[0] = 1.0
    if np.allclose(axis, e):
        return np.eye(n)[:, 1:]
    v = e - axis
    v = v / np.linalg.norm(v)
    house = np.eye(n) - 2.0 * np.outer(v, v)
    return house[:, 1:]


def _aligned_sphere_rule(n: int, m: int, axis: np.ndarray, t_breaks):
    """Sphere rule with the polar axis aligned to `axis`, split at given cosines.

    The polar weight (1-t^2)^((n-3)/2) is folded into the weights, so the
    integrand may be merely piecewise smooth across the break cosines without
    degrading convergence.
    """
    x0, w0 = _GL16
    frame = _complement_frame(axis)
    sub_pts, sub_w = sphere_rule(n - 1, m)
    cuts = sorted({-1.0, 1.0, *[float(t) for t in t_breaks if -1.0 < t < 1.0]})
    dirs_blocks, w_blocks = [], []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        kpan = max(2, m // 8)
        edges = np.linspace(lo, hi, kpan + 1)
        mid = 0.5 * (edges[:-1] + edges[1:])
        half = 0.5 * (edges[1:] - edges[:-1])
        ts = (mid[:, None] + half[:, None] * x0[None, :]).ravel()
        wts = (half[:, None] * w0[None, :]).ravel()
        wts = wts * (1.0 - ts * ts) ** ((n - 3) / 2.0)
        s = np.sqrt(np.clip(1.0 - ts * ts, 0.0, None))
        block = ts[:, None, None] * axis[None, None, :] + (
            s[:, None, None] * (sub_pts @ frame.T)[None, :, :]
        )
        dirs_blocks.append(block.reshape(-1, n))
        w_blocks.append((wts[:, None] * sub_w[None, :]).ravel())
    return np.concatenate(dirs_blocks), np.concatenate(w_blocks)


def _volume_h_lap(k: Kernel, u: ScalarField, omega: Ball, xi: np.ndarray,
                  excluded: tuple | None, m_sphere: int, m_rad: int) -> float:
    """Integral of H(x, xi) lap(u)(x) over omega minus an excluded ball at p."""

    def g(pts):
        return np.asarray(u.laplacian(pts))

    if excluded is None:
        vneg, _, _ = _polar_ball_integral(k, g, omega, xi, m_sphere, m_rad)
        return -vneg  # _polar integrates against |H|; H = -|H|

    p, eps = excluded
    p = np.asarray(p, float)
    dist = float(np.linalg.norm(xi - p))
    D = 0.5 * dist
    dirs_p, w_p = sphere_rule(k.n, m_sphere)

    # inner annulus eps < |x - p| < D, polar about p (kernel smooth there)
    def inner_int(r):
        pts = (p[None, None, :] + r[:, None, None] * dirs_p[None, :, :]).reshape(-1, k.n)
        hv = np.asarray(h_eval(k, pts, xi)).reshape(r.size, -1)
        lap = g(pts).reshape(r.size, -1)
        return (hv * lap) @ w_p * r ** (k.n - 1)

    inner, _, _ = adaptive_radial(inner_int, eps, D, rel_tol=1e-9, geometric=True)

    # outer region: polar about xi, removing the ray segment inside B(p, D).
    # The angular rule is aligned with the xi -> p axis and split at the
    # shadow-boundary cosine, where the segment endpoints lose smoothness.
    axis = (p - xi) / dist
    t_star = math.sqrt(max(0.0, 1.0 - (D / dist) ** 2))
    dirs, w = _aligned_sphere_rule(k.n, m_sphere, axis, (t_star,))
    rexit = _ray_exit(omega, xi, dirs)
    dvec = xi - p
    b = dirs @ dvec
    disc = b * b - (float(dvec @ dvec) - D * D)
    hit = disc > 0.0
    sq = np.sqrt(np.clip(disc, 0.0, None))
    t1 = np.where(hit, -b - sq, rexit)
    t2 = np.where(hit, -b + sq, rexit)
    hit &= (t2 > 0.0) & (t1 < rexit)
    b1 = np.clip(np.where(hit, t1, rexit), 0.0, rexit)
    a2 = np.clip(np.where(hit, t2, rexit), 0.0, rexit)

    x0, w0 = _GL16

    def seg_integral(lo, hi, krad: int) -> float:
        lens = np.clip(hi - lo, 0.0, None)
        edges = np.linspace(0.0, 1.0, krad + 1)
        mid = 0.5 * (edges[:-1] + edges[1:])
        half = 0.5 * (edges[1:] - edges[:-1])
        uu = (mid[:, None] + half[:, None] * x0[None, :]).ravel()
        wu = (half[:, None] * w0[None, :]).ravel()
        rr = lo[:, None] + lens[:, None] * uu[None, :]
        pts = xi[None, None, :] + rr[..., None] * dirs[:, None, :]
        lap = g(pts.reshape(-1, k.n)).reshape(rr.shape)
        per_dir = lens * ((rr * lap) @ wu)
        return float(w @ per_dir) / ((2.0 - k.n) * k.omega_n)

    zero = np.zeros_like(rexit)
    outer = seg_integral(zero, b1, m_rad) + seg_integral(a2, rexit, m_rad)
    return inner + outer


def rep_formula_singular(u: ScalarField, prof: SingularProfile | None,
                         omega: Ball, xi, eps_seq=(1e-2, 1e-3, 1e-4),
                         m_sphere: int = 24, m_boundary: int = 48,
                         m_rad: int = 24) -> float:
    """Residual of the Green representation of u(xi) on a ball.

    With no profile the classical formula is evaluated directly and its
    residual returned.  With a singular profile at p, the volume integral
    excludes B(p, eps) for each radius in eps_seq and the residual sequence
    is extrapolated to eps -> 0 assuming a power-law decay.
    """
    rep = rep_formula_report(u, prof, omega, xi, eps_seq, m_sphere, m_boundary, m_rad)
    return rep["extrapolated"]


def rep_formula_report(u: ScalarField, prof: SingularProfile | None,
                       omega: Ball, xi, eps_seq=(1e-2, 1e-3, 1e-4),
                       m_sphere: int = 24, m_boundary: int = 48,
                       m_rad: int = 24) -> dict:
    """Per-radius residuals, excluded-sphere boundary terms and extrapolation."""
    d = as_dim(u.n)
    k = Kernel(d.n)
    xi = np.asarray(xi, dtype=float)
    target = float(u.value(xi))
    bnd = _boundary_integral(k, u, omega.center, omega.radius, xi, m_boundary)

    if prof is None:
        vol = _volume_h_lap(k, u, omega, xi, None, m_sphere, m_rad)
        res = vol + bnd - target
        return {"residuals": [res], "eps": [], "p_boundary_terms": [],
                "order": None, "extrapolated": res}

    verify_profile(u, prof)
    residuals, pterms = [], []
    for eps in eps_seq:
        vol = _volume_h_lap(k, u, omega, xi, (prof.p, eps), m_sphere, m_rad)
        residuals.append(vol + bnd - target)
        pterms.append(_boundary_integral(k, u, prof.p, eps, xi, m_boundary,
                                         outward=False))
    extrapolated, order = _power_law_limit(list(eps_seq), residuals)
    return {"residuals": residuals, "eps": list(eps_seq),
            "p_boundary_terms": pterms, "order": order,
            "extrapolated": extrapolated}


def _power_law_limit(eps, res):
    """Limit of res(eps) = L + A eps^q from the last three samples."""
    if len(res) < 3:
        return res[-1], None
    r1, r2, r3 = res[-3], res[-2], res[-1]
    e1, e2 = eps[-3], eps[-2]
    ratio_eps = e1 / e2
    num, den = r1 - r2, r2 - r3
    if den == 0.0 or num / den <= 0:
        return r3, None
    q = math.log(num / den) / math.log(ratio_eps)
    lim = r3 - (r2 - r3) / (ratio_eps**q - 1.0)
    return lim, q
