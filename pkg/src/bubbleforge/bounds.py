"""Hypothesis checkers, lower-bound evaluators and deviation scans.

The concentric checkers express the two sufficient conditions under which a
field gluing two centered bubbles must have sup |K - 1| >= (n+2)/n, the
two-ball checkers the analogous distant-bubble condition, and sup_scan
measures the deviation of a constructed field on a grid (a certified
under-estimate of the true sup).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import InvalidGeometry, KappaTooLarge
from .field_core import KReport, ScalarField, as_dim, combined_k_bounds, k_function
from .regions import Box, GridSpec, Region, centered_at_origin, grid_points


@dataclass(frozen=True)
class DepthFactors:
    """Glue-radius to bubble-scale ratios and the induced threshold factor."""

    k1: float
    k2: float
    nu: float
    n: int

    def __post_init__(self):
        if self.k1 <= 0 or self.k2 <= 0:
            raise ValueError("depth factors must be positive")


@dataclass(frozen=True)
class ThmBParams:
    """Two disjoint-ball bubble data: scales, fidelity radii and centers."""

    lambda1: float
    lambda2: float
    r1: float
    a: float
    xi1: np.ndarray
    xi2: np.ndarray
    sigma: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "xi1", np.asarray(self.xi1, dtype=float))
        object.__setattr__(self, "xi2", np.asarray(self.xi2, dtype=float))
        if min(self.lambda1, self.lambda2, self.r1, self.a) <= 0:
            raise InvalidGeometry("scales and radii must be positive")
        if self.sigma < 1:
            raise InvalidGeometry("sigma must be >= 1")
        if self.r1 < self.lambda1:
            raise InvalidGeometry("need r1 >= lambda1")
        if self.a < self.lambda2:
            raise InvalidGeometry("need a >= lambda2")
        if self.separation < self.r1 + self.a:
            raise InvalidGeometry("balls overlap")

    @property
    def separation(self) -> float:
        return float(np.linalg.norm(self.xi1 - self.xi2))


# --- concentric case --------------------------------------------------------


def thmA_conditions(l1: float, l2: float, rho: float, R: float, n=3) -> tuple[bool, bool]:
    """The two alternative scale conditions for the concentric construction."""
    _check_concentric_params(l1, l2, rho, R)
    d = as_dim(n)
    cond1 = l1 / l2 <= (rho**2 / R**2) / (1.0 + l2**2 / R**2)
    cond2 = l1**2 / l2**2 >= (3.0 * (d.n + 2) / (2.0 * (d.n - 2))) * (1.0 + R**4 / l2**4)
    return cond1, cond2


def thmA_dual_conditions(l1: float, l2: float, rho: float, R: float, n=3) -> tuple[bool, bool]:
    """Inversion-dual form of the concentric conditions (scales mapped by rho^2/lam)."""
    _check_concentric_params(l1, l2, rho, R)
    d = as_dim(n)
    cond1 = l1 / l2 <= (rho**2 / R**2) / (1.0 + rho**2 / l1**2)
    cond2 = l1**2 / l2**2 >= (3.0 * (d.n + 2) / (2.0 * (d.n - 2))) * (1.0 + l1**4 / rho**4)
    return cond1, cond2


def lower_bound_4_4(l1: float, l2: float, rho: float, R: float, n=3) -> float:
    """Representation-formula lower bound on sup |K - 1| over the glue annulus."""
    _check_concentric_params(l1, l2, rho, R)
    d = as_dim(n)
    p = (d.n + 2) / (d.n - 2)
    num = l1**2 - l2**2 + p * (rho**4 / l1**2 - R**4 / l2**2)
    return ((d.n - 2) / (2.0 * d.n)) * num / (R**2 - rho**2)


def depth_factors(l1: float, l2: float, rho: float, R: float, n=3) -> DepthFactors:
    """Depth factors k1 = rho/lam1, k2 = R/lam2 and nu = ((k1^2+1)/k1^2)^((n-2)/2)."""
    _check_concentric_params(l1, l2, rho, R)
    d = as_dim(n)
    k1 = rho / l1
    k2 = R / l2
    nu = ((k1**2 + 1.0) / k1**2) ** ((d.n - 2) / 2)
    return DepthFactors(k1=k1, k2=k2, nu=nu, n=d.n)


def _check_concentric_params(l1, l2, rho, R):
    if min(l1, l2, rho) <= 0 or not rho < R:
        raise ValueError("need positive scales and 0 < rho < R")


# --- disjoint-ball case ------------------------------------------------------


def thmB_condition(p: ThmBParams, n=3) -> bool:
    """Scale-separation hypothesis for the two-ball lower bound."""
    d = as_dim(n)
    rhs = 8.0**d.n * d.n * (p.separation**4 / p.r1**4) * (p.sigma**2 + 6.0)
    return p.lambda2**2 / p.lambda1**2 >= rhs


def thmB_chain_bound(p: ThmBParams, n=3) -> float:
    """Explicit chain estimate of sup |K - 1| outside the second ball.

    Evaluated with the second center translated to the origin; uses the
    ratios c = r1/lam1, k = a/lam2, C = |xi1 - xi2|/lam2.
    """
    d = as_dim(n)
    c = p.r1 / p.lambda1
    k = p.a / p.lambda2
    C = p.separation / p.lambda2
    t = p.lambda1**2 / p.lambda2**2
    term1 = k**2 * t / (t + C**2) ** 2
    term2 = ((d.n + 2) / (d.n * (d.n - 2))) * 8.0 ** (-d.n) * k**2 * t * (c**4 / C**4)
    term3 = -4.0 * k**2
    term4 = -2.0 * ((d.n + 2) / (d.n - 2)) / k**2
    return ((d.n - 2) / (2.0 * d.n)) * (term1 + term2 + term3 + term4)


def deep_bubble_bound(kappa: float, dist: float, r1: float, n=3) -> float:
    """Largest admissible lambda2^2/lambda1^2 when sup |K - 1| stays small.

    Contrapositive composition: a field whose combined curvature deviation is
    capped by combined_k_bounds(kappa) cannot satisfy the two-ball hypothesis
    for any sigma^2 above (2n/(n+2)) * cap, so the scale ratio is bounded by
    8^n n (dist^4/r1^4) (sigma^2 + 6) at that sigma.
    """
    d = as_dim(n)
    if kappa * kappa >= 1.0:
        raise KappaTooLarge("need kappa^2 < 1")
    if not 0 < dist <= 1:
        raise ValueError("need 0 < dist <= 1")
    if r1 <= 0:
        raise ValueError("need r1 > 0")
    _, hi = combined_k_bounds(kappa, d)
    sigma2 = (2.0 * d.n / (d.n + 2)) * hi
    return 8.0**d.n * d.n * (dist**4 / r1**4) * (sigma2 + 6.0)


def deep_bubble_constant(kappa: float, n=3) -> float:
    """The constant C(n, kappa) in r1^4/lambda1^2 <= C / lambda2^2 (dist = 1)."""
    return deep_bubble_bound(kappa, 1.0, 1.0, n)


# --- deviation scans ---------------------------------------------------------


def _eval_dev_chunks(f: ScalarField, pts: np.ndarray, chunk: int, threads: int) -> np.ndarray:
    """|K - 1| on pts, evaluated in fixed-order chunks (optionally threaded)."""
    if pts.shape[0] == 0:
        return np.empty(0)
    blocks = [pts[i : i + chunk] for i in range(0, pts.shape[0], chunk)]

    def one(block):
        return np.abs(np.asarray(k_function(f, block)) - 1.0)

    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(one, blocks))
    else:
        parts = [one(b) for b in blocks]
    return np.concatenate(parts)


def _radial_scan(f, region, gs: GridSpec):
    r_lo, r_hi = region.radial_range()
    m = gs.radial_points
    if r_lo == 0.0:
        rs = np.linspace(r_lo, r_hi, m + 1)[1:]
    else:
        rs = np.linspace(r_lo, r_hi, m)
    e1 = np.zeros(f.n)
    e1[0] = 1.0
    dev = _eval_dev_chunks(f, rs[:, None] * e1, gs.chunk, gs.threads)
    i = int(np.argmax(dev))
    best_r, best = rs[i], dev[i]
    step = rs[1] - rs[0]
    lo = max(rs[0], best_r - step)
    hi = min(r_hi, best_r + step)
    rs2 = np.linspace(lo, hi, 2 * gs.refine_factor + 1)
    dev2 = _eval_dev_chunks(f, rs2[:, None] * e1, gs.chunk, gs.threads)
    j = int(np.argmax(dev2))
    if dev2[j] > best:
        best_r, best = rs2[j], dev2[j]
    return KReport(
        sup_abs_dev=float(best),
        argmax=best_r * e1,
        grid={"kind": "radial", "r_lo": float(rs[0]), "r_hi": float(r_hi),
              "coarse": int(m), "refine_factor": int(gs.refine_factor)},
        n_samples=int(rs.size + rs2.size),
    )


def _grid_scan(f, region, gs: GridSpec):
    lo, hi = region.bounding_box()
    n = f.n
    m = gs.coarse_count(n)
    pts = grid_points(lo, hi, m)
    inside = np.asarray(region.contains(pts))
    pts = pts[inside]
    dev = _eval_dev_chunks(f, pts, gs.chunk, gs.threads)
    i = int(np.argmax(dev))
    best_x, best = pts[i], dev[i]
    cell = (np.asarray(hi) - np.asarray(lo)) / (m - 1)
    sub_lo = np.maximum(lo, best_x - cell)
    sub_hi = np.minimum(hi, best_x + cell)
    sub = grid_points(sub_lo, sub_hi, 2 * gs.refine_factor + 1)
    sub = sub[np.asarray(region.contains(sub))]
    n_samples = int(pts.shape[0] + sub.shape[0])
    if sub.shape[0]:
        dev2 = _eval_dev_chunks(f, sub, gs.chunk, gs.threads)
        j = int(np.argmax(dev2))
        if dev2[j] > best:
            best_x, best = sub[j], dev2[j]
    return KReport(
        sup_abs_dev=float(best),
        argmax=best_x,
        grid={"kind": "grid", "points_per_axis": int(m),
              "refine_factor": int(gs.refine_factor)},
        n_samples=n_samples,
    )


def sup_scan(f: ScalarField, region: Region, grid_spec: GridSpec | None = None) -> KReport:
    """Grid maximum of |K - 1| over a region with one local refinement pass.

    Radially symmetric fields scanned over origin-centered balls or annuli
    reduce to a 1D radial scan.  Argmax ties break toward the
    lexicographically smallest grid index.
    """
    gs = grid_spec or GridSpec()
    if f.radial and not isinstance(region, Box) and centered_at_origin(region):
        return _radial_scan(f, region, gs)
    return _grid_scan(f, region, gs)
