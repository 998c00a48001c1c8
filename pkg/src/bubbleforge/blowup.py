"""Distance-weighted maxima, rescaling and bubble fitting on an annulus.

A near-singular field on the punctured ball B(0, 5/8) is probed by
maximizing U(x) = d(x)^((n-2)/2) u(x) with d(x) = min(|x| - eps, 5/8 - |x|),
rescaling about the maximizer so the profile is normalized to one at the
origin, and least-squares fitting a bubble to the rescaled profile.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import FitDiverged, OutOfDomain
from .fd import fd_gradient, fd_laplacian
from .field_core import Bubble, ScalarField, _out, _prep
from .potential import sphere_rule

OUTER_RADIUS = 5.0 / 8.0


@dataclass(frozen=True)
class BlowupInput:
    """Field on the punctured ball plus probe parameters.

    epsilon is the inner exclusion radius, R the zoom window for the fit,
    delta_target the acceptance threshold on the measured C^2 deviation.
    excluded lists (center, radius) balls masked out of the maximization,
    which lets callers excise an already-detected bubble and rerun.
    """

    field: ScalarField
    epsilon: float
    R: float
    delta_target: float
    excluded: tuple = ()
    coarse: int = 48
    refine_passes: int = 3
    shift_cap: float = 5.0

    def __post_init__(self):
        if not 0 < self.epsilon < OUTER_RADIUS:
            raise ValueError("need 0 < epsilon < 5/8")
        if self.R <= 0 or self.delta_target <= 0:
            raise ValueError("R and delta_target must be positive")


@dataclass(frozen=True)
class BubbleReport:
    """Outcome of a detection: maximizer, scales, fitted bubble, deviation."""

    x_o: np.ndarray
    M_eps: float
    lam: float
    x_1: np.ndarray
    mu: float
    y_o: np.ndarray
    delta_measured: float

    @property
    def scale_original(self) -> float:
        """Fitted bubble scale in the un-rescaled coordinates."""
        return self.lam * self.mu

    @property
    def center_original(self) -> np.ndarray:
        """Fitted bubble center in the un-rescaled coordinates."""
        return self.x_1 + self.lam * self.y_o


def d_eps(x, epsilon: float):
    """Distance weight min(|x| - eps, 5/8 - |x|) on the probe annulus."""
    r = np.linalg.norm(np.asarray(x, float), axis=-1)
    return np.minimum(r - epsilon, OUTER_RADIUS - r)


def weighted_u(inp: BlowupInput, x):
    d = np.clip(np.asarray(d_eps(x, inp.epsilon)), 0.0, None)
    n = inp.field.n
    u = np.asarray(inp.field.value(x))
    return d ** ((n - 2) / 2) * u


def _masked_weighted(inp: BlowupInput, pts: np.ndarray) -> np.ndarray:
    vals = weighted_u(inp, pts)
    d = d_eps(pts, inp.epsilon)
    vals = np.where(d > 0.0, vals, -np.inf)
    for c, rad in inp.excluded:
        inside = np.linalg.norm(pts - np.asarray(c, float), axis=-1) < rad
        vals = np.where(inside, -np.inf, vals)
    return vals


def _refine_about(inp: BlowupInput, start_x: np.ndarray, start_v: float,
                  cell: np.ndarray):
    best_x, best = start_x, start_v
    step = cell.copy()
    for _ in range(inp.refine_passes):
        sub_axes = [np.linspace(c - s, c + s, 17) for c, s in zip(best_x, step)]
        sub_mesh = np.meshgrid(*sub_axes, indexing="ij")
        sub = np.stack([m.ravel() for m in sub_mesh], axis=-1)
        sv = _masked_weighted(inp, sub)
        j = int(np.argmax(sv))
        if sv[j] > best:
            best_x, best = sub[j], sv[j]
        step = step / 8.0
    return best_x, float(best)


def weighted_max(inp: BlowupInput, n_candidates: int = 8):
    """Maximize the weighted field over the annulus by grid plus refinement.

    Narrow peaks can fall between coarse nodes, so the top few
    well-separated coarse candidates are each refined locally and the best
    refined value wins.  Ties break toward the lexicographically smallest
    grid index; the whole search is deterministic.
    """
    n = inp.field.n
    lo = np.full(n, -OUTER_RADIUS)
    hi = np.full(n, OUTER_RADIUS)
    axes = [np.linspace(a, b, inp.coarse) for a, b in zip(lo, hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    vals = _masked_weighted(inp, pts)
    cell = (hi - lo) / (inp.coarse - 1)
    order = np.argsort(-vals, kind="stable")
    min_sep = 2.0 * float(np.linalg.norm(cell))
    candidates = []
    for idx in order:
        if not np.isfinite(vals[idx]):
            break
        x = pts[idx]
        if all(np.linalg.norm(x - c) >= min_sep for c, _ in candidates):
            candidates.append((x, float(vals[idx])))
        if len(candidates) >= n_candidates:
            break
    best_x, best = candidates[0]
    for cx, cv in candidates:
        rx, rv = _refine_about(inp, cx, cv, cell)
        if rv > best:
            best_x, best = rx, rv
    return best_x, float(best)


class RescaledField(ScalarField):
    """w(y) = lam^((n-2)/2) u(x_center + lam y), normalized to w(0) = 1.

    Evaluation is clipped to the window |y| <= window_radius so the source
    is never sampled past half its distance to the annulus boundary.
    """

    def __init__(self, src: ScalarField, x_center, lam: float, window_radius: float):
        self.n = src.n
        self.src = src
        self.x_center = np.asarray(x_center, float)
        self.lam = float(lam)
        self.window_radius = float(window_radius)
        self.radial = False
        self.fd_scale = 1.0

    def _map(self, y):
        arr, single = _prep(y, self.n)
        if np.any(np.linalg.norm(arr, axis=-1) > self.window_radius):
            raise OutOfDomain("rescaled evaluation outside the safe window")
        return self.x_center + self.lam * arr, single

    def value(self, y):
        pts, single = self._map(y)
        q = (self.n - 2) / 2
        return _out(self.lam**q * np.asarray(self.src.value(pts)), single)

    def gradient(self, y):
        pts, single = self._map(y)
        g = self.lam ** (self.n / 2) * np.asarray(self.src.gradient(pts))
        return g.reshape(self.n) if single else g

    def laplacian(self, y):
        pts, single = self._map(y)
        q = (self.n + 2) / 2
        return _out(self.lam**q * np.asarray(self.src.laplacian(pts)), single)


def rescale(inp: BlowupInput, x_center) -> RescaledField:
    """Normalize and spread the field about x_center."""
    x_center = np.asarray(x_center, float)
    d = float(d_eps(x_center, inp.epsilon))
    if d <= 0.0:
        raise OutOfDomain("center must lie inside the probe annulus")
    n = inp.field.n
    lam = float(inp.field.value(x_center)) ** (-2.0 / (n - 2))
    return RescaledField(inp.field, x_center, lam, window_radius=d / (2.0 * lam))


MU_RANGE = (1e-6, 1e6)


def _fit_samples(n: int, R: float) -> np.ndarray:
    dirs, _ = sphere_rule(n, 4)
    radii = np.linspace(0.0, R, 9)[1:]
    pts = (radii[:, None, None] * dirs[None, :, :]).reshape(-1, n)
    return np.vstack([np.zeros((1, n)), pts])


def _model(pts: np.ndarray, mu: float, y: np.ndarray, n: int):
    d = pts - y
    s2 = np.sum(d * d, axis=-1)
    q = (n - 2) / 2
    base = mu / (mu * mu + s2)
    u = base**q
    # partials of u wrt log(mu) and the center coordinates
    dlogmu = q * u * (s2 - mu * mu) / (mu * mu + s2)
    dy = (2.0 * q) * (u / (mu * mu + s2))[:, None] * d
    return u, dlogmu, dy


def fit_bubble(w: ScalarField, R: float, max_iter: int = 100):
    """Least-squares bubble fit (mu, y_o) to w on B(0, R), plus C^2 deviation.

    Gauss-Newton on (log mu, y_o) from the normalized start (1, 0), with
    closed-form model derivatives.  Raises FitDiverged if the scale leaves
    [1e-6, 1e6].  The deviation is the max over samples of
    |value diff| + |gradient diff| + |Laplacian diff|.
    """
    n = w.n
    pts = _fit_samples(n, R)
    target = np.asarray(w.value(pts))
    theta = np.zeros(n + 1)  # (log mu, y)
    for _ in range(max_iter):
        mu = float(np.exp(theta[0]))
        if not MU_RANGE[0] <= mu <= MU_RANGE[1]:
            raise FitDiverged(f"scale left the admissible range: mu={mu:g}")
        u, dlogmu, dy = _model(pts, mu, theta[1:], n)
        r = target - u
        jac = np.column_stack([dlogmu, dy])
        step, *_ = np.linalg.lstsq(jac, r, rcond=None)
        theta = theta + step
        if np.linalg.norm(step) <= 1e-14 * (1.0 + np.linalg.norm(theta)):
            break
    mu = float(np.exp(theta[0]))
    if not MU_RANGE[0] <= mu <= MU_RANGE[1]:
        raise FitDiverged(f"scale left the admissible range: mu={mu:g}")
    y_o = theta[1:].copy()
    fitted = Bubble(mu, y_o, n)
    delta = _c2_deviation(w, fitted, pts)
    return mu, y_o, delta


def _c2_deviation(w: ScalarField, model: ScalarField, pts: np.ndarray) -> float:
    try:
        gv = np.asarray(w.gradient(pts))
        lv = np.asarray(w.laplacian(pts))
    except NotImplementedError:
        gv = np.stack([fd_gradient(w.value, p) for p in pts])
        lv = np.array([fd_laplacian(w.value, p) for p in pts])
    dval = np.abs(np.asarray(w.value(pts)) - np.asarray(model.value(pts)))
    dgrad = np.linalg.norm(gv - np.asarray(model.gradient(pts)), axis=-1)
    dlap = np.abs(lv - np.asarray(model.laplacian(pts)))
    return float(np.max(dval + dgrad + dlap))


def detect(inp: BlowupInput) -> BubbleReport | None:
    """Locate, rescale and fit one bubble; None when no fit meets the target.

    The fitted center may shift the expansion point within shift_cap * lam
    of the maximizer when that improves the measured deviation.
    """
    x_o, M_eps = weighted_max(inp)
    w0 = rescale(inp, x_o)
    r_fit = min(inp.R, 0.97 * w0.window_radius)
    mu0, y0, delta0 = fit_bubble(w0, r_fit)

    best = (x_o, w0.lam, mu0, y0, delta0)
    shift = w0.lam * y0
    cap = inp.shift_cap * w0.lam
    if 0 < np.linalg.norm(shift) and np.linalg.norm(shift) <= cap:
        x_1 = x_o + shift
        if d_eps(x_1, inp.epsilon) > 0:
            w1 = rescale(inp, x_1)
            try:
                mu1, y1, delta1 = fit_bubble(w1, min(inp.R, 0.97 * w1.window_radius))
                if delta1 < delta0:
                    best = (x_1, w1.lam, mu1, y1, delta1)
            except FitDiverged:
                pass

    x_1, lam, mu, y_o, delta = best
    if delta >= inp.delta_target:
        return None
    return BubbleReport(x_o=x_o, M_eps=M_eps, lam=lam, x_1=x_1, mu=mu,
                        y_o=y_o, delta_measured=delta)


def excise(inp: BlowupInput, report: BubbleReport) -> BlowupInput:
    """Mask the detected bubble's window out of the next maximization."""
    ball = (report.x_1, report.lam * inp.R)
    return replace(inp, excluded=tuple(inp.excluded) + (ball,))
