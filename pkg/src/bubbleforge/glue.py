"""Cut-and-glue constructions with C^2 radial cutoffs.

Three constructions are provided: a radial interpolation between two
centered bubbles (concentric), a two-ball splice that keeps one bubble on
each ball and their sum far away (disjoint), and the insertion of an exact
bubble into a host field across a thin annulus (bubble-insert).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import sup_scan
from .errors import BadConfig, BadRadii, NoSolution, OverlapError
from .field_core import Bubble, KReport, RadialField, ScalarField, as_dim, _out, _prep
from .regions import Annulus, GridSpec, Region

# sharp quintic-smoothstep derivative constants on [0, 1]
SMOOTHSTEP_D1_MAX = 15.0 / 8.0
SMOOTHSTEP_D2_MAX = 10.0 / math.sqrt(3.0)


@dataclass(frozen=True)
class Cutoff:
    """C^2 radial transition: 1 on [0, r_in], 0 on [r_out, inf).

    Built on the quintic smoothstep 6t^5 - 15t^4 + 10t^3, whose first and
    second derivatives vanish at both ends, so gluing with it preserves C^2.
    c_phi bounds both |phi'| * (r_out - r_in) and |phi''| * (r_out - r_in)^2.
    """

    r_in: float
    r_out: float
    c_phi: float = SMOOTHSTEP_D2_MAX

    def __post_init__(self):
        if not 0 < self.r_in < self.r_out:
            raise BadRadii("need 0 < r_in < r_out")

    @property
    def width(self) -> float:
        return self.r_out - self.r_in

    def _t(self, r):
        return np.clip((np.asarray(r, float) - self.r_in) / self.width, 0.0, 1.0)

    def phi(self, r):
        t = self._t(r)
        s = t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
        return 1.0 - s

    def dphi(self, r):
        t = self._t(r)
        return -30.0 * t * t * (1.0 - t) ** 2 / self.width

    def d2phi(self, r):
        t = self._t(r)
        return -60.0 * t * (2.0 * t - 1.0) * (t - 1.0) / self.width**2


def make_cutoff(r_in: float, r_out: float) -> Cutoff:
    """Quintic-smoothstep cutoff with exact derivative bounds."""
    return Cutoff(r_in, r_out)


@dataclass(frozen=True)
class RhoMSolution:
    """Cut radius solving the admissible-band inequality for a given delta."""

    rho_m_big: float
    delta_bar: float
    alpha: float
    n: int
    band_lo: float
    band_hi: float

    @property
    def profile_at_cut(self) -> float:
        """(1/(1 + rho_M^2))^((n-2)/2) for the returned cut radius."""
        return (1.0 / (1.0 + self.rho_m_big**2)) ** ((self.n - 2) / 2)


def solve_rho_M(delta: float, alpha: float, n) -> RhoMSolution:
    """Pick the cut radius rho_M from the double inequality band.

    The band constrains (1/(1+rho_M^2))^((n-2)/2) between
    dbar^E + dbar^((n-2)/2) and 2 dbar^E, with dbar = delta^(2/(n-2)) and
    E = (n-2)(n-2-2 alpha)/(2(n+2)); the geometric midpoint maximizes margin.
    Raises NoSolution when no positive radius fits (delta too large).
    """
    d = as_dim(n)
    if not 0 < delta < 1:
        raise ValueError("need delta in (0, 1)")
    if alpha <= 0 or 2.0 * (1.0 + alpha) >= d.n:
        raise ValueError("need alpha > 0 with 2(1 + alpha) < n")
    dbar = delta ** (2.0 / (d.n - 2))
    expo = (d.n - 2) * (d.n - 2 - 2.0 * alpha) / (2.0 * (d.n + 2))
    lo = dbar**expo + dbar ** ((d.n - 2) / 2)
    hi = 2.0 * dbar**expo
    if not lo < hi:
        raise NoSolution("admissible band is empty")
    mid = math.sqrt(lo * hi)
    base = mid ** (2.0 / (d.n - 2))  # 1/(1 + rho_M^2)
    if base >= 1.0:
        raise NoSolution("delta too large: no positive cut radius fits the band")
    rho_m_big = math.sqrt(1.0 / base - 1.0)
    return RhoMSolution(rho_m_big=rho_m_big, delta_bar=dbar, alpha=alpha,
                        n=d.n, band_lo=lo, band_hi=hi)


class GlueConfig:
    """Validated parameters for one of the three glue constructions."""

    def __init__(self, variant: str, **params):
        self.variant = variant
        self.params = params

    def __repr__(self):
        return f"GlueConfig({self.variant!r}, {self.params!r})"

    @classmethod
    def concentric(cls, b1: Bubble, b2: Bubble, rho: float, R: float) -> "GlueConfig":
        if b1.n != b2.n:
            raise BadConfig("bubbles live in different dimensions")
        if np.any(b1.center != 0.0) or np.any(b2.center != 0.0):
            raise BadConfig("concentric glue needs both bubbles centered at the origin")
        if not 0 < rho < R:
            raise BadConfig("need 0 < rho < R")
        return cls("concentric", b1=b1, b2=b2, rho=float(rho), R=float(R))

    @classmethod
    def disjoint(cls, b1: Bubble, r1: float, b2: Bubble, a: float,
                 width1: float = 1.0, width2: float = 1.0,
                 inward: bool = False) -> "GlueConfig":
        """Two-ball splice keeping b1 on B(xi1, r1) and b2 on B(xi2, a).

        Transitions span [r, (1+width) r] outside each ball by default;
        ``inward=True`` moves them to [(1-width) r, r], shrinking the exact
        region but allowing tangent fidelity balls.
        """
        if b1.n != b2.n:
            raise BadConfig("bubbles live in different dimensions")
        if min(r1, a) <= 0 or min(width1, width2) <= 0:
            raise BadConfig("radii and widths must be positive")
        if inward and max(width1, width2) >= 1.0:
            raise BadConfig("inward widths must be < 1")
        sep = float(np.linalg.norm(b1.center - b2.center))
        if sep < r1 + a:
            raise OverlapError("fidelity balls overlap")
        out1 = r1 if inward else r1 * (1.0 + width1)
        out2 = a if inward else a * (1.0 + width2)
        if sep < out1 + out2:
            raise OverlapError("cutoff supports intersect; shrink widths or use inward")
        return cls("disjoint", b1=b1, r1=float(r1), b2=b2, a=float(a),
                   width1=float(width1), width2=float(width2), inward=bool(inward))

    @classmethod
    def bubble_insert(cls, host: ScalarField, bubble: Bubble, x1,
                      rho_M: float, rho_m: float | None = None) -> "GlueConfig":
        """Insert an exact bubble into the host across [lam rho_m, lam rho_M].

        rho_m defaults to rho_M - 10 when that is positive (the wide-annulus
        regime) and to 0.8 rho_M otherwise.
        """
        if host.n != bubble.n:
            raise BadConfig("host and bubble live in different dimensions")
        if np.any(bubble.center != 0.0):
            raise BadConfig("inserted bubble must be centered at the origin")
        if rho_M <= 0:
            raise BadConfig("need rho_M > 0")
        if rho_m is None:
            rho_m = rho_M - 10.0 if rho_M > 10.0 else 0.8 * rho_M
        if not 0 < rho_m < rho_M:
            raise BadConfig("need 0 < rho_m < rho_M")
        x1 = np.zeros(host.n) + np.asarray(x1, float)
        return cls("bubble-insert", host=host, bubble=bubble, x1=x1,
                   rho_m=float(rho_m), rho_M=float(rho_M))


class ConcentricGlueField(RadialField):
    """phi u1 + (1 - phi) u2 for centered bubbles; exact bubble on each side."""

    def __init__(self, b1: Bubble, b2: Bubble, rho: float, R: float):
        super().__init__(b1.n, None)
        self.b1, self.b2 = b1, b2
        self.cut = make_cutoff(rho, R)
        self.fd_scale = min(b1.lam, b2.lam, R - rho)
        self.inv_decay_coeff = b2.inv_decay_coeff

    def __repr__(self):
        return (f"ConcentricGlueField(lam1={self.b1.lam!r}, lam2={self.b2.lam!r}, "
                f"rho={self.cut.r_in!r}, R={self.cut.r_out!r})")

    def value_r(self, r):
        p = self.cut.phi(r)
        return p * self.b1.value_r(r) + (1.0 - p) * self.b2.value_r(r)

    def dvalue_r(self, r):
        p, dp = self.cut.phi(r), self.cut.dphi(r)
        return (dp * (self.b1.value_r(r) - self.b2.value_r(r))
                + p * self.b1.dvalue_r(r) + (1.0 - p) * self.b2.dvalue_r(r))

    def d2value_r(self, r):
        p, dp, d2p = self.cut.phi(r), self.cut.dphi(r), self.cut.d2phi(r)
        return (d2p * (self.b1.value_r(r) - self.b2.value_r(r))
                + 2.0 * dp * (self.b1.dvalue_r(r) - self.b2.dvalue_r(r))
                + p * self.b1.d2value_r(r) + (1.0 - p) * self.b2.d2value_r(r))


def _radial_lap_weight(cut: Cutoff, s, n: int):
    """lap of the radial function phi(|x - c|): phi'' + (n-1) phi'/s."""
    safe = np.where(s == 0.0, 1.0, s)
    return cut.d2phi(s) + (n - 1) * cut.dphi(s) / safe


class DisjointGlueField(ScalarField):
    """(1 - phi2(|x - xi2|)) u1 + (1 - phi1(|x - xi1|)) u2.

    Each cutoff is 1 on its own fidelity ball, so u1 survives alone near
    xi1, u2 near xi2, and their sum takes over once both cutoffs vanish.
    Positivity is structural: the cutoff supports are disjoint.
    """

    def __init__(self, cfg: GlueConfig):
        p = cfg.params
        self.b1: Bubble = p["b1"]
        self.b2: Bubble = p["b2"]
        self.n = self.b1.n
        r1, a, w1, w2, inward = p["r1"], p["a"], p["width1"], p["width2"], p["inward"]
        if inward:
            self.cut1 = make_cutoff(r1 * (1.0 - w1), r1)
            self.cut2 = make_cutoff(a * (1.0 - w2), a)
        else:
            self.cut1 = make_cutoff(r1, r1 * (1.0 + w1))
            self.cut2 = make_cutoff(a, a * (1.0 + w2))
        self.r1, self.a = r1, a
        self.inward = inward
        self.radial = False
        self.inv_decay_coeff = self.b1.inv_decay_coeff + self.b2.inv_decay_coeff
        self.fd_scale = min(self.b1.lam, self.b2.lam, self.cut1.width, self.cut2.width)

    def __repr__(self):
        return f"DisjointGlueField(b1={self.b1!r}, b2={self.b2!r}, inward={self.inward})"

    def exact_radius(self, which: int) -> float:
        """Radius of the ball on which the field equals bubble `which` exactly."""
        return (self.cut1 if which == 1 else self.cut2).r_in

    def _dists(self, x):
        arr, single = _prep(x, self.n)
        d1 = arr - self.b1.center
        d2 = arr - self.b2.center
        s1 = np.linalg.norm(d1, axis=-1)
        s2 = np.linalg.norm(d2, axis=-1)
        return arr, d1, d2, s1, s2, single

    def value(self, x):
        arr, _, _, s1, s2, single = self._dists(x)
        out = ((1.0 - self.cut2.phi(s2)) * self.b1.value(arr)
               + (1.0 - self.cut1.phi(s1)) * self.b2.value(arr))
        return _out(out, single)

    def gradient(self, x):
        arr, d1, d2, s1, s2, single = self._dists(x)
        s1s = np.where(s1 == 0.0, 1.0, s1)
        s2s = np.where(s2 == 0.0, 1.0, s2)
        g = ((1.0 - self.cut2.phi(s2))[..., None] * np.asarray(self.b1.gradient(arr))
             - (self.cut2.dphi(s2) / s2s * self.b1.value(arr))[..., None] * d2
             + (1.0 - self.cut1.phi(s1))[..., None] * np.asarray(self.b2.gradient(arr))
             - (self.cut1.dphi(s1) / s1s * self.b2.value(arr))[..., None] * d1)
        return g.reshape(self.n) if single else g

    def laplacian(self, x):
        arr, d1, d2, s1, s2, single = self._dists(x)
        s1s = np.where(s1 == 0.0, 1.0, s1)
        s2s = np.where(s2 == 0.0, 1.0, s2)
        g1 = np.asarray(self.b1.gradient(arr))
        g2 = np.asarray(self.b2.gradient(arr))
        lap = ((1.0 - self.cut2.phi(s2)) * self.b1.laplacian(arr)
               - 2.0 * self.cut2.dphi(s2) * np.sum(d2 * g1, axis=-1) / s2s
               - _radial_lap_weight(self.cut2, s2, self.n) * self.b1.value(arr)
               + (1.0 - self.cut1.phi(s1)) * self.b2.laplacian(arr)
               - 2.0 * self.cut1.dphi(s1) * np.sum(d1 * g2, axis=-1) / s1s
               - _radial_lap_weight(self.cut1, s1, self.n) * self.b2.value(arr))
        return _out(lap, single)


class InsertGlueField(ScalarField):
    """phi(|x|) bubble(x) + (1 - phi(|x|)) host(x1 + x), in bubble coordinates."""

    def __init__(self, cfg: GlueConfig):
        p = cfg.params
        self.host: ScalarField = p["host"]
        self.bubble: Bubble = p["bubble"]
        self.x1 = p["x1"]
        self.n = self.bubble.n
        lam = self.bubble.lam
        self.cut = make_cutoff(lam * p["rho_m"], lam * p["rho_M"])
        self.rho_m, self.rho_M = p["rho_m"], p["rho_M"]
        self.radial = self.host.radial and bool(np.all(self.x1 == 0.0))
        self.fd_scale = min(self.bubble.fd_scale, self.host.fd_scale, self.cut.width)
        self.inv_decay_coeff = self.host.inv_decay_coeff

    def __repr__(self):
        return (f"InsertGlueField(lam={self.bubble.lam!r}, rho_m={self.rho_m!r}, "
                f"rho_M={self.rho_M!r})")

    def _parts(self, x):
        arr, single = _prep(x, self.n)
        s = np.linalg.norm(arr, axis=-1)
        return arr, s, single

    def value(self, x):
        arr, s, single = self._parts(x)
        p = self.cut.phi(s)
        out = p * self.bubble.value(arr) + (1.0 - p) * self.host.value(self.x1 + arr)
        return _out(out, single)

    def gradient(self, x):
        arr, s, single = self._parts(x)
        p = self.cut.phi(s)
        ss = np.where(s == 0.0, 1.0, s)
        diff = self.bubble.value(arr) - self.host.value(self.x1 + arr)
        g = (p[..., None] * np.asarray(self.bubble.gradient(arr))
             + (1.0 - p)[..., None] * np.asarray(self.host.gradient(self.x1 + arr))
             + (self.cut.dphi(s) * diff / ss)[..., None] * arr)
        return g.reshape(self.n) if single else g

    def laplacian(self, x):
        arr, s, single = self._parts(x)
        p = self.cut.phi(s)
        ss = np.where(s == 0.0, 1.0, s)
        diff = self.bubble.value(arr) - self.host.value(self.x1 + arr)
        gdiff = np.asarray(self.bubble.gradient(arr)) - np.asarray(
            self.host.gradient(self.x1 + arr)
        )
        lap = (p * self.bubble.laplacian(arr)
               + (1.0 - p) * self.host.laplacian(self.x1 + arr)
               + 2.0 * self.cut.dphi(s) * np.sum(arr * gdiff, axis=-1) / ss
               + _radial_lap_weight(self.cut, s, self.n) * diff)
        return _out(lap, single)


def glue_concentric(cfg: GlueConfig) -> ConcentricGlueField:
    """Radial interpolation between two centered bubbles across [rho, R]."""
    if cfg.variant != "concentric":
        raise BadConfig(f"expected a concentric config, got {cfg.variant!r}")
    p = cfg.params
    return ConcentricGlueField(p["b1"], p["b2"], p["rho"], p["R"])


def glue_disjoint(cfg: GlueConfig) -> DisjointGlueField:
    """Two-ball splice of two bubbles with disjoint cutoff supports."""
    if cfg.variant != "disjoint":
        raise BadConfig(f"expected a disjoint config, got {cfg.variant!r}")
    return DisjointGlueField(cfg)


def glue_bubble_into(cfg: GlueConfig) -> InsertGlueField:
    """Replace the host by an exact bubble inside |x| < lam rho_m."""
    if cfg.variant != "bubble-insert":
        raise BadConfig(f"expected a bubble-insert config, got {cfg.variant!r}")
    return InsertGlueField(cfg)


def kg_deviation(f: ScalarField, region: Region, grid_spec: GridSpec | None = None) -> KReport:
    """Grid scan of |K - 1| over a transition region, with refinement."""
    return sup_scan(f, region, grid_spec)


def insert_annulus(w: InsertGlueField) -> Annulus:
    """The transition annulus of a bubble-insert field."""
    lam = w.bubble.lam
    return Annulus(np.zeros(w.n), lam * w.rho_m, lam * w.rho_M)
