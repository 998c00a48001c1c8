"""Spherical solutions, field algebra and the curvature-function evaluator.

Every field exposes value/gradient/laplacian at arbitrary points of its
regular domain, vectorized over a leading batch axis.  The curvature
function of a positive field u is

    K(x) = -lap(u)(x) / (n (n - 2) u(x)^((n+2)/(n-2))),

so exact bubbles have K identically one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonpositiveValue, KappaTooLarge
from .fd import fd_laplacian
from .regions import Region


@dataclass(frozen=True)
class Dim:
    """Ambient dimension n >= 3 and the exponents derived from it."""

    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise ValueError("dimension must be an integer >= 3")
        object.__setattr__(self, "n", int(self.n))

    @property
    def p_crit(self) -> float:
        """Critical exponent (n+2)/(n-2)."""
        return (self.n + 2) / (self.n - 2)

    @property
    def half(self) -> float:
        """Decay exponent (n-2)/2."""
        return (self.n - 2) / 2


def as_dim(n) -> Dim:
    return n if isinstance(n, Dim) else Dim(int(n))


def _prep(x, n: int):
    arr = np.asarray(x, dtype=float)
    if arr.shape[-1:] != (n,):
        raise ValueError(f"expected point(s) in R^{n}, got shape {arr.shape}")
    return arr, arr.ndim == 1


def _out(arr, single: bool):
    return float(arr) if single else arr


class ScalarField:
    """Positive field with analytic value, gradient and Laplacian.

    Attributes
    ----------
    n : ambient dimension
    radial : value depends only on |x| (about the origin)
    inv_decay_coeff : limit of |x|^(n-2) * value(x) at infinity, or None
        when the field does not decay at that rate.  A finite coefficient
        marks the field's sphere-inversion image as continuously extendable
        at the inversion center.
    fd_scale : local length scale used to pick finite-difference steps
    domain : declared regular region (None means all of R^n); points from
        ``punctured`` are additionally excluded
    """

    n: int
    radial: bool = False
    inv_decay_coeff: float | None = None
    fd_scale: float = 1.0
    domain: Region | None = None
    punctured: tuple = ()

    def value(self, x):  # pragma: no cover - interface
        raise NotImplementedError

    def gradient(self, x):  # pragma: no cover - interface
        raise NotImplementedError

    def laplacian(self, x):  # pragma: no cover - interface
        raise NotImplementedError

    @property
    def dim(self) -> Dim:
        return Dim(self.n)

    def __add__(self, other):
        if isinstance(other, ScalarField):
            return SumField(self, other)
        return NotImplemented


class RadialField(ScalarField):
    """Field whose value is a smooth profile of r = |x - center|."""

    def __init__(self, n: int, center=None):
        self.n = int(as_dim(n).n)
        self.center = np.zeros(self.n) if center is None else np.asarray(center, float)
        self.radial = bool(np.all(self.center == 0.0))

    # profile and its first two radial derivatives, vectorized over r >= 0
    def value_r(self, r):  # pragma: no cover - interface
        raise NotImplementedError

    def dvalue_r(self, r):  # pragma: no cover - interface
        raise NotImplementedError

    def d2value_r(self, r):  # pragma: no cover - interface
        raise NotImplementedError

    def _radii(self, x):
        arr, single = _prep(x, self.n)
        return arr - self.center, np.linalg.norm(arr - self.center, axis=-1), single

    def value(self, x):
        _, r, single = self._radii(x)
        return _out(self.value_r(r), single)

    def gradient(self, x):
        d, r, single = self._radii(x)
        rs = np.where(r == 0.0, 1.0, r)
        g = (self.dvalue_r(r) / rs)[..., None] * d
        g = np.where(r[..., None] == 0.0, 0.0, g)
        return g if not single else g.reshape(self.n)

    def laplacian(self, x):
        _, r, single = self._radii(x)
        rs = np.where(r == 0.0, 1.0, r)
        lap = self.d2value_r(r) + (self.n - 1) * self.dvalue_r(r) / rs
        lap = np.where(r == 0.0, self.n * self.d2value_r(r), lap)
        return _out(lap, single)


class Bubble(RadialField):
    """Spherical solution (lam / (lam^2 + |x - center|^2))^((n-2)/2)."""

    def __init__(self, lam: float, center, n: int):
        super().__init__(n, center)
        if not lam > 0:
            raise ValueError("bubble scale must be positive")
        if not np.all(np.isfinite(self.center)):
            raise ValueError("bubble center must be finite")
        self.lam = float(lam)
        self.fd_scale = self.lam
        self.inv_decay_coeff = self.lam ** ((self.n - 2) / 2)

    def __repr__(self):
        return f"Bubble(lam={self.lam!r}, center={self.center.tolist()!r}, n={self.n})"

    def value_r(self, r):
        r = np.asarray(r, float)
        return (self.lam / (self.lam**2 + r * r)) ** ((self.n - 2) / 2)

    def dvalue_r(self, r):
        r = np.asarray(r, float)
        q = (self.n - 2) / 2
        return -(self.n - 2) * r * self.lam**q * (self.lam**2 + r * r) ** (-self.n / 2)

    def d2value_r(self, r):
        r = np.asarray(r, float)
        q = (self.n - 2) / 2
        s2 = self.lam**2 + r * r
        return -(self.n - 2) * self.lam**q * s2 ** (-(self.n + 2) / 2) * (
            self.lam**2 + (1 - self.n) * r * r
        )

    def laplacian(self, x):
        # exact: lap(u) = -n(n-2) u^((n+2)/(n-2))
        arr, single = _prep(x, self.n)
        s2 = self.lam**2 + np.sum((arr - self.center) ** 2, axis=-1)
        lap = -self.n * (self.n - 2) * (self.lam / s2) ** ((self.n + 2) / 2)
        return _out(lap, single)


class BaseField(RadialField):
    """The slow-decay floor field (|x|^2 + 1)^((2-n)/4), centered at origin."""

    def __init__(self, n: int):
        super().__init__(n, None)
        self.fd_scale = 1.0

    def __repr__(self):
        return f"BaseField(n={self.n})"

    def value_r(self, r):
        r = np.asarray(r, float)
        return (1.0 + r * r) ** ((2 - self.n) / 4)

    def dvalue_r(self, r):
        r = np.asarray(r, float)
        m = (2 - self.n) / 4
        return 2 * m * r * (1.0 + r * r) ** (m - 1)

    def d2value_r(self, r):
        r = np.asarray(r, float)
        m = (2 - self.n) / 4
        w = 1.0 + r * r
        return 2 * m * w ** (m - 2) * (w + 2 * (m - 1) * r * r)

    def laplacian(self, x):
        arr, single = _prep(x, self.n)
        r2 = np.sum(arr * arr, axis=-1)
        m = (2 - self.n) / 4
        lap = ((2 - self.n) / 2) * (1.0 + r2) ** (m - 2) * (
            self.n + ((self.n - 2) / 2) * r2
        )
        return _out(lap, single)


class CallableRadialField(RadialField):
    """Radial field built from profile callables (f, f', f'')."""

    def __init__(self, n: int, f, df, d2f, center=None, fd_scale: float = 1.0,
                 inv_decay_coeff: float | None = None, domain: Region | None = None,
                 punctured: tuple = ()):
        super().__init__(n, center)
        self._f, self._df, self._d2f = f, df, d2f
        self.fd_scale = fd_scale
        self.inv_decay_coeff = inv_decay_coeff
        self.domain = domain
        self.punctured = punctured

    def value_r(self, r):
        return self._f(np.asarray(r, float))

    def dvalue_r(self, r):
        return self._df(np.asarray(r, float))

    def d2value_r(self, r):
        return self._d2f(np.asarray(r, float))


class SumField(ScalarField):
    """Pointwise sum of two fields on the same ambient space."""

    def __init__(self, f: ScalarField, g: ScalarField):
        if f.n != g.n:
            raise ValueError("summands live in different dimensions")
        self.n = f.n
        self.f, self.g = f, g
        self.radial = f.radial and g.radial
        if f.inv_decay_coeff is not None and g.inv_decay_coeff is not None:
            self.inv_decay_coeff = f.inv_decay_coeff + g.inv_decay_coeff
        self.fd_scale = min(f.fd_scale, g.fd_scale)
        self.punctured = tuple(f.punctured) + tuple(g.punctured)

    def __repr__(self):
        return f"SumField({self.f!r}, {self.g!r})"

    def value(self, x):
        return self.f.value(x) + self.g.value(x)

    def gradient(self, x):
        return self.f.gradient(x) + self.g.gradient(x)

    def laplacian(self, x):
        return self.f.laplacian(x) + self.g.laplacian(x)


@dataclass(frozen=True)
class KReport:
    """Result of a sup |K - 1| grid scan."""

    sup_abs_dev: float
    argmax: np.ndarray
    grid: dict
    n_samples: int

    def __post_init__(self):
        object.__setattr__(self, "argmax", np.asarray(self.argmax, dtype=float))


# --- operations -----------------------------------------------------------


def bubble_value(b: Bubble, x) -> float:
    """Value of a spherical solution at x."""
    return b.value(x)


def bubble_derivatives(b: Bubble, x):
    """(gradient, laplacian) of a spherical solution at x."""
    return b.gradient(x), b.laplacian(x)


def k_function(f: ScalarField, x, backend: str = "analytic", h: float | None = None):
    """Curvature function K = -lap(f) / (n(n-2) f^((n+2)/(n-2))) at x.

    backend="fd" replaces the analytic Laplacian by the central
    finite-difference stencil (cross-check oracle; single points only).
    """
    d = f.dim
    v = f.value(x)
    if np.any(np.asarray(v) <= 0.0):
        raise NonpositiveValue("field must be strictly positive where K is evaluated")
    if backend == "analytic":
        lap = f.laplacian(x)
    elif backend == "fd":
        step = h if h is not None else 1e-4 * f.fd_scale
        lap = fd_laplacian(f.value, x, step)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return -lap / (d.n * (d.n - 2) * v**d.p_crit)


def sum_field(f: ScalarField, g: ScalarField) -> SumField:
    """Pointwise sum of two fields."""
    return SumField(f, g)


def k_sum_limit(lam1: float, lam2: float, n) -> float:
    """Far-field limit of K for a sum of two bubbles with scales lam1, lam2."""
    d = as_dim(n)
    if lam1 <= 0 or lam2 <= 0:
        raise ValueError("scales must be positive")
    num = lam1 ** ((d.n + 2) / 2) + lam2 ** ((d.n + 2) / 2)
    den = (lam1 ** ((d.n - 2) / 2) + lam2 ** ((d.n - 2) / 2)) ** d.p_crit
    return num / den


def inv_root_grad_sq(f: ScalarField, x):
    """|grad(f^(-2/(n-2)))|^2 computed from analytic value and gradient."""
    d = f.dim
    v = f.value(x)
    if np.any(np.asarray(v) <= 0.0):
        raise NonpositiveValue("field must be positive")
    g = f.gradient(x)
    g2 = np.sum(np.asarray(g) ** 2, axis=-1)
    return (4.0 / (d.n - 2) ** 2) * v ** (-2.0 * d.n / (d.n - 2)) * g2


def identity_3_4_residual(f: ScalarField, x, h: float | None = None) -> float:
    """Residual of the transformed-Laplacian identity at a single point.

    Computes lap(f^(-4/(n-2)))(x) by finite differences and subtracts the
    analytic right side 4n K(x) + (n+2) |grad(f^(-2/(n-2)))(x)|^2.  The two
    agree up to the stencil error for any positive C^2 field.
    """
    d = f.dim
    v = f.value(x)
    if float(v) <= 0.0:
        raise NonpositiveValue("field must be positive")
    # the transformed field grows like |x|^4, so the stencil error is
    # roundoff-dominated for very small steps; 1e-3 * scale balances both
    step = h if h is not None else 1e-3 * f.fd_scale
    lhs = fd_laplacian(lambda y: f.value(y) ** (-4.0 / (d.n - 2)), x, step)
    rhs = 4.0 * d.n * k_function(f, x) + (d.n + 2) * inv_root_grad_sq(f, x)
    return lhs - rhs


def grad_inv_power(b: Bubble, x):
    """Closed form |grad(u^(-2/(n-2)))|^2 = 4 |x - center|^2 / lam^2 for a bubble."""
    arr, single = _prep(x, b.n)
    s2 = np.sum((arr - b.center) ** 2, axis=-1)
    return _out(4.0 * s2 / b.lam**2, single)


def base_k(x, n) -> float:
    """Curvature function of the base field at x."""
    d = as_dim(n)
    arr, single = _prep(x, d.n)
    r2 = np.sum(arr * arr, axis=-1)
    out = 0.5 * (1.0 - ((d.n + 2) / (2.0 * d.n)) * r2 / (r2 + 1.0))
    return _out(out, single)


def combined_k_bounds(kappa: float, n) -> tuple[float, float]:
    """Two-sided bounds on K of (field within kappa^2 of one) + base field."""
    d = as_dim(n)
    if kappa * kappa >= 1.0:
        raise KappaTooLarge("need kappa^2 < 1")
    k2 = kappa * kappa
    floor = min((d.n - 2) / (4.0 * d.n), 1.0 - k2)
    lo = min(1.0 - k2, floor / 2.0 ** (4.0 / (d.n - 2)))
    hi = max(1.0 + k2, 0.5)
    return lo, hi
