"""Sphere inversions and Kelvin transforms of fields.

The Kelvin transform about the sphere |x - c| = a maps a field u to

    v(x) = (a / |x - c|)^(n-2) * u(c + a^2 (x - c) / |x - c|^2),

with the exact propagation rules

    lap(v)(x) = (a / |x - c|)^(n+2) * lap(u)(T(x)),

so the curvature function composes with the inversion map.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AtCenter
from .field_core import Bubble, ScalarField, _out, _prep


@dataclass(frozen=True)
class Inversion:
    """Inversion sphere: center point and radius a > 0."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if not self.radius > 0:
            raise ValueError("inversion radius must be positive")

    @property
    def n(self) -> int:
        return self.center.shape[0]


def invert_point(inv: Inversion, x):
    """Image of x under the sphere inversion, c + a^2 (x-c)/|x-c|^2."""
    arr, single = _prep(x, inv.n)
    d = arr - inv.center
    r2 = np.sum(d * d, axis=-1, keepdims=True)
    if np.any(r2 == 0.0):
        raise AtCenter("cannot invert the center point")
    out = inv.center + inv.radius**2 * d / r2
    return out.reshape(inv.n) if single else out


class KelvinField(ScalarField):
    """Kelvin transform of a source field about an inversion sphere.

    Value at the inversion center is the continuous extension A * a^(2-n)
    when the source declares the decay coefficient A = lim |y|^(n-2) u(y);
    otherwise evaluation there raises AtCenter.  Gradient and Laplacian are
    exact chain-rule images and are only defined away from the center.
    """

    def __init__(self, src: ScalarField, inv: Inversion):
        if src.n != inv.n:
            raise ValueError("field and inversion dimensions differ")
        self.n = src.n
        self.src = src
        self.inv = inv
        self.radial = src.radial and bool(np.all(inv.center == 0.0))
        self.fd_scale = min(1.0, inv.radius)
        # image of a field regular at the center decays like |x|^(2-n)
        try:
            u_c = float(src.value(inv.center))
            self.inv_decay_coeff = inv.radius ** (self.n - 2) * u_c
        except Exception:
            self.inv_decay_coeff = None

    def __repr__(self):
        return f"KelvinField({self.src!r}, center={self.inv.center.tolist()!r}, a={self.inv.radius!r})"

    def _geom(self, x):
        arr, single = _prep(x, self.n)
        d = arr - self.inv.center
        rho2 = np.sum(d * d, axis=-1)
        return arr, d, rho2, single

    def value(self, x):
        arr, d, rho2, single = self._geom(x)
        a = self.inv.radius
        at_center = rho2 == 0.0
        if np.any(at_center):
            if self.src.inv_decay_coeff is None:
                raise AtCenter("source field declares no |y|^(2-n) decay")
            ext = self.src.inv_decay_coeff * a ** (2 - self.n)
            rho2 = np.where(at_center, 1.0, rho2)
            img = self.inv.center + a**2 * d / rho2[..., None]
            out = (a**2 / rho2) ** ((self.n - 2) / 2) * self.src.value(img)
            out = np.where(at_center, ext, out)
            return _out(out, single)
        img = self.inv.center + a**2 * d / rho2[..., None]
        out = (a**2 / rho2) ** ((self.n - 2) / 2) * self.src.value(img)
        return _out(out, single)

    def gradient(self, x):
        arr, d, rho2, single = self._geom(x)
        if np.any(rho2 == 0.0):
            raise AtCenter("gradient undefined at the inversion center")
        a = self.inv.radius
        img = self.inv.center + a**2 * d / rho2[..., None]
        u = np.asarray(self.src.value(img))
        gu = np.asarray(self.src.gradient(img))
        if gu.ndim == 1:
            gu = gu[None, :]
            u = np.atleast_1d(u)
            d2 = d[None, :] if d.ndim == 1 else d
            rho2v = np.atleast_1d(rho2)
        else:
            d2, rho2v = d, rho2
        pref = (a**2 / rho2v) ** ((self.n - 2) / 2)
        # reflection part of the inversion Jacobian: (a^2/rho^2)(I - 2 e e^T)
        dot = np.sum(d2 * gu, axis=-1, keepdims=True)
        jac_g = (a**2 / rho2v)[..., None] * (gu - 2.0 * d2 * dot / rho2v[..., None])
        grad = (
            (2 - self.n) * a ** (self.n - 2) * rho2v ** (-self.n / 2.0)
        )[..., None] * d2 * u[..., None] + pref[..., None] * jac_g
        return grad.reshape(self.n) if single else grad.reshape(arr.shape)

    def laplacian(self, x):
        arr, d, rho2, single = self._geom(x)
        if np.any(rho2 == 0.0):
            raise AtCenter("Laplacian undefined at the inversion center")
        a = self.inv.radius
        img = self.inv.center + a**2 * d / rho2[..., None]
        lap = (a**2 / rho2) ** ((self.n + 2) / 2) * self.src.laplacian(img)
        return _out(lap, single)


def kelvin_field(f: ScalarField, inv: Inversion) -> KelvinField:
    """Kelvin transform of f about the given sphere."""
    return KelvinField(f, inv)


def kelvin_bubble(b: Bubble, inv: Inversion) -> Bubble:
    """Closed-form image of a bubble under a Kelvin transform.

    With offset xi = center_b - center_inv and denominator D = lam^2 + |xi|^2:
    image scale a^2 lam / D, image center c + a^2 xi / D.  An inversion
    centered at the origin reduces to the familiar parameter law.
    """
    if b.n != inv.n:
        raise ValueError("bubble and inversion dimensions differ")
    a = inv.radius
    xi = b.center - inv.center
    den = b.lam**2 + float(np.sum(xi * xi))
    return Bubble(a**2 * b.lam / den, inv.center + a**2 * xi / den, b.n)


class _ComposedUnitField(ScalarField):
    """(xi2, a) Kelvin transform expressed through a unit-origin transform.

    The source f is interpreted as the unit-radius, origin-centered Kelvin
    transform of some underlying field; the composed field evaluates

        (a/|x - xi2|)^(n-2) * |z|^(2-n) * f(z / |z|^2),
        z = xi2 + a^2 (x - xi2)/|x - xi2|^2,

    directly from f.  Derivatives delegate to the equivalent pair of nested
    transforms.
    """

    def __init__(self, f: ScalarField, inv2: Inversion):
        self.n = f.n
        self.f = f
        self.inv2 = inv2
        self.unit = Inversion(np.zeros(self.n), 1.0)
        self._nested = KelvinField(KelvinField(f, self.unit), inv2)
        self.fd_scale = f.fd_scale

    def value(self, x):
        arr, single = _prep(x, self.n)
        a = self.inv2.radius
        d = arr - self.inv2.center
        rho2 = np.sum(d * d, axis=-1)
        if np.any(rho2 == 0.0):
            raise AtCenter("composition undefined at the outer inversion center")
        z = self.inv2.center + a**2 * d / rho2[..., None]
        z2 = np.sum(z * z, axis=-1)
        if np.any(z2 == 0.0):
            raise AtCenter("inner transform hit the origin")
        w = z / z2[..., None]
        out = (
            (a**2 / rho2) ** ((self.n - 2) / 2)
            * z2 ** (-(self.n - 2) / 2)
            * self.f.value(w)
        )
        return _out(out, single)

    def gradient(self, x):
        return self._nested.gradient(x)

    def laplacian(self, x):
        return self._nested.laplacian(x)


def lemma_5_4_compose(f: ScalarField, inv2: Inversion) -> ScalarField:
    """Re-express a unit-origin Kelvin transform as a (center, radius) one.

    f is taken to be the unit transform of an underlying field; the returned
    field is the (inv2.center, inv2.radius) transform of that same field,
    computed through f by a single composed formula.  It agrees pointwise
    with applying kelvin_field to the reconstructed underlying field.
    """
    return _ComposedUnitField(f, inv2)
