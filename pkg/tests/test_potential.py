"""Kernel evaluation, singular quadrature and representation identities."""

import math

import numpy as np
import pytest

from bubbleforge import (
    Ball,
    Bubble,
    CallableRadialField,
    GlueConfig,
    Kernel,
    SingularProfile,
    glue_concentric,
    h_eval,
    int_absH_annulus,
    int_absH_ball,
    lower_bound_3_9,
    rep_formula_report,
    rep_formula_singular,
    rep_identity_report,
    rep_identity_residual,
    sup_scan,
    unit_sphere_area,
    weighted_grad_integral,
)
from bubbleforge.errors import BadRadii, Coincident, ProfileViolated
from bubbleforge.potential import sphere_rule


def _ball_mass_closed_form(R, s, n):
    # shell-theorem reduction of the kernel mass: R^2/(2(n-2)) - s^2/(2n)
    return R * R / (2 * (n - 2)) - s * s / (2 * n)


def test_unit_sphere_areas():
    assert unit_sphere_area(3) == pytest.approx(4 * math.pi, rel=1e-14)
    assert unit_sphere_area(4) == pytest.approx(2 * math.pi**2, rel=1e-14)


def test_sphere_rule_weights_sum_to_area():
    for n in (3, 4, 5, 6):
        _, w = sphere_rule(n, 12)
        assert np.sum(w) == pytest.approx(unit_sphere_area(n), rel=1e-12)


def test_kernel_value_n3():
    k = Kernel(3)
    assert h_eval(k, [1, 0, 0], [0, 0, 0]) == pytest.approx(-1 / (4 * math.pi),
                                                            rel=1e-14)


def test_kernel_value_n4():
    k = Kernel(4)
    assert h_eval(k, [1, 0, 0, 0], np.zeros(4)) == pytest.approx(
        -1 / (4 * math.pi**2), rel=1e-14)


def test_kernel_scaling_homogeneity(rng):
    k = Kernel(5)
    xi = rng.normal(size=5)
    d = rng.normal(size=5)
    d /= np.linalg.norm(d)
    r = 0.7
    assert h_eval(k, xi + 2 * r * d, xi) == pytest.approx(
        h_eval(k, xi + r * d, xi) / 2 ** (5 - 2), rel=1e-13)


def test_kernel_rejects_coincident_points():
    with pytest.raises(Coincident):
        h_eval(Kernel(3), [1, 2, 3], [1, 2, 3])


def test_ball_mass_centered():
    q3 = int_absH_ball(Kernel(3), 1.0, np.zeros(3))
    assert q3.value == pytest.approx(0.5, abs=1e-6)
    q4 = int_absH_ball(Kernel(4), 1.0, np.zeros(4))
    assert q4.value == pytest.approx(0.25, abs=1e-6)


def test_ball_mass_off_center_strictly_below_cap():
    q = int_absH_ball(Kernel(3), 1.0, [0.5, 0, 0])
    cap = 0.5
    assert q.value < cap
    assert cap - q.value > q.err_est
    assert q.value == pytest.approx(_ball_mass_closed_form(1.0, 0.5, 3), abs=1e-6)


def test_ball_mass_random_inputs_bounded(rng):
    # the cap R^2/(2(n-2)) holds for every interior source point, with
    # equality only at the center
    for _ in range(50):
        n = int(rng.integers(3, 7))
        R = float(rng.uniform(0.5, 3.0))
        s = float(rng.uniform(0.05, 0.95)) * R
        xi = np.zeros(n)
        xi[0] = s
        q = int_absH_ball(Kernel(n), R, xi)
        cap = R * R / (2 * (n - 2))
        assert q.value <= cap + q.err_est + 1e-12
        assert cap - q.value > q.err_est
        assert q.value == pytest.approx(_ball_mass_closed_form(R, s, n),
                                        rel=1e-9)


def test_ball_mass_reflection_comparison(rng):
    # mass over the source-centered ball (closed form) dominates the mass
    # over the origin-centered ball for any off-center source
    for _ in range(10):
        n = int(rng.integers(3, 6))
        R = float(rng.uniform(0.5, 2.0))
        xi = np.zeros(n)
        xi[0] = 0.4 * R
        centered_mass = R * R / (2 * (n - 2))
        assert centered_mass >= int_absH_ball(Kernel(n), R, xi).value


def test_annulus_mass_values():
    q = int_absH_annulus(Kernel(3), 1.0, 10.0)
    assert q.value == pytest.approx(49.5, abs=1e-4)
    q6 = int_absH_annulus(Kernel(6), 1.0, 2.0)
    assert q6.value == pytest.approx(0.375, abs=1e-6)


def test_annulus_mass_degenerates_to_zero():
    q = int_absH_annulus(Kernel(3), 1.0, 1.0 + 1e-9)
    assert abs(q.value) < 1e-8


def test_annulus_mass_matches_closed_form(rng):
    for _ in range(10):
        n = int(rng.integers(3, 7))
        rho = float(rng.uniform(0.1, 1.0))
        R = rho + float(rng.uniform(0.1, 3.0))
        q = int_absH_annulus(Kernel(n), rho, R)
        assert q.value == pytest.approx((R * R - rho * rho) / (2 * (n - 2)),
                                        rel=1e-6)


def test_annulus_rejects_bad_radii():
    with pytest.raises(BadRadii):
        int_absH_annulus(Kernel(3), 2.0, 1.0)


def test_weighted_grad_integral_centered_bubble():
    q = weighted_grad_integral(Kernel(3), Bubble(1.0, np.zeros(3), 3),
                               Ball(np.zeros(3), 1.0), np.zeros(3))
    assert q.value == pytest.approx(1.0, abs=1e-5)


def test_weighted_grad_integral_closed_form_random(rng):
    # radial reduction gives R^4/((n-2) lam^2) exactly
    for _ in range(6):
        n = int(rng.integers(3, 6))
        lam = float(rng.uniform(0.5, 2.0))
        R = float(rng.uniform(0.5, 2.0))
        q = weighted_grad_integral(Kernel(n), Bubble(lam, np.zeros(n), n),
                                   Ball(np.zeros(n), R), np.zeros(n))
        assert q.value == pytest.approx(R**4 / ((n - 2) * lam**2), rel=1e-9)


def test_weighted_grad_integral_shrinking_region():
    q = weighted_grad_integral(Kernel(3), Bubble(1.0, np.zeros(3), 3),
                               Ball(np.zeros(3), 1e-4), np.zeros(3))
    assert abs(q.value) < 1e-12


def test_weighted_grad_integral_scale_quartering():
    k = Kernel(3)
    ball = Ball(np.zeros(3), 1.0)
    v1 = weighted_grad_integral(k, Bubble(1.0, np.zeros(3), 3), ball, np.zeros(3)).value
    v2 = weighted_grad_integral(k, Bubble(2.0, np.zeros(3), 3), ball, np.zeros(3)).value
    assert v2 == pytest.approx(v1 / 4.0, rel=1e-9)


def test_weighted_grad_integral_generic_path_agrees_with_radial():
    # a barely off-center bubble forces the product-rule path; it must agree
    # with the radial reduction of the centered one
    k = Kernel(3)
    ball = Ball(np.zeros(3), 1.0)
    radial = weighted_grad_integral(k, Bubble(1.0, np.zeros(3), 3), ball,
                                    np.zeros(3)).value
    generic = weighted_grad_integral(k, Bubble(1.0, [1e-12, 0, 0], 3), ball,
                                     np.zeros(3)).value
    assert generic == pytest.approx(radial, rel=1e-8)


# --- representation identity -----------------------------------------------------


def _acceptance_glue(n=3):
    b1 = Bubble(0.0099, np.zeros(n), n)
    b2 = Bubble(1.0, np.zeros(n), n)
    return glue_concentric(GlueConfig.concentric(b1, b2, 1.0, 10.0)), b2


def test_rep_identity_trivial_glue():
    b = Bubble(1.0, np.zeros(3), 3)
    rep = rep_identity_report(b, b, Ball(np.zeros(3), 2.0), [0.3, 0, 0])
    assert abs(rep["lhs"]) < 1e-6
    assert abs(rep["rhs"]) < 1e-6
    assert abs(rep["residual"]) < 1e-6


def test_rep_identity_identical_scales_different_radii():
    b = Bubble(1.0, np.zeros(3), 3)
    u = glue_concentric(GlueConfig.concentric(Bubble(1.0, np.zeros(3), 3), b,
                                              0.5, 2.0))
    res = rep_identity_residual(u, b, Ball(np.zeros(3), 3.0), np.zeros(3))
    assert abs(res) < 1e-6


def test_rep_identity_deep_concentric_config():
    u_c, u2 = _acceptance_glue()
    rep = rep_identity_report(u_c, u2, Ball(np.zeros(3), 10.0), np.zeros(3))
    scale = max(abs(rep["lhs"]), abs(rep["rhs"]))
    assert scale > 1.0  # both sides carry the configuration's mass
    assert abs(rep["residual"]) <= 1e-3 * scale


def test_rep_identity_off_center_source_point():
    u_c, u2 = _acceptance_glue()
    rep = rep_identity_report(u_c, u2, Ball(np.zeros(3), 10.0), [0.4, 0, 0])
    scale = max(abs(rep["lhs"]), abs(rep["rhs"]))
    assert abs(rep["residual"]) <= 1e-3 * scale


def test_rep_bound_is_cleared_by_scan():
    u_c, u2 = _acceptance_glue()
    bound = lower_bound_3_9(u_c, u2, Ball(np.zeros(3), 10.0), np.zeros(3))
    rep = sup_scan(u_c, Ball(np.zeros(3), 10.0))
    assert rep.sup_abs_dev >= bound - 1e-6


# --- representation formula with a point singularity -------------------------------


def _singular_power_field(n=3, nut=0.5):
    beta = 2.0 - n + nut
    return CallableRadialField(
        n,
        lambda r: r**beta,
        lambda r: beta * r ** (beta - 1),
        lambda r: beta * (beta - 1) * r ** (beta - 2),
        punctured=(tuple(np.zeros(n)),),
    ), beta


def test_rep_formula_classical_bubble():
    b = Bubble(1.0, [0.1, 0, 0], 3)
    res = rep_formula_singular(b, None, Ball(np.zeros(3), 1.5), [0.4, 0.2, 0])
    assert abs(res) <= 1e-6


def test_rep_formula_singular_convergence():
    u, beta = _singular_power_field()
    nut = 0.5
    prof = SingularProfile(p=np.zeros(3), mu=1 - nut, nu=nut,
                           c1=abs(beta * nut) * 1.01, c2=abs(beta) * 1.01,
                           delta=0.3)
    rep = rep_formula_report(u, prof, Ball(np.zeros(3), 1.5), [0.5, 0, 0])
    res = [abs(r) for r in rep["residuals"]]
    assert res[0] > res[1] > res[2]
    assert rep["order"] >= nut - 0.05
    assert abs(rep["extrapolated"]) <= 1e-4


def test_rep_formula_singular_boundary_term_scaling():
    u, beta = _singular_power_field()
    nut = 0.5
    prof = SingularProfile(p=np.zeros(3), mu=1 - nut, nu=nut,
                           c1=abs(beta * nut) * 1.01, c2=abs(beta) * 1.01,
                           delta=0.3)
    rep = rep_formula_report(u, prof, Ball(np.zeros(3), 1.5), [0.5, 0, 0])
    terms = [abs(t) for t in rep["p_boundary_terms"]]
    eps = rep["eps"]
    for i in range(len(eps) - 1):
        expected = (eps[i] / eps[i + 1]) ** nut
        ratio = terms[i] / terms[i + 1]
        assert expected / 2 <= ratio <= expected * 2


def test_rep_formula_rejects_violated_profile():
    u, beta = _singular_power_field()
    bad = SingularProfile(p=np.zeros(3), mu=0.5, nu=0.5,
                          c1=abs(beta * 0.5) * 1e-3, c2=abs(beta), delta=0.3)
    with pytest.raises(ProfileViolated):
        rep_formula_singular(u, bad, Ball(np.zeros(3), 1.5), [0.5, 0, 0])
