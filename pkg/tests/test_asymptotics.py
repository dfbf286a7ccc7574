"""Limit laws: exact constants, model semantics, spot numeric ratios."""

import math
from fractions import Fraction as Q

import pytest

from weylkern import (
    AsymptoticForm,
    DomainError,
    at_zero,
    build_root_system,
    c_constant,
    dyson_exit_law,
    dyson_heat_law,
    heat_small_t,
    newton_asym,
    normalization_identity,
    pi_over,
    poisson_boundary_asym,
    spec_from_name,
    spherical_asym,
    spherical_psi,
)
from weylkern.asymptotics import pochhammer, spherical_limit_constant

B1 = build_root_system(spec_from_name("B1"))
B2 = build_root_system(spec_from_name("B2"))
A3 = build_root_system(spec_from_name("A3"))
G2 = build_root_system(spec_from_name("G2"))

OMEGA1_G2 = (Q(2, 3), Q(1, 3), Q(1, 3))
OMEGA2_G2 = (Q(1), Q(1), Q(0))


def rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def test_pochhammer():
    assert pochhammer(Q(1, 2), 3) == Q(15, 8)
    assert pochhammer(Q(3), 0) == 1
    assert abs(pochhammer(0.5, 3) - 15 / 8) < 1e-15


NORMALIZATION_SYSTEMS = (
    [f"A{n}" for n in range(1, 7)] + [f"B{n}" for n in range(1, 7)]
    + [f"C{n}" for n in range(2, 7)] + [f"D{n}" for n in range(2, 7)]
    + ["G2", "F4"]
)


@pytest.mark.parametrize("name", NORMALIZATION_SYSTEMS)
def test_normalization_identity_exact(name):
    rs = build_root_system(spec_from_name(name))
    lhs, rhs = normalization_identity(rs)
    assert lhs == rhs
    assert lhs == c_constant(rs)  # same quantity, third route


# ---------------------------------------------------------------------------
# spherical ray law


def test_spherical_constant_b2():
    D, m, mp_ = spherical_limit_constant(B2, (1, 1), (1, 0))
    assert (D, m, mp_) == (Q(3, 2), 2, 2)


def test_spherical_constant_g2():
    D, m, mp_ = spherical_limit_constant(G2, OMEGA1_G2, OMEGA2_G2)
    assert (D, m, mp_) == (Q(30), 4, 2)


def test_spherical_constant_symmetric():
    a = spherical_limit_constant(B2, (1, 1), (1, 0))
    b = spherical_limit_constant(B2, (1, 0), (1, 1))
    assert a == b


def test_spherical_regular_pair_reduces_to_vandermonde():
    lam, y = (3, 1), (2, 1)
    D, m, mp_ = spherical_limit_constant(B2, lam, y)
    assert (m, mp_) == (4, 0)
    want = pi_over(B2, B2.rho) / (16 * pi_over(B2, lam) * pi_over(B2, y))
    assert D == want


def test_spherical_ray_numeric():
    """psi along the singular B2 ray approaches its stated model."""
    form = spherical_asym(B2, (1, 1), (1, 0))
    assert form.rate == 1.0 and form.power == Q(-2)
    devs = []
    for t in (100.0, 200.0):
        psi = spherical_psi(B2, (1, 1), (t, 0), precision=300)
        devs.append(abs(float(psi) / form.evaluate(t) - 1.0))
    assert devs[1] < devs[0] and devs[1] < 0.01


# ---------------------------------------------------------------------------
# boundary and blowup laws, frozen exact constants


def test_poisson_wall_constant_b2():
    form = poisson_boundary_asym(B2, (1, 0))
    assert rel(form.constant, 1 / (4 * math.pi)) < 1e-15
    assert form.power == Q(-4)
    assert form.details["gamma_prime"] == 1


def test_newton_origin_b2_exact_global_law():
    form = newton_asym(B2, (0, 0))
    assert rel(form.constant, -2 / math.pi) < 1e-15
    assert form.power == Q(-8)
    assert form.details["exact_law"] is True


def test_newton_wall_a3():
    # one vanishing root at Y0, intrinsic dimension 3
    form = newton_asym(A3, (1, 0, 0, -1))
    assert rel(form.constant, -1 / (384 * math.pi)) < 1e-14
    assert form.power == Q(-3)


def test_newton_regular_target_a3():
    form = newton_asym(A3, (3, 1, 0, -4))
    assert form.power == Q(-1)
    assert form.details["gamma_prime"] == 0


def test_at_zero_poisson_b2():
    # independent of the boundary point
    assert rel(at_zero(B2, "poisson", (0.8, 0.6)), 16 / math.pi) < 1e-14
    assert rel(at_zero(B2, "poisson", (1.0, 0.0)), 16 / math.pi) < 1e-14


def test_at_zero_newton_b2():
    got = at_zero(B2, "newton", (0.9, 0.4))
    assert rel(got, -2 / math.pi * 0.97**-4) < 1e-12
    assert rel(got, -0.7191064528893905) < 1e-14


# ---------------------------------------------------------------------------
# Dyson-normalized laws


def test_dyson_exit_constant_drops_group_data():
    form = dyson_exit_law(B2, (1, 0))
    assert rel(form.constant, 2 / math.pi) < 1e-15
    assert form.power == Q(-4)
    assert form.details["normalization"] == "dyson"


def test_dyson_exit_regular_point_scales_poisson():
    y0 = (0.8, 0.6)
    base = poisson_boundary_asym(B2, y0)
    dy = dyson_exit_law(B2, y0)
    piy = float(pi_over(B2, y0))
    assert rel(dy.constant, 8 * piy**2 * base.constant) < 1e-13


def test_dyson_heat_is_group_order_times_killed():
    x, y = (0.9, 0.4), (0.7, 0.2)
    base = heat_small_t(B2, x, y)
    dy = dyson_heat_law(B2, x, y)
    assert rel(dy.constant, 8 * base.constant) < 1e-15
    assert dy.power == base.power and dy.rate == base.rate


def test_heat_small_t_regular_pair():
    x, y = (0.9, 0.4), (0.7, 0.2)
    form = heat_small_t(B2, x, y)
    pix, piy = float(pi_over(B2, x)), float(pi_over(B2, y))
    assert rel(form.constant, 0.25 / (8 * math.pi * pix * piy)) < 1e-13
    assert form.power == Q(-1)
    assert rel(form.rate, 0.02) < 1e-12


# ---------------------------------------------------------------------------
# model evaluation semantics


def test_evaluate_parameter_conventions():
    grow = AsymptoticForm("k", 2.0, Q(-3), 0.5, "t->inf")
    assert rel(grow.evaluate(4.0), 2.0 * 4.0**-3 * math.exp(2.0)) < 1e-15
    shrink = AsymptoticForm("k", 2.0, Q(-3), 0.5, "t->0")
    assert rel(shrink.evaluate(0.25), 2.0 * 0.25**-3 * math.exp(-2.0)) < 1e-15
    radial = AsymptoticForm("k", 2.0, Q(-3), 0.0, "|X-Y0|->0")
    assert rel(radial.evaluate(0.5), 16.0) < 1e-15


# ---------------------------------------------------------------------------
# domain validation


def test_laws_reject_non_chamber_arguments():
    bad = (0.0, 1.0)  # violates the first B2 wall
    with pytest.raises(DomainError):
        spherical_asym(B2, bad, (1, 0))
    with pytest.raises(DomainError):
        heat_small_t(B2, (1, 0.5), bad)
    with pytest.raises(DomainError):
        poisson_boundary_asym(B2, bad)
    with pytest.raises(DomainError):
        newton_asym(B2, bad)


def test_more_domain_errors():
    with pytest.raises(DomainError):
        spherical_asym(B2, (0, 0), (1, 0))
    with pytest.raises(DomainError):
        poisson_boundary_asym(B2, (0.5, 0.2))  # not on the sphere
    with pytest.raises(DomainError):
        at_zero(B2, "poisson", (0.5, 0.2))
    with pytest.raises(DomainError):
        at_zero(B2, "newton", (0, 0))
    with pytest.raises(DomainError):
        at_zero(B2, "green", (1, 0))
    with pytest.raises(DomainError):
        newton_asym(B1, (1.0,))  # intrinsic dimension 1
