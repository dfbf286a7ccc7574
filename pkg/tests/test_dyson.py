"""Dyson and killed normalizations of the alternating kernels."""

import math

import numpy as np
import pytest

from weylkern import (
    DomainError,
    build_root_system,
    dyson_exit_normalized,
    dyson_heat,
    dyson_heat_normalized,
    dyson_mass,
    dyson_newton,
    dyson_poisson,
    killed_heat,
    killed_poisson,
    newton_time_integral,
    pi_over,
    semigroup_defect,
    spec_from_name,
)
from weylkern.dyson import dyson_drift_np

B1 = build_root_system(spec_from_name("B1"))
B2 = build_root_system(spec_from_name("B2"))
A2 = build_root_system(spec_from_name("A2"))
A3 = build_root_system(spec_from_name("A3"))


def rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def g1(u, t):
    return math.exp(-u * u / (4 * t)) / math.sqrt(4 * math.pi * t)


# ---------------------------------------------------------------------------
# rank one, where everything is elementary


def test_killed_heat_b1_is_reflection_difference():
    x, y, t = 0.8, 0.3, 0.2
    got = killed_heat(B1, [x], [y], t)
    assert rel(got.value, g1(x - y, t) - g1(x + y, t)) < 1e-13
    assert got.details["normalization"] == "killed"


@pytest.mark.parametrize("x", [0.2, 0.5, 0.8])
def test_killed_poisson_b1_is_gamblers_ruin(x):
    # mass of the defective exit law equals the reach-the-sphere probability
    assert rel(killed_poisson(B1, [x], [1.0]).value, x) < 1e-13


@pytest.mark.parametrize("x", [0.1 * k for k in range(1, 10)])
def test_dyson_poisson_b1_is_one(x):
    assert rel(dyson_poisson(B1, [x], [1.0]).value, 1.0) < 1e-12


# ---------------------------------------------------------------------------
# normalization relations


def test_dyson_vs_killed_scaling():
    x, y, t = (0.9, 0.4), (0.7, 0.2), 0.3
    k = killed_heat(B2, x, y, t).value
    d = dyson_heat(B2, x, y, t).value
    ratio = float(pi_over(B2, y)) / float(pi_over(B2, x))
    assert rel(d, k * ratio) < 1e-13


def test_killed_heat_symmetric():
    a = killed_heat(B2, (0.9, 0.4), (0.7, 0.2), 0.3).value
    b = killed_heat(B2, (0.7, 0.2), (0.9, 0.4), 0.3).value
    assert rel(a, b) < 1e-12


def test_determinant_route_agrees():
    x = (1.2, 0.3, -0.4, -1.1)
    y = (0.9, 0.2, -0.2, -0.9)
    a = killed_heat(A3, x, y, 0.1)
    b = killed_heat(A3, x, y, 0.1, method="det")
    assert b.method == "determinant"
    assert rel(a.value, b.value) < 1e-11


def test_dyson_density_vanishes_on_walls():
    v = dyson_heat(B2, (0.9, 0.4), (0.5, 0.5), 0.3)
    assert v.value == 0.0 and v.method == "wall"
    assert dyson_poisson(B2, (0.5, 0.2), (1.0, 0.0)).value == 0.0
    assert dyson_newton(A3, (1.5, 0.5, -0.5, -1.5), (1.0, 0.0, 0.0, -1.0)).value == 0.0


def test_normalized_evaluators_match_at_regular_points():
    x, y0 = (0.5, 0.2), (0.8, 0.6)
    assert rel(dyson_exit_normalized(B2, x, y0).value,
               dyson_poisson(B2, x, y0).value) < 1e-12
    x, y, t = (0.9, 0.4), (0.7, 0.2), 0.3
    piy2 = float(pi_over(B2, y)) ** 2
    assert rel(dyson_heat_normalized(B2, x, y, t).value * piy2,
               dyson_heat(B2, x, y, t).value) < 1e-13


def test_normalized_evaluators_continuous_on_walls():
    """The pi''-scaled quantities stay finite and positive where pi dies."""
    v = dyson_exit_normalized(B2, (0.5, 0.2), (1.0, 0.0))
    assert math.isfinite(v.value) and v.value > 0
    h = dyson_heat_normalized(B2, (0.9, 0.4), (0.5, 0.5), 0.3)
    assert math.isfinite(h.value) and h.value > 0
    assert h.method in ("spherical", "extrapolated")


def test_dyson_newton_scaling():
    x = (1.5, 0.5, -0.5, -1.5)
    y = (1.0, 0.3, -0.3, -1.0)
    from weylkern import kernel_w
    base = kernel_w(A3, "newton", x, y).value
    got = dyson_newton(A3, x, y).value
    assert rel(got, 24 * float(pi_over(A3, y)) ** 2 * base) < 1e-13


# ---------------------------------------------------------------------------
# conservation and the semigroup


def test_dyson_mass_is_one():
    assert abs(dyson_mass(B1, (0.7,), 0.25, n=32) - 1.0) < 1e-10
    assert abs(dyson_mass(B2, (0.9, 0.4), 0.25, n=32) - 1.0) < 1e-9


def test_chapman_kolmogorov():
    quad, direct = semigroup_defect(B2, (0.9, 0.4), (0.7, 0.2), 0.1, 0.15, n=32)
    assert rel(quad, direct) < 1e-9


def test_drift_field():
    drift = dyson_drift_np(B2)
    pts = np.array([[0.9, 0.4], [2.0, 1.0]])
    out = drift(pts)
    for p, d in zip(pts, out):
        want = np.zeros(2)
        for a in B2.positive_roots:
            av = np.array([float(c) for c in a])
            want += 2.0 * av / (p @ av)
        assert np.allclose(d, want, atol=1e-13)


# ---------------------------------------------------------------------------
# potential kernel as a time integral


def test_newton_time_integral_a3():
    rep = newton_time_integral(A3, (1.5, 0.5, -0.5, -1.5), (1.0, 0.3, -0.3, -1.0))
    assert rep.consistent
    assert rep.defect / abs(rep.target) < 1e-6
    assert rep.tail_bound < 1e-12
    assert rep.evaluations > 0


def test_newton_time_integral_domain():
    with pytest.raises(DomainError):
        newton_time_integral(B2, (0.9, 0.4), (0.7, 0.2))  # intrinsic d = 2
    with pytest.raises(DomainError):
        newton_time_integral(A3, (1.0, 1.0, -0.5, -1.5), (1.0, 0.3, -0.3, -1.0))
