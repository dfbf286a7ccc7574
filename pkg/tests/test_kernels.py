"""Alternating-sum kernels: closed forms, cross-method agreement, domains."""

import math
from fractions import Fraction as Q

import numpy as np
import pytest

from weylkern import (
    CancellationOverflow,
    DomainError,
    build_root_system,
    c_constant,
    curved_heat,
    det_heat_a,
    enumerate_weyl,
    heat_via_spherical,
    kernel_w,
    kernel_w_batch,
    parabolic_order,
    pi_over,
    rho_of,
    spec_from_name,
    spherical_psi,
    suggest_heat_bits,
)
from weylkern.kernels import euclidean_kernel, newton_phi, surface_area
from weylkern.rootsys import pi_closure_subsets

B1 = build_root_system(spec_from_name("B1"))
B2 = build_root_system(spec_from_name("B2"))
A2 = build_root_system(spec_from_name("A2"))
G2 = build_root_system(spec_from_name("G2"))


def rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


# ---------------------------------------------------------------------------
# flat building blocks


def test_surface_area():
    assert surface_area(1) == 2.0
    assert rel(surface_area(2), 2 * math.pi) < 1e-15
    assert rel(surface_area(3), 4 * math.pi) < 1e-15
    with pytest.raises(DomainError):
        surface_area(0)


def test_newton_phi_profiles():
    assert newton_phi(1, 3.0) == -1.5
    assert rel(newton_phi(2, 2.0), math.log(2.0) / (2 * math.pi)) < 1e-15
    assert rel(newton_phi(3, 2.0), -1.0 / (8 * math.pi)) < 1e-15


def test_euclidean_heat_is_gaussian():
    v = euclidean_kernel("heat", 1, [0.3], [0.7], 0.5)
    assert rel(v, math.exp(-0.16 / 2.0) / math.sqrt(2 * math.pi)) < 1e-14


def test_euclidean_green_vanishes_on_sphere():
    # Kelvin image form is zero when the second argument reaches the boundary
    v = euclidean_kernel("green", 3, [0.2, 0.1, 0.0], [0.6, 0.8, 0.0])
    assert abs(v) < 1e-15


def test_euclidean_green_symmetric():
    a = euclidean_kernel("green", 3, [0.2, 0.1, 0.0], [0.3, -0.4, 0.1])
    b = euclidean_kernel("green", 3, [0.3, -0.4, 0.1], [0.2, 0.1, 0.0])
    assert rel(a, b) < 1e-13


# ---------------------------------------------------------------------------
# rank-one closed forms


@pytest.mark.parametrize("lam,x", [(0.7, 1.3), (2.0, 0.25), (5.5, 0.02)])
def test_psi_b1_is_sinh_quotient(lam, x):
    got = spherical_psi(B1, [lam], [x])
    assert rel(got, math.sinh(lam * x) / (lam * x)) < 1e-12


def test_psi_at_zero_is_one():
    assert spherical_psi(B1, [0], [0.5]) == 1.0
    assert spherical_psi(B2, [1, 1], [0, 0]) == 1.0


def test_heat_b1_reflection_difference():
    x, y, t = 0.8, 0.3, 0.2
    want = (euclidean_kernel("heat", 1, [x], [y], t)
            - euclidean_kernel("heat", 1, [x], [-y], t)) / (2 * x * y)
    got = kernel_w(B1, "heat", [x], [y], t)
    assert rel(got.value, want) < 1e-12


@pytest.mark.parametrize("x", [0.1 * k for k in range(1, 10)])
def test_poisson_b1_is_half(x):
    got = kernel_w(B1, "poisson", [x], [1.0])
    assert rel(got.value, 0.5) < 1e-12


# ---------------------------------------------------------------------------
# route agreement


def regular_pair(rs, rng, scale=1.0, gap=0.3):
    """Random pair deep inside the chamber, trace-centered for family A.

    The gap keeps both alternating routes in their well-conditioned
    regime; shrinking it trades digits for wall proximity.
    """
    lo = 0.0 if rs.family == "A" else 0.3
    while True:
        x = np.sort(rng.uniform(lo, 3.0, rs.ambient_dim))[::-1] * scale
        y = np.sort(rng.uniform(lo, 3.0, rs.ambient_dim))[::-1] * scale
        if rs.family == "A":
            x = x - x.mean()
            y = y - y.mean()
        gaps = np.concatenate([np.diff(x[::-1]), np.diff(y[::-1]), [gap + 1]])
        if gaps.min() > gap * scale:
            return x, y


@pytest.mark.parametrize("name", ["A1", "A2", "A3", "A4"])
def test_det_route_matches_alternating_sum(name):
    rs = build_root_system(spec_from_name(name))
    rng = np.random.default_rng(hash(name) % 2**32)
    for _ in range(10):
        x, y = regular_pair(rs, rng)
        det = det_heat_a(rs, x, y, 0.05)
        alt = kernel_w(rs, "heat", x, y, 0.05)
        assert rel(det.value, alt.value) < 1e-10
        assert det.method == "determinant"


def test_det_route_rejects_other_families():
    with pytest.raises(DomainError):
        det_heat_a(B2, [1, 0.5], [0.9, 0.4], 0.3)


@pytest.mark.parametrize("rs", [B1, B2, A2, G2], ids=lambda r: r.name)
def test_heat_via_spherical_matches_direct(rs):
    rng = np.random.default_rng(17)
    x, y = regular_pair(rs, rng, scale=0.8)
    if rs.name == "G2":
        x = np.array([2 / 3, 1 / 3, 1 / 3]) * 0.7  # interior direction
        y = np.array([1.0, 1.0, 0.0]) * 0.5
    direct = kernel_w(rs, "heat", x, y, 0.5)
    sph = heat_via_spherical(rs, x, y, 0.5, precision=220)
    assert rel(direct.value, float(sph)) < 1e-10


def test_direct_vs_high_precision():
    x, y = (0.9, 0.4), (0.7, 0.2)
    d = kernel_w(B2, "heat", x, y, 0.3)
    h = kernel_w(B2, "heat", x, y, 0.3, precision=200)
    assert d.method == "direct" and h.method == "hp"
    assert h.precision_bits == 200
    assert "mp_value" in h.details
    assert rel(d.value, h.value) < 1e-11


def test_wall_argument_goes_through_limit_machinery():
    v = kernel_w(B2, "heat", (1.0, 1.0), (0.7, 0.2), 0.3)
    assert v.method in ("spherical", "extrapolated")
    assert math.isfinite(v.value) and v.value > 0


def test_forced_direct_on_wall_raises():
    with pytest.raises(CancellationOverflow):
        kernel_w(B2, "heat", (1.0, 1.0), (0.7, 0.2), 0.3, method="direct")


def test_batch_matches_scalar():
    rng = np.random.default_rng(5)
    ys = np.sort(rng.uniform(0.1, 1.0, (40, 2)), axis=1)[:, ::-1]
    ys = ys[np.diff(ys, axis=1)[:, 0] < -0.03]
    vals = kernel_w_batch(B2, "heat", (0.9, 0.4), ys, 0.25)
    for yv, v in zip(ys, vals):
        assert rel(v, kernel_w(B2, "heat", (0.9, 0.4), yv, 0.25).value) < 1e-12


# ---------------------------------------------------------------------------
# invariance and symmetry


@pytest.mark.parametrize("k", range(8))
def test_weyl_invariance_in_second_argument(k):
    """The normalized kernel does not see the chamber of its arguments."""
    w = list(enumerate_weyl(B2))[k]
    y = (0.7, 0.2)
    base = kernel_w(B2, "heat", (0.9, 0.4), y, 0.3).value
    moved = kernel_w(B2, "heat", (0.9, 0.4), w.apply(y), 0.3).value
    assert rel(base, moved) < 1e-10


def test_heat_symmetric_in_arguments():
    a = kernel_w(B2, "heat", (0.9, 0.4), (0.7, 0.2), 0.3).value
    b = kernel_w(B2, "heat", (0.7, 0.2), (0.9, 0.4), 0.3).value
    assert rel(a, b) < 1e-12


def test_cancellation_diagnostic_grows_toward_wall():
    far = kernel_w(B2, "heat", (1.0, 0.45), (0.8, 0.3), 0.4, method="direct")
    near = kernel_w(B2, "heat", (1.0, 0.9999), (0.8, 0.3), 0.4, method="direct")
    assert near.cancellation > far.cancellation > 1.0 - 1e-12


# ---------------------------------------------------------------------------
# domain checks


def test_domain_errors():
    with pytest.raises(DomainError):
        kernel_w(B2, "wave", (1, 0.5), (0.5, 0.2))
    with pytest.raises(DomainError):
        kernel_w(B2, "heat", (1, 0.5), (0.5, 0.2))  # missing t
    with pytest.raises(DomainError):
        kernel_w(B2, "poisson", (1.2, 0.5), (0.8, 0.6))  # |X| >= 1
    with pytest.raises(DomainError):
        kernel_w(B2, "poisson", (0.5, 0.2), (0.5, 0.5))  # |Y| != 1
    with pytest.raises(DomainError):
        kernel_w(B2, "green", (0.5, 0.2), (1.2, 0.3))
    with pytest.raises(DomainError):
        kernel_w(B2, "heat", (1, 0.5, 0.2), (0.5, 0.2), 0.3)


# ---------------------------------------------------------------------------
# curved model and precision advice


def test_curved_heat_sinh_ratio():
    """sinh-corrected ratio against the flat kernel is exactly the group order."""
    x, y = (0.9, 0.4), (0.7, 0.2)
    for t in (0.02, 0.3):
        flat = kernel_w(B2, "heat", x, y, t).value
        corr = 1.0
        for a in B2.positive_roots:
            af = [float(c) for c in a]
            for p in (x, y):
                s = sum(c * v for c, v in zip(af, p))
                corr *= math.sinh(s) / s
        ratio = curved_heat(B2, x, y, t) * math.exp(
            sum(float(c) ** 2 for c in B2.rho) * t) * corr / flat
        assert rel(ratio, B2.weyl_order) < 1e-12
    with pytest.raises(DomainError):
        curved_heat(B2, (1.0, 1.0), (0.7, 0.2), 0.1)


def test_suggest_heat_bits_scaling():
    few = suggest_heat_bits((1, 0), (0.5, 0.2), 1.0)
    many = suggest_heat_bits((1, 0), (0.5, 0.2), 0.01)
    assert many > few >= 160


# ---------------------------------------------------------------------------
# the exact constant


def test_c_constant_frozen_values():
    assert c_constant(G2) == Q(160, 3)
    f4 = build_root_system(spec_from_name("F4"))
    assert c_constant(f4) == Q(1152 * 98884323901440000, 2**24)


@pytest.mark.parametrize("name", ["B2", "B3", "G2", "F4"])
def test_c_constant_two_routes(name):
    """Monomial contraction equals the group-order route on every closed subset."""
    rs = build_root_system(spec_from_name(name))
    for simples, subset in pi_closure_subsets(rs).items():
        direct = c_constant(rs, subset)
        order = parabolic_order(rs, simples)
        rho_s = rho_of(rs, subset)
        via_rho = Q(order) * pi_over(rs, rho_s, subset) / 2 ** len(subset.indices)
        assert direct == via_rho
