"""Quadrature primitives against closed-form integrals."""

import math

import numpy as np
import pytest

from weylkern import build_root_system, spec_from_name
from weylkern.quadrature import (
    adaptive_interval,
    arc_grid,
    arc_span_frame,
    ball_bounds,
    chamber_grid,
    chamber_jacobian,
    gauss_nodes,
    integrate_arc,
    integrate_chamber,
    weight_matrix,
)


def sysname(name):
    return build_root_system(spec_from_name(name))


def test_gauss_exactness():
    """Degree 2n-1 polynomials integrate exactly."""
    x, w = gauss_nodes(0.0, 1.0, 6)
    for k in range(12):
        assert abs(w @ x**k - 1.0 / (k + 1)) < 1e-14


def test_gauss_interval_mapping():
    x, w = gauss_nodes(-2.0, 5.0, 20)
    assert abs(w.sum() - 7.0) < 1e-13
    assert x.min() > -2 and x.max() < 5
    assert abs(w @ np.exp(x) - (math.exp(5) - math.exp(-2))) < 1e-10


def test_adaptive_interval():
    val, err = adaptive_interval(math.sin, 0.0, math.pi)
    assert abs(val - 2.0) < 1e-10
    assert err < 1e-8
    val, _ = adaptive_interval(lambda x: 1.0 / (x + 1e-3), 0.0, 1.0, rel=1e-10)
    assert abs(val - math.log(1001.0)) < 1e-8 * math.log(1001.0)


def test_chamber_integral_gaussian_b2():
    """The B2 chamber is a pi/4 wedge, so the plane Gaussian gives pi/8."""
    rs = sysname("B2")
    val = integrate_chamber(rs, lambda P: np.exp(-(P**2).sum(axis=1)),
                            ball_bounds(rs, 6.0), n=48, panels=2)
    assert abs(val - math.pi / 8) < 1e-9


def test_chamber_integral_gaussian_b1():
    rs = sysname("B1")
    val = integrate_chamber(rs, lambda P: np.exp(-(P**2).sum(axis=1)),
                            ball_bounds(rs, 7.0), n=64, panels=2)
    assert abs(val - math.sqrt(math.pi) / 2) < 1e-9


def test_chamber_integral_gaussian_a2():
    """A2's chamber is a pi/3 wedge of the trace-zero plane."""
    rs = sysname("A2")
    val = integrate_chamber(rs, lambda P: np.exp(-(P**2).sum(axis=1)),
                            ball_bounds(rs, 6.0), n=48, panels=2)
    assert abs(val - math.pi / 6) < 1e-9


def test_chamber_grid_nodes_are_in_the_chamber():
    rs = sysname("G2")
    pts, w = chamber_grid(rs, [2.0, 2.0], n=8)
    assert pts.shape == (64, 3) and w.shape == (64,)
    for a in rs.positive_roots:
        av = np.array([float(c) for c in a])
        assert (pts @ av > -1e-12).all()
    assert (w > 0).all()


def test_chamber_jacobian_matches_gram():
    for name in ["B2", "G2", "A3"]:
        rs = sysname(name)
        wm = weight_matrix(rs)
        expect = math.sqrt(abs(np.linalg.det(wm @ wm.T)))
        assert abs(chamber_jacobian(rs) - expect) < 1e-14


def test_arc_length_b2():
    # unit-circle arc across the chamber subtends pi/4
    rs = sysname("B2")
    val = integrate_arc(rs, lambda P: np.ones(len(P)), n=32)
    assert abs(val - math.pi / 4) < 1e-12


def test_arc_length_g2():
    rs = sysname("G2")
    val = integrate_arc(rs, lambda P: np.ones(len(P)), n=32)
    assert abs(val - math.pi / 6) < 1e-12


def test_arc_nodes_unit_norm_and_in_chamber():
    rs = sysname("B2")
    pts, w = arc_grid(rs, n=16)
    assert np.allclose((pts**2).sum(axis=1), 1.0, atol=1e-12)
    for a in rs.positive_roots:
        av = np.array([float(c) for c in a])
        assert (pts @ av > -1e-12).all()


def test_arc_span_frame_orthonormal():
    rs = sysname("G2")
    e1, e2, theta_max = arc_span_frame(rs)
    assert abs(e1 @ e1 - 1) < 1e-12 and abs(e2 @ e2 - 1) < 1e-12
    assert abs(e1 @ e2) < 1e-12
    assert abs(theta_max - math.pi / 6) < 1e-12


def test_ball_bounds_cover():
    rs = sysname("B2")
    bounds = ball_bounds(rs, 1.0)
    # every chamber point of norm <= 1 has weight coordinates within bounds
    rng = np.random.default_rng(3)
    wm = weight_matrix(rs)
    inv = np.linalg.pinv(wm.T)
    for _ in range(200):
        x = rng.normal(size=2)
        x = np.abs(x)
        x = x / max(1.0, np.linalg.norm(x))
        x = np.sort(x)[::-1]  # chamber of B2: x0 >= x1 >= 0
        coords = inv @ x
        assert (coords <= np.array(bounds) + 1e-9).all()
