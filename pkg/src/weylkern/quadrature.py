"""Gauss-Legendre quadrature on chamber patches, boundary arcs, and intervals.

The closed chamber is the cone spanned by the fundamental weights, so a
rectangle in fundamental-weight coordinates maps to a chamber patch with a
constant Jacobian (the square root of the weight Gram determinant).  All
node sets are plain numpy arrays in ambient coordinates, ready for the
vectorized kernel evaluators.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from weylkern.rootsys import RootSystem, dot


def gauss_nodes(a: float, b: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [a, b]."""
    x, w = leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def weight_matrix(rs: RootSystem) -> np.ndarray:
    """Fundamental weights as rows, float, shape (rank, ambient)."""
    return np.array([[float(c) for c in w] for w in rs.fundamental_weights], dtype=float)


def chamber_jacobian(rs: RootSystem) -> float:
    """Volume scale of the fundamental-weight parametrization."""
    wm = weight_matrix(rs)
    return math.sqrt(abs(np.linalg.det(wm @ wm.T)))


def chamber_grid(rs: RootSystem, bounds: Sequence[float], n: int,
                 panels: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Tensor GL grid on the chamber patch {sum a_i omega_i : 0 < a_i < bound_i}.

    Returns ambient-coordinate points (m, ambient) and weights (m,) that
    already include the constant Jacobian, so a plain weighted sum
    integrates over the patch with the span's Lebesgue measure.
    """
    r = len(rs.fundamental_weights)
    if len(bounds) != r:
        raise ValueError(f"need one bound per fundamental weight ({r})")
    axes = []
    for b in bounds:
        if b <= 0:
            raise ValueError("bounds must be positive")
        xs, ws = [], []
        edges = np.linspace(0.0, b, panels + 1)
        for lo, hi in zip(edges[:-1], edges[1:]):
            x, w = gauss_nodes(lo, hi, n)
            xs.append(x)
            ws.append(w)
        axes.append((np.concatenate(xs), np.concatenate(ws)))
    coord_grids = np.meshgrid(*[a[0] for a in axes], indexing="ij")
    weight_grids = np.meshgrid(*[a[1] for a in axes], indexing="ij")
    coords = np.stack([g.ravel() for g in coord_grids], axis=1)
    weights = np.ones(len(coords))
    for g in weight_grids:
        weights = weights * g.ravel()
    points = coords @ weight_matrix(rs)
    return points, weights * chamber_jacobian(rs)


def integrate_chamber(rs: RootSystem, fn: Callable[[np.ndarray], np.ndarray],
                      bounds: Sequence[float], n: int = 48, panels: int = 1) -> float:
    """Integrate a vectorized function over a chamber patch."""
    points, weights = chamber_grid(rs, bounds, n, panels)
    return float(np.dot(weights, fn(points)))


def ball_bounds(rs: RootSystem, radius: float) -> list[float]:
    """Per-axis fundamental-weight bounds whose patch covers ball & chamber.

    The i-th coordinate of a chamber point Y is <Y, alpha_i^vee>, bounded
    by radius * |alpha_i^vee| = 2 radius / |alpha_i|.
    """
    out = []
    for a in rs.simple_roots:
        n2 = math.sqrt(float(dot(a, a)))
        out.append(2.0 * radius / n2)
    return out


# ---------------------------------------------------------------------------
# the boundary arc (rank <= 2)


def arc_span_frame(rs: RootSystem) -> tuple[np.ndarray, np.ndarray, float]:
    """Orthonormal 2-frame of the root span aligned with the chamber.

    Returns (u1, u2, theta_max): u1 points along the first fundamental
    weight, u2 completes the frame inside the span, and the chamber is the
    sector 0 <= theta <= theta_max.
    """
    if len(rs.fundamental_weights) != 2:
        raise ValueError("the boundary arc is parametrized for rank 2 only")
    wm = weight_matrix(rs)
    u1 = wm[0] / np.linalg.norm(wm[0])
    v = wm[1] - (wm[1] @ u1) * u1
    u2 = v / np.linalg.norm(v)
    theta_max = math.atan2(float(wm[1] @ u2), float(wm[1] @ u1))
    return u1, u2, theta_max


def arc_grid(rs: RootSystem, n: int = 64,
             theta_range: tuple[float, float] | None = None) -> tuple[np.ndarray, np.ndarray]:
    """GL nodes on the unit-sphere arc inside the chamber (rank 2).

    Weights carry the arclength measure; points are ambient unit vectors.
    """
    u1, u2, theta_max = arc_span_frame(rs)
    lo, hi = theta_range if theta_range is not None else (0.0, theta_max)
    th, w = gauss_nodes(lo, hi, n)
    points = np.outer(np.cos(th), u1) + np.outer(np.sin(th), u2)
    return points, w


def integrate_arc(rs: RootSystem, fn: Callable[[np.ndarray], np.ndarray], n: int = 64) -> float:
    points, weights = arc_grid(rs, n)
    return float(np.dot(weights, fn(points)))


# ---------------------------------------------------------------------------
# adaptive one-dimensional integration


def adaptive_interval(fn: Callable[[float], float], a: float, b: float,
                      rel: float = 1e-8, order: int = 12, max_depth: int = 40) -> tuple[float, float]:
    """Adaptive Gauss-Legendre with panel splitting and a Richardson check.

    A panel is accepted when splitting it changes its value by less than
    the relative tolerance (scaled to the running whole-interval size);
    the returned error estimate is the sum of the accepted differences.
    """
    x0, w0 = leggauss(order)

    def panel(lo, hi):
        half = 0.5 * (hi - lo)
        return half * math.fsum(w * fn(lo + half * (x + 1.0)) for x, w in zip(x0, w0))

    whole = panel(a, b)
    scale = abs(whole) or 1.0
    total = 0.0
    err = 0.0
    stack = [(a, b, whole, 0)]
    while stack:
        lo, hi, coarse, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        left = panel(lo, mid)
        right = panel(mid, hi)
        fine = left + right
        diff = abs(fine - coarse)
        if diff <= rel * max(scale, abs(fine)) or depth >= max_depth:
            total += fine
            err += diff
            scale = max(scale, abs(total))
        else:
            stack.append((lo, mid, left, depth + 1))
            stack.append((mid, hi, right, depth + 1))
    return total, err
