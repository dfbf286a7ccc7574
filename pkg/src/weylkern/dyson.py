"""Dyson Brownian motion and wall-killed Brownian motion in a Weyl chamber.

Everything here is a thin layer over the alternating-sum kernels: the
killed transition density is |W| pi(X) pi(Y) p_t^W(X, Y), and the Doob
transform by pi turns it into the conservative Dyson density
|W| pi(Y)^2 p_t^W(X, Y).  The module also packages the exit laws, the
boundary asymptotics in their process-normalized form, and the time
integral of the heat kernel against its elliptic limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction as Q
from typing import Callable, Sequence

import numpy as np

from weylkern.asymptotics import (
    AsymptoticForm,
    heat_small_t,
    poisson_boundary_asym,
    _boundary_data,
)
from weylkern.kernels import (
    DomainError,
    KernelValue,
    det_heat_a,
    kernel_w,
    kernel_w_batch,
)
from weylkern.quadrature import adaptive_interval, ball_bounds, chamber_grid
from weylkern.rootsys import RootSystem, as_vector, dot, pi_over, regularity


def _pi_float(rs: RootSystem, X) -> float:
    return float(pi_over(rs, as_vector(X)))


def killed_heat(rs: RootSystem, X: Sequence, Y: Sequence, t: float,
                method: str | None = None, precision: int | None = None) -> KernelValue:
    """Transition density of Brownian motion killed at the chamber walls.

    Vanishes when either endpoint sits on a wall.  ``method="det"`` routes
    the A family through the Karlin-McGregor determinant instead of the
    plain alternating sum.
    """
    if method == "det":
        base = det_heat_a(rs, X, Y, t)
    else:
        base = kernel_w(rs, "heat", X, Y, t=t, method=method, precision=precision)
    scale = rs.weyl_order * _pi_float(rs, X) * _pi_float(rs, Y)
    return KernelValue(scale * base.value, "heat", base.method,
                       base.cancellation, base.precision_bits,
                       dict(base.details, normalization="killed"))


def dyson_heat(rs: RootSystem, X: Sequence, Y: Sequence, t: float,
               method: str | None = None, precision: int | None = None) -> KernelValue:
    """Transition density of the Dyson process (Doob transform by pi)."""
    piy = _pi_float(rs, Y)
    if piy == 0.0:
        return KernelValue(0.0, "heat", "wall", 1.0, None,
                           {"normalization": "dyson", "note": "density vanishes on walls"})
    base = kernel_w(rs, "heat", X, Y, t=t, method=method, precision=precision)
    scale = rs.weyl_order * piy * piy
    return KernelValue(scale * base.value, "heat", base.method,
                       base.cancellation, base.precision_bits,
                       dict(base.details, normalization="dyson"))


def killed_poisson(rs: RootSystem, X: Sequence, Y: Sequence) -> KernelValue:
    """Exit density on the unit sphere for the killed walk started inside.

    Defective: its total mass is the probability of reaching the sphere
    before a wall.
    """
    base = kernel_w(rs, "poisson", X, Y)
    scale = rs.weyl_order * _pi_float(rs, X) * _pi_float(rs, Y)
    return KernelValue(scale * base.value, "poisson", base.method,
                       base.cancellation, base.precision_bits,
                       dict(base.details, normalization="killed"))


def dyson_poisson(rs: RootSystem, X: Sequence, Y: Sequence) -> KernelValue:
    """Exit density on the unit sphere for the Dyson process (mass one)."""
    piy = _pi_float(rs, Y)
    if piy == 0.0:
        return KernelValue(0.0, "poisson", "wall", 1.0, None,
                           {"normalization": "dyson", "note": "density vanishes on walls"})
    base = kernel_w(rs, "poisson", X, Y)
    scale = rs.weyl_order * piy * piy
    return KernelValue(scale * base.value, "poisson", base.method,
                       base.cancellation, base.precision_bits,
                       dict(base.details, normalization="dyson"))


def dyson_exit_normalized(rs: RootSystem, X: Sequence, Y0: Sequence,
                          precision: int | None = None) -> KernelValue:
    """|W| pi''(Y0)^2 P^W(X, Y0), the wall-continuous exit quantity.

    pi'' runs over the roots not vanishing at Y0, so this equals
    dyson_poisson at regular Y0 and stays finite and positive on walls;
    it is the measured side of dyson_exit_law.
    """
    yq = as_vector(Y0)
    _, _, _, pi_pp = _boundary_data(rs, yq)
    base = kernel_w(rs, "poisson", X, Y0, precision=precision)
    scale = rs.weyl_order * float(pi_pp) ** 2
    details = dict(base.details, normalization="dyson-normalized")
    if "mp_value" in details:
        details["mp_value"] = scale * details["mp_value"]
    return KernelValue(scale * base.value, "poisson", base.method,
                       base.cancellation, base.precision_bits, details)


def dyson_heat_normalized(rs: RootSystem, X: Sequence, Y: Sequence, t,
                          precision: int | None = None) -> KernelValue:
    """p^D(X, Y; t) / pi(Y)^2 = |W| p^W(X, Y; t), continuous up to walls.

    The measured side of dyson_heat_law.
    """
    base = kernel_w(rs, "heat", X, Y, t=t, precision=precision)
    details = dict(base.details, normalization="dyson-normalized")
    if "mp_value" in details:
        details["mp_value"] = rs.weyl_order * details["mp_value"]
    return KernelValue(rs.weyl_order * base.value, "heat", base.method,
                       base.cancellation, base.precision_bits, details)


def dyson_newton(rs: RootSystem, X: Sequence, Y: Sequence) -> KernelValue:
    """Newton kernel of the Dyson process, |W| pi(Y)^2 N^W(X, Y).

    Its negative is the time integral of the Dyson transition density
    (intrinsic dimension >= 3).
    """
    piy = _pi_float(rs, Y)
    if piy == 0.0:
        return KernelValue(0.0, "newton", "wall", 1.0, None,
                           {"normalization": "dyson", "note": "density vanishes on walls"})
    base = kernel_w(rs, "newton", X, Y)
    scale = rs.weyl_order * piy * piy
    return KernelValue(scale * base.value, "newton", base.method,
                       base.cancellation, base.precision_bits,
                       dict(base.details, normalization="dyson"))


def dyson_drift_np(rs: RootSystem) -> Callable[[np.ndarray], np.ndarray]:
    """Vectorized drift 2 sum_a a / <a, x> of the Dyson generator."""
    A = rs.roots_np()

    def drift(points: np.ndarray) -> np.ndarray:
        dots = points @ A.T
        return 2.0 * ((1.0 / dots) @ A)

    return drift


def dyson_mass(rs: RootSystem, X: Sequence, t: float, n: int = 48,
               panels: int = 2, pad: float = 12.0) -> float:
    """Quadrature of the Dyson density over the chamber; should be 1.

    The patch covers a ball of radius |X| + pad * sqrt(2 t d), beyond
    which the Gaussian mass is negligible.
    """
    Xq = as_vector(X)
    d = rs.intrinsic_dim
    radius = math.sqrt(float(dot(Xq, Xq))) + pad * math.sqrt(2.0 * t * d)
    points, weights = chamber_grid(rs, ball_bounds(rs, radius), n, panels)
    vals = kernel_w_batch(rs, "heat", Xq, points, t=t)
    piy = np.prod(points @ rs.roots_np().T, axis=1)
    return float(np.dot(weights, rs.weyl_order * piy * piy * vals))


def semigroup_defect(rs: RootSystem, X: Sequence, Y: Sequence, s: float, t: float,
                     n: int = 48, panels: int = 2, pad: float = 12.0) -> tuple[float, float]:
    """Chapman-Kolmogorov check: |W| int pi(Z)^2 p_s(X,Z) p_t(Z,Y) dZ vs p_{s+t}(X,Y).

    Returns (quadrature value, direct value).
    """
    Xq = as_vector(X)
    Yq = as_vector(Y)
    rx = math.sqrt(float(dot(Xq, Xq)))
    ry = math.sqrt(float(dot(Yq, Yq)))
    radius = max(rx, ry) + pad * math.sqrt(2.0 * max(s, t) * rs.intrinsic_dim)
    points, weights = chamber_grid(rs, ball_bounds(rs, radius), n, panels)
    left = kernel_w_batch(rs, "heat", Xq, points, t=s)
    right = kernel_w_batch(rs, "heat", Yq, points, t=t)
    piz = np.prod(points @ rs.roots_np().T, axis=1)
    quad = float(np.dot(weights, rs.weyl_order * piz * piz * left * right))
    direct = kernel_w(rs, "heat", Xq, Yq, t=s + t).value
    return quad, direct


def dyson_exit_law(rs: RootSystem, Y0: Sequence) -> AsymptoticForm:
    """Boundary blow-up of the Dyson exit density near a singular sphere point.

    Stated for the wall-continuous normalization: with pi'' the product of
    the non-vanishing root factors at Y0, the quantity
    |W| pi''(Y0)^2 P^W(X, Y0) behaves like C (1 - |X|^2) |X - Y0|^power as
    X -> Y0, and both |W| and pi'' drop out of C:

        C = 2^{2 gamma'} (d/2)_{gamma'} / (w_d pi'(rho')).
    """
    base = poisson_boundary_asym(rs, Y0)
    yq = as_vector(Y0)
    _, gp, _, pi_pp = _boundary_data(rs, yq)
    scale = rs.weyl_order * pi_pp ** 2
    exact = base.details["exact_times_w_d"] * scale
    details = {"exact_times_w_d": exact, "gamma_prime": gp,
               "model": base.details["model"], "normalization": "dyson"}
    return AsymptoticForm("dyson-exit", float(scale) * base.constant, base.power,
                          base.rate, base.parameter, details)


def dyson_heat_law(rs: RootSystem, X: Sequence, Y: Sequence) -> AsymptoticForm:
    """Small-time law of p^D(X, Y; t) / pi(Y)^2, continuous up to the walls.

    The constant is |W| times the killed-kernel constant, so the Weyl
    order cancels and only the singular-face data of X and Y remain.
    """
    base = heat_small_t(rs, X, Y)
    details = dict(base.details, normalization="dyson")
    c = base.details.get("exact_over_pi_half_d")
    if c is not None:
        details["exact_over_pi_half_d"] = c * rs.weyl_order
    return AsymptoticForm("dyson-heat-small-t", rs.weyl_order * base.constant,
                          base.power, base.rate, base.parameter, details)


@dataclass(frozen=True)
class TimeIntegralReport:
    value: float            # integral over (0, T]
    tail_bound: float       # rigorous bound on the integral over (T, inf)
    horizon: float
    target: float           # minus the elliptic kernel at the same arguments
    evaluations: int

    @property
    def defect(self) -> float:
        return abs(self.value - self.target)

    @property
    def consistent(self) -> bool:
        return self.defect <= self.tail_bound + 1e-10 * abs(self.target)


def newton_time_integral(rs: RootSystem, X: Sequence, Y: Sequence,
                         horizon: float = 64.0, rel: float = 1e-9) -> TimeIntegralReport:
    """Integrate the heat kernel in time and compare with the elliptic kernel.

    For intrinsic dimension >= 3 the time integral of p_t^W over (0, inf)
    equals -N^W.  The tail beyond the horizon T is bounded using
    p_t^W <= t^(-d/2-gamma) psi_X(Y/2T) / (|W| 2^d pi^(d/2) pi(rho)),
    valid for t >= T because the spherical factor is nondecreasing along
    rays and the Gaussian prefactor is at most one.
    """
    d = rs.intrinsic_dim
    if d < 3:
        raise DomainError("the time integral is matched to the elliptic kernel for d >= 3")
    Xq = as_vector(X)
    Yq = as_vector(Y)
    if regularity(rs, Xq) <= 0 or regularity(rs, Yq) <= 0:
        raise DomainError("time integration needs regular arguments")

    count = 0

    def integrand(t: float) -> float:
        nonlocal count
        count += 1
        if t <= 0.0:
            return 0.0
        return kernel_w(rs, "heat", Xq, Yq, t=t).value

    value, _ = adaptive_interval(integrand, 0.0, horizon, rel=rel)

    from weylkern.kernels import spherical_psi

    hq = Q(horizon)
    psi = spherical_psi(rs, Xq, tuple(q / (2 * hq) for q in Yq))
    g = rs.gamma
    decay = Q(d, 2) + g - 1
    pref = rs.weyl_order * (2.0 ** d) * math.pi ** (d / 2.0) * float(pi_over(rs, rs.rho))
    tail = float(psi) * horizon ** float(1 - Q(d, 2) - g) / (float(decay) * pref)

    target = -kernel_w(rs, "newton", Xq, Yq).value
    return TimeIntegralReport(value, tail, horizon, target, count)
