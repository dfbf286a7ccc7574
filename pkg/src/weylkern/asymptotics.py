"""Closed-form limit constants for the alternating kernels.

Each function returns an ``AsymptoticForm``: a constant, a power of the
small or large parameter, and an optional exponential rate, describing one
of the limit laws

* spherical average at a singular direction pair, t -> infinity,
* heat kernel small-time law with wall-induced extra powers of t,
* Poisson kernel blowup toward a singular boundary point,
* Newton kernel blowup toward a singular point (three branch shapes),
* kernel values at the chamber corner X = 0 (these are exact values of
  the extended kernels, not merely leading coefficients).

Everything algebraic is computed in exact rational arithmetic from the
vanishing sets of the arguments; only transcendental factors (powers of
pi, surface areas) bring in floats.  The exact rational part is kept in
``details`` so tests can pin it without tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction as Q
from weylkern.kernels import DomainError, surface_area
from weylkern.linexp import derivative_pairing
from weylkern.rootsys import (
    RootSubset,
    RootSystem,
    Vector,
    dot,
    pi_over,
    subsystem_order,
    vsub,
)


@dataclass(frozen=True)
class AsymptoticForm:
    """constant * parameter^power * exp(rate-term) description of a limit law."""

    kind: str
    constant: float
    power: Q
    rate: float
    parameter: str
    details: dict = field(default_factory=dict)

    def evaluate(self, s: float) -> float:
        """The model value at parameter s (rate interpreted per ``parameter``)."""
        if self.parameter == "t->inf":
            return self.constant * s ** float(self.power) * math.exp(self.rate * s)
        if self.parameter == "t->0":
            return self.constant * s ** float(self.power) * math.exp(-self.rate / s)
        return self.constant * s ** float(self.power)


def _exactify(X) -> Vector:
    coords = X.coords if hasattr(X, "coords") else tuple(X)
    return tuple(c if isinstance(c, Q) else Q(c) for c in coords)


def _vanishing(rs: RootSystem, Xq: Vector) -> list[int]:
    return [i for i, a in enumerate(rs.positive_roots) if dot(a, Xq) == 0]


def _require_dominant(rs: RootSystem, Xq: Vector, label: str) -> None:
    """The limit laws are stated for closed-chamber arguments only."""
    for a in rs.simple_roots:
        if dot(a, Xq) < 0:
            raise DomainError(f"{label} must lie in the closed chamber")


def pochhammer(a, k: int):
    """Rising factorial a (a+1) ... (a+k-1); exact on rational input."""
    out = Q(1) if isinstance(a, (int, Q)) else 1.0
    for j in range(k):
        out = out * (a + j)
    return out


def normalization_identity(rs: RootSystem) -> tuple[Q, Q]:
    """Both sides of the exact product identity for pi(rho) |W| / 2^gamma.

    Left: pi(rho) |W| / 2^gamma.  Right: product over positive roots of
    (|alpha|^2 / 2) (<alpha, rho> / |alpha|^2 + 1).  Scale covariant, so it
    holds verbatim in every realization used here.
    """
    lhs = pi_over(rs, rs.rho) * Q(rs.weyl_order) / (1 << rs.gamma)
    rhs = Q(1)
    for a in rs.positive_roots:
        n2 = dot(a, a)
        rhs *= (n2 / 2) * (dot(a, rs.rho) / n2 + 1)
    return lhs, rhs


# ---------------------------------------------------------------------------
# spherical average, t -> infinity along a ray


def spherical_limit_constant(rs: RootSystem, lam0, Y0) -> tuple[Q, int, int]:
    """Exact (D, m, m') for psi_{lam0}(t Y0) ~ D t^{-m} e^{t <lam0, Y0>}.

    m counts the positive roots vanishing on neither argument; m' = gamma - m.
    D is rational:

        D = (pi(rho)/2^gamma) * (c_meet / (c_lam c_Y))
            * |W_lam| |W_Y| / |W_meet| * 1 / (pi_M(lam0) pi_M(Y0))

    with c_* the derivative-pairing constants of the vanishing sets, W_*
    the corresponding reflection stabilizers, meet their intersection, and
    M the complement of the union.
    """
    lamq = _exactify(lam0)
    yq = _exactify(Y0)
    s_lam = _vanishing(rs, lamq)
    s_y = _vanishing(rs, yq)
    meet = sorted(set(s_lam) & set(s_y))
    union = set(s_lam) | set(s_y)
    M = [i for i in range(rs.gamma) if i not in union]
    m = len(M)
    roots = rs.positive_roots
    c_lam = derivative_pairing([roots[i] for i in s_lam]) if s_lam else Q(1)
    c_y = derivative_pairing([roots[i] for i in s_y]) if s_y else Q(1)
    c_meet = derivative_pairing([roots[i] for i in meet]) if meet else Q(1)
    w_lam = subsystem_order(rs, RootSubset(frozenset(s_lam), True))
    w_y = subsystem_order(rs, RootSubset(frozenset(s_y), True))
    w_meet = subsystem_order(rs, RootSubset(frozenset(meet), True))
    pi_m_lam = pi_over(rs, lamq, M) if M else Q(1)
    pi_m_y = pi_over(rs, yq, M) if M else Q(1)
    D = (pi_over(rs, rs.rho) / (1 << rs.gamma)) \
        * (c_meet / (c_lam * c_y)) \
        * Q(w_lam * w_y, w_meet) \
        / (pi_m_lam * pi_m_y)
    return D, m, rs.gamma - m


def spherical_asym(rs: RootSystem, lam0, Y0) -> AsymptoticForm:
    """psi_{lam0}(t Y0) ~ constant * t^{-m} * e^{t <lam0, Y0>} as t -> inf."""
    lamq = _exactify(lam0)
    yq = _exactify(Y0)
    if all(c == 0 for c in lamq) or all(c == 0 for c in yq):
        raise DomainError("the ray law needs nonzero arguments")
    _require_dominant(rs, lamq, "lambda0")
    _require_dominant(rs, yq, "Y0")
    D, m, mprime = spherical_limit_constant(rs, lam0, Y0)
    return AsymptoticForm(
        kind="spherical",
        constant=float(D),
        power=Q(-m),
        rate=float(dot(lamq, yq)),
        parameter="t->inf",
        details={"exact_constant": D, "m": m, "m_prime": mprime},
    )


# ---------------------------------------------------------------------------
# heat kernel, t -> 0


def heat_small_t(rs: RootSystem, X, Y) -> AsymptoticForm:
    """p^W_t(X, Y) ~ C t^{-d/2 - m'} e^{-|X-Y|^2/(4t)} as t -> 0.

    C = D * 2^{m-d} / (|W| pi^{d/2} pi(rho)) with (D, m, m') the spherical
    ray data of the pair.  For a regular pair m' = 0 and this reduces to
    the flat Gaussian prefactor divided by |W| pi(X) pi(Y) near-diagonal
    behavior.
    """
    xq = _exactify(X)
    yq = _exactify(Y)
    if all(c == 0 for c in xq) or all(c == 0 for c in yq):
        raise DomainError("the small-time law needs nonzero arguments")
    _require_dominant(rs, xq, "X")
    _require_dominant(rs, yq, "Y")
    d = rs.intrinsic_dim
    D, m, mprime = spherical_limit_constant(rs, xq, yq)
    exact = D * Q(2) ** (m - d) / (rs.weyl_order * pi_over(rs, rs.rho))
    const = float(exact) / math.pi ** (d / 2.0)
    diff = vsub(xq, yq)
    rate = float(dot(diff, diff) / 4)
    return AsymptoticForm(
        kind="heat-small-t",
        constant=const,
        power=Q(-d, 2) - mprime,
        rate=rate,
        parameter="t->0",
        details={"exact_over_pi_half_d": exact, "m": m, "m_prime": mprime},
    )


# ---------------------------------------------------------------------------
# elliptic kernels near singular targets


def _boundary_data(rs: RootSystem, Y0q: Vector):
    s = _vanishing(rs, Y0q)
    live = [i for i in range(rs.gamma) if i not in set(s)]
    roots = rs.positive_roots
    rho_p = [Q(0)] * rs.ambient_dim
    for i in s:
        for k in range(rs.ambient_dim):
            rho_p[k] += roots[i][k]
    pi_p_rho = Q(1)
    for i in s:
        pi_p_rho *= dot(roots[i], rho_p)
    pi_pp = pi_over(rs, Y0q, live) if live else Q(1)
    return s, len(s), pi_p_rho, pi_pp


def poisson_boundary_asym(rs: RootSystem, Y0) -> AsymptoticForm:
    """P^W(X, Y0) ~ C (1-|X|^2) |X-Y0|^{-(2 gamma' + d)} as X -> Y0, |Y0| = 1.

    gamma' counts the roots vanishing at Y0; the constant is

        C = 2^{2 gamma'} (d/2)_{gamma'} / (|W| w_d pi'(rho') pi''(Y0)^2)

    with pi' over the vanishing set (at its own rho) and pi'' the
    complementary product at Y0.  The (1-|X|^2) factor is part of the
    model, not of the constant.
    """
    yq = _exactify(Y0)
    _require_dominant(rs, yq, "Y0")
    d = rs.intrinsic_dim
    ny2 = dot(yq, yq)
    if abs(float(ny2) - 1.0) > 1e-9:
        raise DomainError("the Poisson boundary law needs |Y0| = 1")
    s, gp, pi_p_rho, pi_pp = _boundary_data(rs, yq)
    num = Q(2) ** (2 * gp) * pochhammer(Q(d, 2), gp)
    exact = num / (rs.weyl_order * pi_p_rho * pi_pp ** 2)
    const = float(exact) / surface_area(d)
    return AsymptoticForm(
        kind="poisson-boundary",
        constant=const,
        power=Q(-(2 * gp + d)),
        rate=0.0,
        parameter="|X-Y0|->0",
        details={"exact_times_w_d": exact, "gamma_prime": gp,
                 "model": "constant * (1-|X|^2) * r^power"},
    )


def newton_asym(rs: RootSystem, Y0) -> AsymptoticForm:
    """N^W(X, Y0) blowup law as X -> Y0, in three branches.

    d >= 3: C r^{-(2 gamma' + d - 2)} with
        C = 2^{2 gamma'} ((d-2)/2)_{gamma'} / (|W| (2-d) w_d pi'(rho') pi''(Y0)^2).
    d = 2, Y0 = 0: the exact global law
        N^W(X, 0) = -2^{2 gamma - 1} (gamma-1)! / (2 pi |W| pi(rho)) |X|^{-2 gamma}.
    d = 2, Y0 on a single wall (exactly one vanishing simple root):
        C = -2^{2 gamma' - 1} (gamma'-1)! / (2 pi |W| pi''(Y0)^2 pi'(rho')) , power -2,
    where pi'(rho') is the norm square of the vanishing root, the same
    factor the d >= 3 branch carries.
    """
    yq = _exactify(Y0)
    _require_dominant(rs, yq, "Y0")
    d = rs.intrinsic_dim
    if d < 2:
        raise DomainError("the Newton blowup law is stated for intrinsic dimension >= 2")
    s, gp, pi_p_rho, pi_pp = _boundary_data(rs, yq)
    if d >= 3:
        if gp == 0:
            # regular target: the flat fundamental solution survives unaveraged
            exact = Q(1, rs.weyl_order * (2 - d)) / pi_pp ** 2
            const = float(exact) / surface_area(d)
            return AsymptoticForm("newton", const, Q(-(d - 2)), 0.0, "|X-Y0|->0",
                                  details={"gamma_prime": 0})
        num = Q(2) ** (2 * gp) * pochhammer(Q(d - 2, 2), gp)
        exact = num / (rs.weyl_order * (2 - d) * pi_p_rho * pi_pp ** 2)
        const = float(exact) / surface_area(d)
        return AsymptoticForm("newton", const, Q(-(2 * gp + d - 2)), 0.0, "|X-Y0|->0",
                              details={"exact_times_w_d": exact, "gamma_prime": gp})
    # d == 2
    if all(c == 0 for c in yq):
        g = rs.gamma
        exact = -Q(2) ** (2 * g - 1) * math.factorial(g - 1) / (rs.weyl_order * pi_over(rs, rs.rho))
        const = float(exact) / (2 * math.pi)
        return AsymptoticForm("newton", const, Q(-2 * g), 0.0, "|X-Y0|->0",
                              details={"exact_times_2pi": exact, "gamma_prime": g,
                                       "exact_law": True})
    simple_vanish = [i for i, a in enumerate(rs.simple_roots) if dot(a, yq) == 0]
    if len(simple_vanish) != 1:
        raise DomainError("the d = 2 wall law needs exactly one vanishing simple root")
    exact = -Q(2) ** (2 * gp - 1) * math.factorial(gp - 1) / (
        rs.weyl_order * pi_pp ** 2 * pi_p_rho
    )
    const = float(exact) / (2 * math.pi)
    return AsymptoticForm("newton", const, Q(-2), 0.0, "|X-Y0|->0",
                          details={"exact_times_2pi": exact, "gamma_prime": gp})


# ---------------------------------------------------------------------------
# exact corner values


def at_zero(rs: RootSystem, kind: str, Y) -> float:
    """Exact value of the extended kernel at the chamber corner X = 0.

    Poisson (|Y| = 1): 2^{2 gamma} (d/2)_gamma / (|W| w_d pi(rho)),
    independent of the boundary point.  Newton: the same shape with the
    (d-2)/2 Pochhammer and the radial power |Y|^{2-d-2 gamma} for d >= 3,
    or the d = 2 logarithmic-family law with power |Y|^{-2 gamma}.
    """
    yq = _exactify(Y)
    d = rs.intrinsic_dim
    g = rs.gamma
    ny2 = float(dot(yq, yq))
    if kind == "poisson":
        if abs(ny2 - 1.0) > 1e-9:
            raise DomainError("the corner Poisson value needs |Y| = 1")
        exact = Q(2) ** (2 * g) * pochhammer(Q(d, 2), g) / (rs.weyl_order * pi_over(rs, rs.rho))
        return float(exact) / surface_area(d)
    if kind != "newton":
        raise DomainError("corner values are stated for the Poisson and Newton kernels")
    if ny2 == 0.0:
        raise DomainError("need Y distinct from the corner")
    if d >= 3:
        exact = Q(2) ** (2 * g) * pochhammer(Q(d - 2, 2), g) / (
            rs.weyl_order * (2 - d) * pi_over(rs, rs.rho)
        )
        return float(exact) / surface_area(d) * ny2 ** ((2 - d - 2 * g) / 2.0)
    if d == 2:
        exact = -Q(2) ** (2 * g - 1) * math.factorial(g - 1) / (rs.weyl_order * pi_over(rs, rs.rho))
        return float(exact) / (2 * math.pi) * ny2 ** (-float(g))
    raise DomainError("the corner Newton value is stated for intrinsic dimension >= 2")
