"""Reflection-alternating integral kernels with cancellation control.

Every kernel here is the alternating orbit sum

    K^W(X, Y) = (1 / (|W| pi(X) pi(Y))) * sum_w sign(w) K(X, w Y)

over the Weyl group, where K is the flat Euclidean kernel (heat, Newton,
Poisson, or ball Green) in the intrinsic dimension of the root span and
pi(X) is the product of <alpha, X> over the positive roots.  The numerator
vanishes wherever the denominator does, so K^W extends continuously to the
chamber walls; getting at those wall values is the whole game.

Three evaluation regimes:

* direct float summation with compensated addition and a cancellation
  estimate (the generic regular-point path);
* exact-geometry summation in mpmath at a requested bit precision, with
  all Weyl images, squared distances, and exponents formed in rational
  arithmetic first;
* singular machinery for wall points: the heat kernel goes through the
  exact L'Hopital limit of the spherical function, the elliptic kernels
  (Newton, Poisson, Green) through rational-offset Richardson
  extrapolation of the extended quotient at high precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction as Q
from typing import Sequence

import numpy as np
from mpmath import mp, mpf

from weylkern.linexp import LinExpPoly, derivative_pairing
from weylkern.rootsys import (
    ChamberPoint,
    RootSystem,
    Vector,
    as_vector,
    dot,
    enumerate_weyl,
    pi_over,
    regularity,
    vadd,
    vscale,
    vsub,
)

KINDS = ("heat", "newton", "poisson", "green")

SINGULAR_TOL = 1e-8
FALLBACK_BAND = 1e-4
CANCEL_LIMIT = 1e6

_EPS = 2.2204460492503131e-16


class DomainError(ValueError):
    """Arguments outside the kernel's domain."""


class CancellationOverflow(ArithmeticError):
    """The alternating sum lost all significant digits and no fallback was allowed."""


@dataclass(frozen=True)
class KernelValue:
    """Result of one kernel evaluation with its numerical provenance."""

    value: float
    kind: str
    method: str
    cancellation: float
    precision_bits: int | None = None
    details: dict = field(default_factory=dict)

    def __float__(self) -> float:
        return float(self.value)


# ---------------------------------------------------------------------------
# flat Euclidean pieces


def surface_area(d: int) -> float:
    """Surface measure of the unit sphere in R^d; w_1 = 2 by convention."""
    if d < 1:
        raise DomainError("dimension must be >= 1")
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def newton_phi(d: int, r):
    """Radial profile of the fundamental solution of the Laplacian.

    Normalized so that the distributional Laplacian is a unit point mass;
    in one dimension the odd primitive -r/2 is used.
    """
    if d == 1:
        return -r / 2
    if d == 2:
        log = mp.log if isinstance(r, mpf) else math.log
        return log(r) / (2 * (mp.pi if isinstance(r, mpf) else math.pi))
    w = surface_area(d)
    return r ** (2 - d) / ((2 - d) * w)


def euclidean_kernel(kind: str, d: int, X: Sequence[float], Y: Sequence[float], t: float | None = None) -> float:
    """Flat kernel of one of the four families in dimension d.

    X and Y may carry more coordinates than d (points of an embedded root
    span); all appearances of dimension use d, all distances use the
    ambient Euclidean metric.
    """
    if kind not in KINDS:
        raise DomainError(f"unknown kernel kind {kind!r}")
    diff2 = sum((x - y) ** 2 for x, y in zip(X, Y))
    if kind == "heat":
        if t is None or t <= 0:
            raise DomainError("heat kernel requires t > 0")
        return (4.0 * math.pi * t) ** (-d / 2.0) * math.exp(-diff2 / (4.0 * t))
    if kind == "newton":
        if diff2 == 0:
            raise DomainError("Newton kernel is singular on the diagonal")
        return newton_phi(d, math.sqrt(diff2))
    nx2 = sum(x * x for x in X)
    if kind == "poisson":
        if diff2 == 0:
            raise DomainError("Poisson kernel is singular on the diagonal")
        return (1.0 - nx2) / (surface_area(d) * diff2 ** (d / 2.0))
    # green: Kelvin image form, valid in every dimension
    if diff2 == 0:
        raise DomainError("Green kernel is singular on the diagonal")
    ny2 = sum(y * y for y in Y)
    rim2 = nx2 * ny2 - 2.0 * sum(x * y for x, y in zip(X, Y)) + 1.0
    return newton_phi(d, math.sqrt(diff2)) - newton_phi(d, math.sqrt(rim2))


# ---------------------------------------------------------------------------
# argument preparation


def _coords(arg) -> tuple:
    if isinstance(arg, ChamberPoint):
        return arg.coords
    return tuple(arg)


def _exact(arg) -> Vector:
    """Exact rational coordinates; floats convert via their exact binary value."""
    return tuple(c if isinstance(c, Q) else Q(c) for c in _coords(arg))


def _floats(arg) -> tuple[float, ...]:
    return tuple(float(Q(c)) if isinstance(c, str) else float(c) for c in _coords(arg))


def _snap_to_face(rs: RootSystem, Xq: Vector, tol: float) -> Vector:
    """Project exactly onto the intersection of the nearly-vanishing walls.

    Only simple-root walls need checking: on the closed chamber a positive
    root's value is a nonnegative integer combination of simple values.
    """
    xf = [float(c) for c in Xq]
    nx = math.sqrt(sum(c * c for c in xf)) or 1.0
    close = []
    for a in rs.simple_roots:
        na = math.sqrt(sum(float(c) ** 2 for c in a))
        if abs(sum(float(c) * x for c, x in zip(a, xf))) <= tol * na * nx:
            close.append(a)
    if not close:
        return Xq
    from weylkern.rootsys import _mat_solve  # exact Gram solve

    gram = [[dot(a, b) for b in close] for a in close]
    rhs = [[dot(a, Xq) for a in close]]
    coef = _mat_solve(gram, rhs)[0]
    out = list(Xq)
    for c, a in zip(coef, close):
        for m in range(rs.ambient_dim):
            out[m] -= c * a[m]
    return tuple(out)


def _vanishing_exact(rs: RootSystem, Xq: Vector) -> tuple[int, ...]:
    return tuple(i for i, a in enumerate(rs.positive_roots) if dot(a, Xq) == 0)


# ---------------------------------------------------------------------------
# alternating sums, float and exact/mp


def _images_float(rs: RootSystem, yf: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    mats, signs = rs.weyl_stack()
    return mats @ np.asarray(yf, dtype=float), signs


def _flat_terms_np(kind: str, d: int, xf: np.ndarray, imgs: np.ndarray, t: float | None,
                   nx2: float, ny2: float) -> np.ndarray:
    diff2 = np.sum((imgs - xf) ** 2, axis=1)
    if kind == "heat":
        return (4.0 * math.pi * t) ** (-d / 2.0) * np.exp(-diff2 / (4.0 * t))
    if np.any(diff2 == 0.0):
        raise DomainError("argument lies on the reflection orbit of the other; kernel is singular")
    r = np.sqrt(diff2)
    if kind == "newton":
        if d == 1:
            return -r / 2.0
        if d == 2:
            return np.log(r) / (2.0 * math.pi)
        return r ** (2 - d) / ((2 - d) * surface_area(d))
    if kind == "poisson":
        return (1.0 - nx2) / (surface_area(d) * diff2 ** (d / 2.0))
    rim2 = nx2 * ny2 - 2.0 * (imgs @ xf) + 1.0
    rim = np.sqrt(rim2)
    if d == 1:
        return (rim - r) / 2.0
    if d == 2:
        return (np.log(r) - np.log(rim)) / (2.0 * math.pi)
    return (r ** (2 - d) - rim ** (2 - d)) / ((2 - d) * surface_area(d))


def _alt_sum_float(rs: RootSystem, kind: str, xf, yf, t) -> tuple[float, float, float]:
    """Signed sum over the Weyl orbit; returns (sum, max |term|, sum |term|)."""
    imgs, signs = _images_float(rs, yf)
    x = np.asarray(xf, dtype=float)
    nx2 = float(x @ x)
    ny2 = float(np.dot(yf, yf))
    terms = _flat_terms_np(kind, rs.intrinsic_dim, x, imgs, t, nx2, ny2)
    signed = math.fsum((signs * terms).tolist())
    absterms = np.abs(terms)
    return signed, float(absterms.max()), float(absterms.sum())


def _alt_sum_mp(rs: RootSystem, kind: str, xq: Vector, yq: Vector, t: Q | None, bits: int):
    """Same sum with exact geometry; only transcendentals are approximate."""
    d = rs.intrinsic_dim
    elems = enumerate_weyl(rs)
    with mp.workprec(bits):
        pi_mp = mp.pi
        nx2 = dot(xq, xq)
        ny2 = dot(yq, yq)
        terms = []
        for w in elems:
            img = w.apply(yq)
            diff2 = dot(vsub(xq, img), vsub(xq, img))
            if kind == "heat":
                expo = -diff2 / (4 * t)
                val = mp.exp(_to_mp(expo)) * (4 * pi_mp * _to_mp(t)) ** (mpf(-d) / 2)
            elif kind == "newton":
                if diff2 == 0:
                    raise DomainError("argument lies on the reflection orbit of the other; kernel is singular")
                val = newton_phi(d, mp.sqrt(_to_mp(diff2)))
            elif kind == "poisson":
                if diff2 == 0:
                    raise DomainError("argument lies on the reflection orbit of the other; kernel is singular")
                w_d = 2 * pi_mp ** (mpf(d) / 2) / mp.gamma(mpf(d) / 2)
                val = _to_mp(1 - nx2) / (w_d * _to_mp(diff2) ** (mpf(d) / 2))
            else:
                if diff2 == 0:
                    raise DomainError("argument lies on the reflection orbit of the other; kernel is singular")
                rim2 = nx2 * ny2 - 2 * dot(xq, img) + 1
                val = newton_phi(d, mp.sqrt(_to_mp(diff2))) - newton_phi(d, mp.sqrt(_to_mp(rim2)))
            terms.append(int(w.sign) * val)
        total = mp.fsum(terms)
        maxabs = max(abs(v) for v in terms)
        sumabs = mp.fsum(abs(v) for v in terms)
        return total, maxabs, sumabs


def _to_mp(x: Q) -> mpf:
    return mpf(x.numerator) / mpf(x.denominator)


# ---------------------------------------------------------------------------
# domain validation


def _validate_domain(rs: RootSystem, kind: str, xf, yf, t, tol=1e-9) -> None:
    if kind == "heat":
        if t is None or t <= 0:
            raise DomainError("heat kernel requires t > 0")
        return
    nx = math.sqrt(sum(c * c for c in xf))
    ny = math.sqrt(sum(c * c for c in yf))
    if kind == "poisson":
        if nx >= 1.0:
            raise DomainError("Poisson kernel requires |X| < 1")
        if abs(ny - 1.0) > 1e-6:
            raise DomainError("Poisson kernel requires |Y| = 1")
    elif kind == "green":
        if nx >= 1.0 or ny >= 1.0:
            raise DomainError("Green kernel requires both arguments in the open unit ball")


# ---------------------------------------------------------------------------
# spherical function, regular and singular, in one exact code path


def _auto_bits(rs: RootSystem, reg: float, base: int = 80) -> int:
    if reg <= 0 or reg >= 1:
        return base
    digits = rs.gamma * max(0.0, -math.log10(reg))
    return min(4000, base + int(3.4 * digits))


def spherical_psi(rs: RootSystem, lam, X, precision: int | None = None):
    """The normalized alternating exponential average psi_lambda(X).

    psi is symmetric in its two arguments, entire on the complexification,
    and equals 1 whenever either argument is 0.  Wall arguments are exact:
    the evaluation runs the L'Hopital limit in rational arithmetic, so the
    result at a singular pair is the true analytic continuation rather
    than a ratio of rounded near-zeros.

    Returns a float when precision is None, an mpf otherwise.
    """
    lamq = _exact(lam)
    xq = _exact(X)
    if len(lamq) != rs.ambient_dim or len(xq) != rs.ambient_dim:
        raise DomainError(f"{rs.name} takes {rs.ambient_dim}-coordinate arguments")
    if all(c == 0 for c in lamq) or all(c == 0 for c in xq):
        return 1.0 if precision is None else mpf(1)
    s_lam = _vanishing_exact(rs, lamq)
    s_x = _vanishing_exact(rs, xq)
    val = _psi_limit(rs, lamq, xq, s_lam, s_x, precision)
    return val


def _psi_limit(rs: RootSystem, lamq: Vector, xq: Vector,
               s_lam: Sequence[int], s_x: Sequence[int], precision: int | None):
    roots = rs.positive_roots
    lam_walls = [roots[i] for i in s_lam]
    x_walls = [roots[i] for i in s_x]
    poly = LinExpPoly(rs.ambient_dim)
    for w in enumerate_weyl(rs):
        factors = tuple(sorted(w.apply(b) for b in x_walls))
        poly.add_term(Q(w.sign), factors, w.apply(xq))
    poly = poly.derivative_product(lam_walls)
    groups = poly.eval_groups(lamq)

    c_lam = derivative_pairing(lam_walls) if lam_walls else Q(1)
    c_x = derivative_pairing(x_walls) if x_walls else Q(1)
    live_lam = pi_over(rs, lamq, [i for i in range(rs.gamma) if i not in set(s_lam)])
    live_x = pi_over(rs, xq, [i for i in range(rs.gamma) if i not in set(s_x)])
    pref = (pi_over(rs, rs.rho) / (1 << rs.gamma)) / (c_lam * c_x * live_lam * live_x)

    reg = min(regularity(rs, lamq), regularity(rs, xq))
    bits = precision if precision is not None else _auto_bits(rs, max(reg, 1e-300))
    while True:
        with mp.workprec(bits):
            vals = [_to_mp(v) * mp.exp(_to_mp(t)) for t, v in groups.items()]
            total = mp.fsum(vals)
            maxv = max(abs(v) for v in vals) if vals else mpf(0)
            psi = _to_mp(pref) * total
        if precision is not None or total == 0 or maxv == 0:
            break
        if abs(total) > maxv * mpf(2) ** (-(bits - 50)):
            break
        if bits >= 4000:
            break
        bits *= 2
    return float(psi) if precision is None else psi


def heat_via_spherical(rs: RootSystem, X, Y, t, precision: int | None = None):
    """Alternating heat kernel routed through the spherical function.

    Algebraically identical to the direct orbit sum, but the exponential
    cancellation happens inside the exact psi limit, so chamber-wall
    arguments (where the direct sum loses every digit) are fine.
    """
    xq = _exact(X)
    yq = _exact(Y)
    tq = t if isinstance(t, Q) else Q(t)
    if tq <= 0:
        raise DomainError("heat kernel requires t > 0")
    d = rs.intrinsic_dim
    scaled = tuple(c / (2 * tq) for c in yq)
    bits = precision if precision is not None else 120
    psi = spherical_psi(rs, xq, scaled, precision=max(bits, 120))
    with mp.workprec(max(bits, 120)):
        expo = -(dot(xq, xq) + dot(yq, yq)) / (4 * tq)
        pref = _to_mp(Q(1, rs.weyl_order * (1 << d))) / (
            mp.pi ** (mpf(d) / 2) * _to_mp(pi_over(rs, rs.rho))
        )
        val = pref * _to_mp(tq) ** (-mpf(d) / 2 - rs.gamma) * mp.exp(_to_mp(expo)) * psi
    return float(val) if precision is None else val


# ---------------------------------------------------------------------------
# Richardson extrapolation for wall values of the elliptic kernels


_RICHARDSON_EPS = (1e-2, 1e-3, 1e-4)


def _extended_quotient_mp(rs: RootSystem, kind: str, xq: Vector, yq: Vector, t, bits: int):
    """sum_w sign(w) K(X, wY) / (pi(X) pi(Y)), the continuous extension target."""
    total, _, _ = _alt_sum_mp(rs, kind, xq, yq, t, bits)
    with mp.workprec(bits):
        return total / (_to_mp(pi_over(rs, xq)) * _to_mp(pi_over(rs, yq)))


def _richardson_wall(rs: RootSystem, kind: str, xq: Vector, yq: Vector, t,
                     x_singular: bool, y_singular: bool, bits: int):
    """Extrapolate the extended quotient to the wall along the rho direction.

    Offsets are exact rationals, so each sample is computed with exact
    geometry; the three-point Lagrange extrapolation to offset zero
    happens at the same precision.
    """
    rho_norm = math.sqrt(sum(float(c) ** 2 for c in rs.rho))
    svals = [Q(e / rho_norm) for e in _RICHARDSON_EPS]
    samples = []
    for s in svals:
        xs = vadd(xq, vscale(s, rs.rho)) if x_singular else xq
        ys = vadd(yq, vscale(s, rs.rho)) if y_singular else yq
        samples.append(_extended_quotient_mp(rs, kind, xs, ys, t, bits))
    with mp.workprec(bits):
        snodes = [_to_mp(s) for s in svals]
        total = mpf(0)
        for i, fi in enumerate(samples):
            wgt = mpf(1)
            for j, sj in enumerate(snodes):
                if j != i:
                    wgt *= sj / (sj - snodes[i])
            total += wgt * fi
    return total


# ---------------------------------------------------------------------------
# the public evaluator


def kernel_w(rs: RootSystem, kind: str, X, Y, t=None,
             precision: int | None = None, method: str | None = None) -> KernelValue:
    """Evaluate the alternating kernel K^W(X, Y) with automatic regime choice.

    Arguments live in the closed chamber (ambient coordinates).  ``method``
    forces "direct", "hp", "spherical", or "extrapolated"; when forced to
    "direct" a hopeless cancellation raises CancellationOverflow instead
    of falling back.
    """
    if kind not in KINDS:
        raise DomainError(f"unknown kernel kind {kind!r}")
    xf, yf = _floats(X), _floats(Y)
    if len(xf) != rs.ambient_dim or len(yf) != rs.ambient_dim:
        raise DomainError(f"{rs.name} takes {rs.ambient_dim}-coordinate points")
    _validate_domain(rs, kind, xf, yf, t)
    reg = min(regularity(rs, xf), regularity(rs, yf))
    tq = None if t is None else (t if isinstance(t, Q) else Q(t))

    if method == "direct" or (method is None and precision is None and reg >= SINGULAR_TOL):
        signed, maxabs, sumabs = _alt_sum_float(rs, kind, xf, yf, None if t is None else float(t))
        pix = pi_over(rs, xf)
        piy = pi_over(rs, yf)
        cancel = (sumabs / abs(signed)) if signed != 0 else math.inf
        hopeless = signed == 0 or abs(signed) < 64 * _EPS * maxabs
        bad_band = reg < FALLBACK_BAND and cancel > CANCEL_LIMIT
        if method == "direct":
            if hopeless:
                raise CancellationOverflow(
                    f"alternating sum retains no significant digits (cancellation ~ {cancel:.2e})"
                )
            return KernelValue(signed / (rs.weyl_order * pix * piy), kind, "direct", cancel)
        if not hopeless and not bad_band:
            return KernelValue(signed / (rs.weyl_order * pix * piy), kind, "direct", cancel)
        # fall through to the singular machinery

    if method == "hp" or (precision is not None and reg >= SINGULAR_TOL and method is None):
        bits = precision if precision is not None else _auto_bits(rs, reg)
        xq, yq = _exact(X), _exact(Y)
        total, maxabs, sumabs = _alt_sum_mp(rs, kind, xq, yq, tq, bits)
        with mp.workprec(bits):
            val = total / (rs.weyl_order * _to_mp(pi_over(rs, xq)) * _to_mp(pi_over(rs, yq)))
            cancel = float(sumabs / abs(total)) if total != 0 else math.inf
        return KernelValue(float(val), kind, "hp", cancel, precision_bits=bits,
                           details={"mp_value": val})

    # singular / wall machinery
    xq = _snap_to_face(rs, _exact(X), SINGULAR_TOL)
    yq = _snap_to_face(rs, _exact(Y), SINGULAR_TOL)
    bits = precision if precision is not None else max(220, _auto_bits(rs, max(reg, 1e-6)))
    if kind == "heat" and method in (None, "spherical"):
        val = heat_via_spherical(rs, xq, yq, tq, precision=bits)
        return KernelValue(float(val), kind, "spherical", 1.0, precision_bits=bits,
                           details={"mp_value": val})
    x_sing = regularity(rs, xq) < SINGULAR_TOL
    y_sing = regularity(rs, yq) < SINGULAR_TOL
    if not (x_sing or y_sing):
        # band fallback without an actual wall: plain high precision
        total, maxabs, sumabs = _alt_sum_mp(rs, kind, xq, yq, tq, bits)
        with mp.workprec(bits):
            val = total / (rs.weyl_order * _to_mp(pi_over(rs, xq)) * _to_mp(pi_over(rs, yq)))
            cancel = float(sumabs / abs(total)) if total != 0 else math.inf
        return KernelValue(float(val), kind, "hp", cancel, precision_bits=bits,
                           details={"mp_value": val})
    quot = _richardson_wall(rs, kind, xq, yq, None if tq is None else tq, x_sing, y_sing, bits)
    val = quot / rs.weyl_order
    return KernelValue(float(val), kind, "extrapolated", 1.0, precision_bits=bits,
                       details={"mp_value": val})


def kernel_w_batch(rs: RootSystem, kind: str, X, Ys: np.ndarray, t=None,
                   chunk: int = 2048) -> np.ndarray:
    """Vectorized K^W(X, y) over many regular points y (rows of Ys).

    Float-only fast path for quadrature and Monte Carlo; no wall handling.
    """
    mats, signs = rs.weyl_stack()
    x = np.asarray(_floats(X), dtype=float)
    ys = np.asarray(Ys, dtype=float)
    d = rs.intrinsic_dim
    nx2 = float(x @ x)
    roots = rs.roots_np()
    out = np.empty(len(ys), dtype=float)
    for lo in range(0, len(ys), chunk):
        block = ys[lo:lo + chunk]
        imgs = np.einsum("wij,mj->wmi", mats, block)
        diff2 = np.sum((imgs - x) ** 2, axis=2)
        if kind == "heat":
            terms = (4.0 * math.pi * t) ** (-d / 2.0) * np.exp(-diff2 / (4.0 * t))
        elif kind == "newton":
            r = np.sqrt(diff2)
            if d == 1:
                terms = -r / 2.0
            elif d == 2:
                terms = np.log(r) / (2.0 * math.pi)
            else:
                terms = r ** (2 - d) / ((2 - d) * surface_area(d))
        elif kind == "poisson":
            terms = (1.0 - nx2) / (surface_area(d) * diff2 ** (d / 2.0))
        else:
            ny2 = np.sum(block * block, axis=1)
            rim2 = nx2 * ny2[None, :] - 2.0 * np.einsum("wmi,i->wm", imgs, x) + 1.0
            if d == 2:
                terms = (np.log(diff2) - np.log(rim2)) / (4.0 * math.pi)
            elif d == 1:
                terms = (np.sqrt(rim2) - np.sqrt(diff2)) / 2.0
            else:
                terms = (diff2 ** ((2 - d) / 2.0) - rim2 ** ((2 - d) / 2.0)) / ((2 - d) * surface_area(d))
        signed = np.einsum("w,wm->m", signs, terms)
        piy = np.prod(block @ roots.T, axis=1)
        out[lo:lo + chunk] = signed / (rs.weyl_order * pi_over(rs, x) * piy)
    return out


# ---------------------------------------------------------------------------
# determinantal route for the A family


def suggest_heat_bits(X, Y, t, base: int = 160) -> int:
    """Working precision that absorbs small-t heat cancellation.

    The summand magnitudes of the alternating heat sum spread over at most
    (|X| + |Y|)^2 / (4t) nats; the returned bit count covers that spread
    plus a guard margin.
    """
    xf, yf = _floats(X), _floats(Y)
    nx = math.sqrt(sum(c * c for c in xf))
    ny = math.sqrt(sum(c * c for c in yf))
    spread = (nx + ny) ** 2 / (4.0 * float(t))
    return base + int(spread / math.log(2.0)) + 16


def det_heat_a(rs: RootSystem, X, Y, t: float) -> KernelValue:
    """Heat kernel on the A-family chamber via the one-dimensional determinant.

    det[g_t(x_i, y_j)] equals (4 pi t)^{-1/2} times the alternating orbit
    sum in the intrinsic (trace-zero) dimension, so the normalized kernel
    is (4 pi t)^{1/2} det / (|W| pi(X) pi(Y)).  LU elimination with partial
    pivoting performs the cancellation; the reported diagnostics bound the
    worst permanent-to-determinant collapse.
    """
    if rs.family != "A":
        raise DomainError("the determinant route applies to the A family only")
    if t is None or t <= 0:
        raise DomainError("heat kernel requires t > 0")
    xf, yf = _floats(X), _floats(Y)
    n = rs.ambient_dim
    g = np.empty((n, n), dtype=float)
    pref = (4.0 * math.pi * t) ** -0.5
    for i in range(n):
        for j in range(n):
            g[i, j] = pref * math.exp(-((xf[i] - yf[j]) ** 2) / (4.0 * t))
    det = float(np.linalg.det(g))
    max_term = float(np.prod(np.max(g, axis=1)))
    cancel = max(max_term / abs(det), 1.0) if det != 0 else math.inf
    pix = pi_over(rs, xf)
    piy = pi_over(rs, yf)
    value = math.sqrt(4.0 * math.pi * t) * det / (rs.weyl_order * pix * piy)
    return KernelValue(value, "heat", "determinant", cancel,
                       details={"det": det, "max_term": max_term})


# ---------------------------------------------------------------------------
# curved-model heat kernel (compact-dual flat limit checks)


def curved_heat(rs: RootSystem, X, Y, t: float) -> float:
    """Heat kernel of the curved model in its product-of-sinh normalization.

    p(X, Y) = e^{-|rho|^2 t} (prod sinh<a, X> prod sinh<a, Y>)^{-1}
              * sum_w sign(w) h_t(X - wY)

    with h_t the flat Gaussian in the intrinsic dimension.  No 1/|W| here:
    the small-t ratio against the flat alternating kernel, corrected by
    pi(X)pi(Y)/(prod sinh)(X)(Y), converges to |W|.
    """
    if t is None or t <= 0:
        raise DomainError("heat kernel requires t > 0")
    xf, yf = _floats(X), _floats(Y)
    signed, _, _ = _alt_sum_float(rs, "heat", xf, yf, float(t))
    rho2 = sum(float(c) ** 2 for c in rs.rho)
    sx = 1.0
    sy = 1.0
    for a in rs.positive_roots:
        af = [float(c) for c in a]
        sx *= math.sinh(sum(c * v for c, v in zip(af, xf)))
        sy *= math.sinh(sum(c * v for c, v in zip(af, yf)))
    if sx == 0.0 or sy == 0.0:
        raise DomainError("curved kernel needs regular (open-chamber) arguments")
    return math.exp(-rho2 * t) * signed / (sx * sy)


# ---------------------------------------------------------------------------
# the derivative-pairing constant


def c_constant(rs: RootSystem, subset=None) -> Q:
    """Exact value of pi_S(d/dx) applied to pi_S over a pi-closed subset.

    Computed by monomial contraction (sum of squared coefficients weighted
    by factorials), which is polynomial in the subset size; equals
    |W_S| pi_S(rho_S) / 2^{|S|}.
    """
    if subset is None:
        vecs = list(rs.positive_roots)
    else:
        idx = subset.sorted() if hasattr(subset, "sorted") else sorted(subset)
        vecs = [rs.positive_roots[i] for i in idx]
    return derivative_pairing(vecs)
