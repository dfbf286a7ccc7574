"""Root systems, Weyl groups, and exact chamber geometry.

Coordinate realizations, all in exact rational arithmetic:

* ``A{k}`` lives in ``R^{k+1}`` as the trace-zero hyperplane, roots
  ``e_i - e_j``; the intrinsic dimension is ``k``.
* ``B{n}``, ``C{n}``, ``D{n}`` live in ``R^n`` with the standard roots.
* ``G2`` uses the 3-coordinate slice ``{(a, b, a - b)}``; the root vectors
  are the in-slice representatives of the root functionals.
* ``F4`` lives in ``R^4`` with simple roots ``e2 - e3``, ``e3 - e4``,
  ``e4``, ``(e1 - e2 - e3 - e4) / 2``.
* ``E6``, ``E7``, ``E8`` use the standard 8-coordinate simple-root tables.

The Euclidean dot product stands in for the invariant bilinear form.  Every
identity used downstream is covariant under a global rescaling of the
realization, so no result depends on the absolute normalization.

Degenerate small ranks (``B1``, ``C2``, ``D2``, ``D3``) are admitted on
purpose; ``B1`` is the primary rank-one oracle for kernel formulas.

Naming: the public name ``A3`` corresponds to ``RootSystemSpec("A", 4)``
(four ambient coordinates); for every other family the spec rank is the
subscript.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction as Q
from typing import Iterable, Sequence

import numpy as np

Vector = tuple[Q, ...]

_FAMILIES = ("A", "B", "C", "D", "G2", "F4", "E6", "E7", "E8")

DEFAULT_WEYL_BUDGET = 200_000


class RootSystemError(ValueError):
    """Invalid root-system construction or argument domain."""


class ChamberError(RootSystemError):
    """A point violates the closed-chamber or root-span preconditions."""


class EnumerationLimit(RootSystemError):
    """Weyl enumeration would exceed the allowed element budget."""


# ---------------------------------------------------------------------------
# exact vector / matrix helpers


_Q_CACHE: dict[tuple[int, int], Q] = {}


def _q(num: int, den: int = 1) -> Q:
    f = Q(num, den)
    key = (f.numerator, f.denominator)
    got = _Q_CACHE.get(key)
    if got is None:
        if len(_Q_CACHE) < 1 << 16:
            _Q_CACHE[key] = f
        return f
    return got


def as_vector(coords: Iterable) -> Vector:
    """Coerce to a tuple of Fractions; accepts ints, strings 'p/q', floats."""
    out = []
    for c in coords:
        if isinstance(c, Q):
            out.append(c)
        elif isinstance(c, int):
            out.append(_q(c))
        elif isinstance(c, str):
            out.append(Q(c))
        elif isinstance(c, float):
            out.append(Q(c))
        else:
            raise RootSystemError(f"cannot interpret coordinate {c!r}")
    return tuple(out)


def dot(u: Sequence, v: Sequence):
    if len(u) != len(v):
        raise RootSystemError(f"dimension mismatch: {len(u)} vs {len(v)}")
    return sum(a * b for a, b in zip(u, v))


def vadd(u: Vector, v: Vector) -> Vector:
    return tuple(a + b for a, b in zip(u, v))


def vsub(u: Vector, v: Vector) -> Vector:
    return tuple(a - b for a, b in zip(u, v))


def vscale(c, u: Vector) -> Vector:
    return tuple(c * a for a in u)


def _mat_det(rows: Sequence[Sequence[Q]]) -> Q:
    """Determinant by fraction-free-ish Gaussian elimination, exact."""
    n = len(rows)
    m = [list(r) for r in rows]
    det = Q(1)
    for col in range(n):
        pivot = None
        for r in range(col, n):
            if m[r][col] != 0:
                pivot = r
                break
        if pivot is None:
            return Q(0)
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        det *= m[col][col]
        inv = 1 / m[col][col]
        for r in range(col + 1, n):
            if m[r][col] != 0:
                f = m[r][col] * inv
                for c in range(col, n):
                    m[r][c] -= f * m[col][c]
    return det


def _mat_solve(rows: Sequence[Sequence[Q]], rhs_cols: Sequence[Sequence[Q]]) -> list[list[Q]]:
    """Solve M X = B exactly for several right-hand sides (columns of B)."""
    n = len(rows)
    k = len(rhs_cols)
    aug = [list(rows[i]) + [rhs_cols[j][i] for j in range(k)] for i in range(n)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            raise RootSystemError("singular matrix in exact solve")
        if pivot != col:
            aug[col], aug[pivot] = aug[pivot], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [[aug[i][n + j] for i in range(n)] for j in range(k)]


def _mat_inv(rows: Sequence[Sequence[Q]]) -> list[list[Q]]:
    n = len(rows)
    eye = [[_q(1) if i == j else _q(0) for i in range(n)] for j in range(n)]
    cols = _mat_solve(rows, eye)
    return [[cols[j][i] for j in range(n)] for i in range(n)]


def _perm_parity(perm: Sequence[int]) -> int:
    seen = [False] * len(perm)
    sign = 1
    for i in range(len(perm)):
        if seen[i]:
            continue
        j = i
        clen = 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            clen += 1
        if clen % 2 == 0:
            sign = -sign
    return sign


# ---------------------------------------------------------------------------
# specs and public value types


@dataclass(frozen=True)
class RootSystemSpec:
    """Family plus rank parameter.

    For family ``A`` the rank parameter is the number of ambient
    coordinates, so ``RootSystemSpec("A", 2)`` is the system usually
    called A1.  For all other families rank is the usual subscript.
    """

    family: str
    rank: int

    def __post_init__(self) -> None:
        fam, n = self.family, self.rank
        if fam not in _FAMILIES:
            raise RootSystemError(f"unknown family {fam!r}")
        limits = {"A": 1, "B": 1, "C": 2, "D": 2}
        if fam in limits:
            if n < limits[fam]:
                raise RootSystemError(f"family {fam} requires rank >= {limits[fam]}")
        elif fam == "G2" and n != 2:
            raise RootSystemError("G2 has rank 2")
        elif fam == "F4" and n != 4:
            raise RootSystemError("F4 has rank 4")
        elif fam.startswith("E") and n != int(fam[1]):
            raise RootSystemError(f"{fam} has rank {fam[1]}")

    @property
    def name(self) -> str:
        if self.family == "A":
            return f"A{self.rank - 1}"
        if self.family in ("B", "C", "D"):
            return f"{self.family}{self.rank}"
        return self.family


def spec_from_name(name: str) -> RootSystemSpec:
    """Parse 'B2', 'A3', 'G2', 'F4', 'E6' into a spec."""
    name = name.strip().upper()
    if name in ("G2", "F4", "E6", "E7", "E8"):
        return RootSystemSpec(name, int(name[1]))
    fam, sub = name[:1], name[1:]
    if fam not in ("A", "B", "C", "D") or not sub.isdigit():
        raise RootSystemError(f"cannot parse system name {name!r}")
    k = int(sub)
    return RootSystemSpec(fam, k + 1 if fam == "A" else k)


@dataclass(frozen=True)
class RootSubset:
    """Subset of the positive roots, by index.

    ``pi_closure`` records whether the subset is the full vanishing set of
    some point of the closed chamber (equivalently, the positive system of
    a standard parabolic subsystem).
    """

    indices: frozenset[int]
    pi_closure: bool

    def __len__(self) -> int:
        return len(self.indices)

    def sorted(self) -> tuple[int, ...]:
        return tuple(sorted(self.indices))


@dataclass(frozen=True)
class ChamberPoint:
    """A point of the closed Weyl chamber with its vanishing data."""

    coords: tuple
    vanishing: frozenset[int]
    regular: bool

    @property
    def exact(self) -> bool:
        return all(isinstance(c, Q) for c in self.coords)


@dataclass(frozen=True)
class WeylElement:
    """One Weyl group element.

    Classical families carry a signed-permutation encoding
    (``(w x)_i = signs[i] * x[perm[i]]``); G2 and F4 carry the ambient
    orthogonal rational matrix; E-types carry the integer matrix in the
    simple-root basis together with shared basis/dual-basis tuples.
    ``sign`` is the determinant on the root span.
    """

    sign: int
    perm: tuple[int, ...] | None = None
    signs: tuple[int, ...] | None = None
    mat: tuple[tuple[Q, ...], ...] | None = None
    bmat: tuple[tuple[int, ...], ...] | None = None
    basis: tuple[Vector, ...] | None = None
    dual: tuple[Vector, ...] | None = None

    def apply(self, X: Sequence):
        if self.perm is not None:
            return tuple(s * X[p] for s, p in zip(self.signs, self.perm))
        if self.mat is not None:
            return tuple(dot(row, X) for row in self.mat)
        coords = [dot(d, X) for d in self.dual]
        rem = list(X)
        for c, b in zip(coords, self.basis):
            for k in range(len(rem)):
                rem[k] -= c * b[k]
        out = rem
        new = [dot(row, coords) for row in self.bmat]
        for c, b in zip(new, self.basis):
            for k in range(len(out)):
                out[k] += c * b[k]
        return tuple(out)

    def compose(self, other: "WeylElement") -> "WeylElement":
        """self after other: (self.compose(other)).apply(x) == self.apply(other.apply(x))."""
        if self.perm is not None and other.perm is not None:
            perm = tuple(other.perm[p] for p in self.perm)
            signs = tuple(s * other.signs[p] for s, p in zip(self.signs, self.perm))
            return WeylElement(self.sign * other.sign, perm=perm, signs=signs)
        if self.mat is not None and other.mat is not None:
            n = len(self.mat)
            mat = tuple(
                tuple(sum(self.mat[i][k] * other.mat[k][j] for k in range(n)) for j in range(n))
                for i in range(n)
            )
            return WeylElement(self.sign * other.sign, mat=mat)
        if self.bmat is not None and other.bmat is not None:
            n = len(self.bmat)
            bmat = tuple(
                tuple(sum(self.bmat[i][k] * other.bmat[k][j] for k in range(n)) for j in range(n))
                for i in range(n)
            )
            return WeylElement(self.sign * other.sign, bmat=bmat, basis=self.basis, dual=self.dual)
        raise RootSystemError("cannot compose differently encoded elements")

    def inverse(self) -> "WeylElement":
        if self.perm is not None:
            inv = [0] * len(self.perm)
            for i, p in enumerate(self.perm):
                inv[p] = i
            signs = tuple(self.signs[inv[j]] for j in range(len(inv)))
            return WeylElement(self.sign, perm=tuple(inv), signs=signs)
        if self.mat is not None:
            # orthogonal, so the inverse is the transpose
            n = len(self.mat)
            mat = tuple(tuple(self.mat[j][i] for j in range(n)) for i in range(n))
            return WeylElement(self.sign, mat=mat)
        binv = _mat_inv(self.bmat)
        bmat = tuple(tuple(int(x) for x in row) for row in binv)
        return WeylElement(self.sign, bmat=bmat, basis=self.basis, dual=self.dual)

    def key(self):
        if self.perm is not None:
            return (self.perm, self.signs)
        if self.mat is not None:
            return self.mat
        return self.bmat

    def is_identity(self) -> bool:
        if self.perm is not None:
            return all(p == i for i, p in enumerate(self.perm)) and all(s == 1 for s in self.signs)
        rows = self.mat if self.mat is not None else self.bmat
        return all(rows[i][j] == (1 if i == j else 0) for i in range(len(rows)) for j in range(len(rows)))


# ---------------------------------------------------------------------------
# root system construction


def _roots_A(n: int) -> tuple[list[Vector], list[int]]:
    roots = []
    for i in range(n):
        for j in range(i + 1, n):
            v = [_q(0)] * n
            v[i], v[j] = _q(1), _q(-1)
            roots.append(tuple(v))
    simples = []
    for i in range(n - 1):
        v = [_q(0)] * n
        v[i], v[i + 1] = _q(1), _q(-1)
        simples.append(roots.index(tuple(v)))
    return roots, simples


def _roots_BCD(family: str, n: int) -> tuple[list[Vector], list[int]]:
    roots: list[Vector] = []
    for i in range(n):
        for j in range(i + 1, n):
            v = [_q(0)] * n
            v[i], v[j] = _q(1), _q(-1)
            roots.append(tuple(v))
    for i in range(n):
        for j in range(i + 1, n):
            v = [_q(0)] * n
            v[i], v[j] = _q(1), _q(1)
            roots.append(tuple(v))
    if family == "B":
        for i in range(n):
            v = [_q(0)] * n
            v[i] = _q(1)
            roots.append(tuple(v))
    elif family == "C":
        for i in range(n):
            v = [_q(0)] * n
            v[i] = _q(2)
            roots.append(tuple(v))
    simples = []
    for i in range(n - 1):
        v = [_q(0)] * n
        v[i], v[i + 1] = _q(1), _q(-1)
        simples.append(roots.index(tuple(v)))
    if family == "B":
        v = [_q(0)] * n
        v[-1] = _q(1)
        simples.append(roots.index(tuple(v)))
    elif family == "C":
        v = [_q(0)] * n
        v[-1] = _q(2)
        simples.append(roots.index(tuple(v)))
    else:
        if n >= 2:
            v = [_q(0)] * n
            v[-2], v[-1] = _q(1), _q(1)
            simples.append(roots.index(tuple(v)))
    return roots, simples


def _roots_G2() -> tuple[list[Vector], list[int]]:
    # In-slice representatives of the root functionals on h = (a, b, a-b):
    # alpha(h) = a - b (short simple), beta(h) = 2b - a (long simple).
    alpha = (Q(1, 3), Q(-1, 3), Q(2, 3))
    beta = (_q(0), _q(1), _q(-1))
    roots = [
        alpha,
        beta,
        vadd(alpha, beta),                      # b
        vadd(vscale(_q(2), alpha), beta),       # a
        vadd(vscale(_q(3), alpha), beta),       # 2a - b
        vadd(vscale(_q(3), alpha), vscale(_q(2), beta)),  # a + b
    ]
    return roots, [0, 1]


def _roots_F4() -> tuple[list[Vector], list[int]]:
    roots: list[Vector] = []
    for i in range(4):
        for j in range(i + 1, 4):
            v = [_q(0)] * 4
            v[i], v[j] = _q(1), _q(-1)
            roots.append(tuple(v))
    for i in range(4):
        for j in range(i + 1, 4):
            v = [_q(0)] * 4
            v[i], v[j] = _q(1), _q(1)
            roots.append(tuple(v))
    for i in range(4):
        v = [_q(0)] * 4
        v[i] = _q(1)
        roots.append(tuple(v))
    for s1 in (1, -1):
        for s2 in (1, -1):
            for s3 in (1, -1):
                roots.append((Q(1, 2), Q(s1, 2), Q(s2, 2), Q(s3, 2)))
    simples = [
        roots.index((_q(0), _q(1), _q(-1), _q(0))),
        roots.index((_q(0), _q(0), _q(1), _q(-1))),
        roots.index((_q(0), _q(0), _q(0), _q(1))),
        roots.index((Q(1, 2), Q(-1, 2), Q(-1, 2), Q(-1, 2))),
    ]
    return roots, simples


_E_SIMPLES = {
    6: None,  # filled below
    7: None,
    8: None,
}


def _e_simple_roots(rank: int) -> list[Vector]:
    a1 = (Q(1, 2), Q(-1, 2), Q(-1, 2), Q(-1, 2), Q(-1, 2), Q(-1, 2), Q(-1, 2), Q(1, 2))
    a2 = as_vector([1, 1, 0, 0, 0, 0, 0, 0])
    chain = []
    for i in range(6):
        v = [_q(0)] * 8
        v[i], v[i + 1] = _q(-1), _q(1)
        chain.append(tuple(v))
    simples = [a1, a2] + chain[: rank - 2]
    return simples


def _roots_E(rank: int) -> tuple[list[Vector], list[int]]:
    simples = _e_simple_roots(rank)
    norms = [dot(s, s) for s in simples]
    allroots: set[Vector] = set(simples) | {vscale(_q(-1), s) for s in simples}
    frontier = list(allroots)
    while frontier:
        new = []
        for beta in frontier:
            for s, n2 in zip(simples, norms):
                r = vsub(beta, vscale(2 * dot(beta, s) / n2, s))
                if r not in allroots:
                    allroots.add(r)
                    new.append(r)
        frontier = new
    # positive = nonnegative coordinates in the simple-root basis
    gram = [[dot(a, b) for b in simples] for a in simples]
    ginv = _mat_inv(gram)
    positives = []
    for r in allroots:
        rhs = [dot(r, s) for s in simples]
        coords = [sum(ginv[i][j] * rhs[j] for j in range(len(simples))) for i in range(len(simples))]
        if all(c >= 0 for c in coords):
            positives.append((sum(coords), r))
    positives.sort(key=lambda p: (p[0], p[1]))
    roots = [r for _, r in positives]
    return roots, [roots.index(s) for s in simples]


_WEYL_ORDER_EXC = {"G2": 12, "F4": 1152, "E6": 51840, "E7": 2903040, "E8": 696729600}


def weyl_order_of(family: str, rank: int) -> int:
    if family == "A":
        return math.factorial(rank)
    if family in ("B", "C"):
        return (1 << rank) * math.factorial(rank)
    if family == "D":
        return (1 << (rank - 1)) * math.factorial(rank)
    return _WEYL_ORDER_EXC[family]


class RootSystem:
    """Immutable bundle of exact root data with lazy numeric caches."""

    def __init__(self, spec: RootSystemSpec):
        self.spec = spec
        self.family = spec.family
        self.rank = spec.rank
        self.name = spec.name
        if spec.family == "A":
            roots, simples = _roots_A(spec.rank)
            self.ambient_dim = spec.rank
            self.intrinsic_dim = spec.rank - 1
        elif spec.family in ("B", "C", "D"):
            roots, simples = _roots_BCD(spec.family, spec.rank)
            self.ambient_dim = spec.rank
            self.intrinsic_dim = spec.rank
        elif spec.family == "G2":
            roots, simples = _roots_G2()
            self.ambient_dim = 3
            self.intrinsic_dim = 2
        elif spec.family == "F4":
            roots, simples = _roots_F4()
            self.ambient_dim = 4
            self.intrinsic_dim = 4
        else:
            roots, simples = _roots_E(spec.rank)
            self.ambient_dim = 8
            self.intrinsic_dim = spec.rank
        self.positive_roots: tuple[Vector, ...] = tuple(roots)
        self.gamma = len(roots)
        self.simple_indices: tuple[int, ...] = tuple(simples)
        self.simple_roots: tuple[Vector, ...] = tuple(roots[i] for i in simples)
        self.rho: Vector = tuple(sum(col) for col in zip(*roots)) if roots else tuple()
        # cartan_matrix[i][j] = 2 <a_i, a_j> / <a_j, a_j>
        self.cartan_matrix: tuple[tuple[int, ...], ...] = tuple(
            tuple(
                int(2 * dot(a, b) / dot(b, b))
                for b in self.simple_roots
            )
            for a in self.simple_roots
        )
        d = len(self.simple_roots)
        if d:
            cinv = _mat_inv([[_q(c) for c in row] for row in self.cartan_matrix])
            # omega_i = sum_k (C^{-1})_{ik} alpha_k  with C_{kj} as above
            self.fundamental_weights: tuple[Vector, ...] = tuple(
                tuple(
                    sum(cinv[i][k] * self.simple_roots[k][m] for k in range(d))
                    for m in range(self.ambient_dim)
                )
                for i in range(d)
            )
        else:
            self.fundamental_weights = tuple()
        self.weyl_order = weyl_order_of(spec.family, spec.rank)
        self._gram = [[dot(a, b) for b in self.simple_roots] for a in self.simple_roots]
        self._gram_inv = _mat_inv(self._gram) if d else []
        self._dual_basis: tuple[Vector, ...] = tuple(
            tuple(
                sum(self._gram_inv[i][j] * self.simple_roots[j][m] for j in range(d))
                for m in range(self.ambient_dim)
            )
            for i in range(d)
        )
        self._weyl: tuple[WeylElement, ...] | None = None
        self._np_cache: dict[str, np.ndarray] = {}

    # -- numeric caches ---------------------------------------------------

    def roots_np(self) -> np.ndarray:
        got = self._np_cache.get("roots")
        if got is None:
            got = np.array([[float(c) for c in r] for r in self.positive_roots], dtype=float)
            self._np_cache["roots"] = got
        return got

    def span_basis(self) -> np.ndarray:
        """Orthonormal basis of the root span, shape (ambient, intrinsic)."""
        got = self._np_cache.get("span")
        if got is None:
            a = np.array([[float(c) for c in s] for s in self.simple_roots], dtype=float).T
            q, _ = np.linalg.qr(a)
            got = q[:, : self.intrinsic_dim]
            self._np_cache["span"] = got
        return got

    def weyl_stack(self) -> tuple[np.ndarray, np.ndarray]:
        """Float matrices (|W|, ambient, ambient) and signs (|W|,)."""
        mats = self._np_cache.get("wmats")
        if mats is None:
            elems = enumerate_weyl(self)
            n = self.ambient_dim
            mats = np.empty((len(elems), n, n), dtype=float)
            signs = np.empty(len(elems), dtype=float)
            eye = [tuple(_q(1) if i == j else _q(0) for j in range(n)) for i in range(n)]
            for k, w in enumerate(elems):
                cols = [w.apply(eye[i]) for i in range(n)]  # images of basis vectors
                for i in range(n):
                    for j in range(n):
                        mats[k, i, j] = float(cols[j][i])
                signs[k] = w.sign
            self._np_cache["wmats"] = mats
            self._np_cache["wsigns"] = signs
        return self._np_cache["wmats"], self._np_cache["wsigns"]

    # -- span / coordinates -----------------------------------------------

    def span_coords(self, X: Sequence[Q]) -> list[Q]:
        """Exact coordinates of the span component of X in the simple basis."""
        rhs = [dot(s, X) for s in self.simple_roots]
        d = len(self.simple_roots)
        return [sum(self._gram_inv[i][j] * rhs[j] for j in range(d)) for i in range(d)]

    def in_span(self, X: Sequence[Q]) -> bool:
        coords = self.span_coords(X)
        recon = [Q(0)] * self.ambient_dim
        for c, s in zip(coords, self.simple_roots):
            for m in range(self.ambient_dim):
                recon[m] += c * s[m]
        return all(r == x for r, x in zip(recon, X))

    def __repr__(self) -> str:
        return f"RootSystem({self.name})"


_SYSTEM_CACHE: dict[RootSystemSpec, RootSystem] = {}


def build_root_system(spec: RootSystemSpec | str) -> RootSystem:
    """Build (or fetch the cached) root system for a spec or a name like 'B2'."""
    if isinstance(spec, str):
        spec = spec_from_name(spec)
    got = _SYSTEM_CACHE.get(spec)
    if got is None:
        got = RootSystem(spec)
        _SYSTEM_CACHE[spec] = got
    return got


# ---------------------------------------------------------------------------
# pi, rho, subsets


def pi_over(rs: RootSystem, X: Sequence, subset: RootSubset | Iterable[int] | None = None):
    """Product of <alpha, X> over a subset of positive roots (default: all).

    Exact on Fraction input, float on float input.
    """
    if subset is None:
        idx: Iterable[int] = range(rs.gamma)
    elif isinstance(subset, RootSubset):
        idx = subset.sorted()
    else:
        idx = sorted(subset)
    result = None
    for i in idx:
        v = dot(rs.positive_roots[i], X)
        result = v if result is None else result * v
    if result is None:
        return _q(1) if all(isinstance(c, Q) for c in X) else 1.0
    return result


def rho_of(rs: RootSystem, subset: RootSubset | Iterable[int] | None = None) -> Vector:
    """Sum of the positive roots in a subset (default: all, giving rho)."""
    if subset is None:
        return rs.rho
    idx = subset.sorted() if isinstance(subset, RootSubset) else sorted(subset)
    out = [_q(0)] * rs.ambient_dim
    for i in idx:
        for m in range(rs.ambient_dim):
            out[m] += rs.positive_roots[i][m]
    return tuple(out)


def full_subset(rs: RootSystem) -> RootSubset:
    return RootSubset(frozenset(range(rs.gamma)), True)


def empty_subset() -> RootSubset:
    return RootSubset(frozenset(), True)


def subset_from_simples(rs: RootSystem, simple_positions: Iterable[int]) -> RootSubset:
    """Positive roots supported on the given simple roots (a pi-closed set).

    ``simple_positions`` indexes into ``rs.simple_roots`` (0-based).
    """
    chosen = frozenset(simple_positions)
    idx = set()
    for i, alpha in enumerate(rs.positive_roots):
        coords = rs.span_coords(alpha)
        support = {k for k, c in enumerate(coords) if c != 0}
        if support <= chosen:
            idx.add(i)
    return RootSubset(frozenset(idx), True)


def pi_closure_subsets(rs: RootSystem) -> dict[frozenset[int], RootSubset]:
    """All vanishing sets of chamber points, keyed by vanishing simple positions."""
    d = len(rs.simple_roots)
    out = {}
    for r in range(d + 1):
        for combo in itertools.combinations(range(d), r):
            out[frozenset(combo)] = subset_from_simples(rs, combo)
    return out


def subsystem_simple_indices(rs: RootSystem, subset: RootSubset) -> tuple[int, ...]:
    """Indecomposable members of a pi-closed subset (its simple roots)."""
    if not subset.pi_closure:
        raise RootSystemError("subsystem structure requires a pi-closed subset")
    members = subset.sorted()
    vecs = {i: rs.positive_roots[i] for i in members}
    keyset = set(vecs.values())
    out = []
    for i in members:
        decomposable = False
        for j in members:
            if j == i:
                continue
            diff = vsub(vecs[i], vecs[j])
            if diff in keyset:
                decomposable = True
                break
        if not decomposable:
            out.append(i)
    return tuple(out)


# ---------------------------------------------------------------------------
# Weyl enumeration


def _reflection_matrix(rs: RootSystem, alpha: Vector) -> tuple[tuple[Q, ...], ...]:
    n = rs.ambient_dim
    n2 = dot(alpha, alpha)
    return tuple(
        tuple(
            (_q(1) if i == j else _q(0)) - 2 * alpha[i] * alpha[j] / n2
            for j in range(n)
        )
        for i in range(n)
    )


def _simple_reflection_bmat(rs: RootSystem, i: int) -> tuple[tuple[int, ...], ...]:
    d = len(rs.simple_roots)
    rows = []
    for k in range(d):
        row = []
        for j in range(d):
            v = 1 if k == j else 0
            if k == i:
                v -= rs.cartan_matrix[j][i]
            row.append(v)
        rows.append(tuple(row))
    return tuple(rows)


def _enumerate_classical(rs: RootSystem) -> list[WeylElement]:
    n = rs.rank
    out = []
    if rs.family == "A":
        for perm in itertools.permutations(range(n)):
            out.append(WeylElement(_perm_parity(perm), perm=perm, signs=(1,) * n))
        return out
    for perm in itertools.permutations(range(n)):
        par = _perm_parity(perm)
        for signs in itertools.product((1, -1), repeat=n):
            neg = signs.count(-1)
            if rs.family == "D" and neg % 2:
                continue
            sgn = par if rs.family == "D" else par * (1 if neg % 2 == 0 else -1)
            out.append(WeylElement(sgn, perm=perm, signs=signs))
    return out


def _enumerate_bfs_matrix(rs: RootSystem) -> list[WeylElement]:
    n = rs.ambient_dim
    gens = [WeylElement(-1, mat=_reflection_matrix(rs, a)) for a in rs.simple_roots]
    ident = WeylElement(1, mat=tuple(tuple(_q(1) if i == j else _q(0) for j in range(n)) for i in range(n)))
    seen = {ident.key(): ident}
    order = [ident]
    frontier = [ident]
    while frontier:
        new = []
        for w in frontier:
            for g in gens:
                cand = g.compose(w)
                if cand.key() not in seen:
                    seen[cand.key()] = cand
                    order.append(cand)
                    new.append(cand)
        frontier = new
    return order


def _enumerate_bfs_basis(rs: RootSystem) -> list[WeylElement]:
    d = len(rs.simple_roots)
    basis = rs.simple_roots
    dual = rs._dual_basis
    gens = [
        WeylElement(-1, bmat=_simple_reflection_bmat(rs, i), basis=basis, dual=dual)
        for i in range(d)
    ]
    ident = WeylElement(1, bmat=tuple(tuple(1 if i == j else 0 for j in range(d)) for i in range(d)),
                        basis=basis, dual=dual)
    seen = {ident.key(): ident}
    order = [ident]
    frontier = [ident]
    while frontier:
        new = []
        for w in frontier:
            for g in gens:
                cand = g.compose(w)
                if cand.key() not in seen:
                    seen[cand.key()] = cand
                    order.append(cand)
                    new.append(cand)
        frontier = new
    return order


def enumerate_weyl(rs: RootSystem, budget: int | None = None) -> tuple[WeylElement, ...]:
    """Every Weyl element, identity first, in a fixed deterministic order.

    Refuses to materialize groups larger than the budget (default 200000);
    E8 in particular is never enumerated by default.
    """
    if rs._weyl is not None:
        return rs._weyl
    limit = DEFAULT_WEYL_BUDGET if budget is None else budget
    if rs.weyl_order > limit:
        raise EnumerationLimit(
            f"|W({rs.name})| = {rs.weyl_order} exceeds the enumeration budget {limit}"
        )
    if rs.family in ("A", "B", "C", "D"):
        elems = _enumerate_classical(rs)
    elif rs.family in ("G2", "F4"):
        elems = _enumerate_bfs_matrix(rs)
    else:
        elems = _enumerate_bfs_basis(rs)
    if len(elems) != rs.weyl_order:
        raise RootSystemError(
            f"enumeration bug: got {len(elems)} elements, expected {rs.weyl_order}"
        )
    rs._weyl = tuple(elems)
    return rs._weyl


def apply_weyl(w: WeylElement, X: Sequence):
    return w.apply(X)


def weyl_sign(w: WeylElement) -> int:
    return w.sign


def stabilizer(rs: RootSystem, X: Sequence[Q]) -> tuple[tuple[WeylElement, ...], RootSubset]:
    """Exact stabilizer of a closed-chamber point, with its vanishing set."""
    X = as_vector(X)
    elems = enumerate_weyl(rs)
    fixed = tuple(w for w in elems if w.apply(X) == X)
    vanish = frozenset(i for i, a in enumerate(rs.positive_roots) if dot(a, X) == 0)
    return fixed, RootSubset(vanish, True)


# ---------------------------------------------------------------------------
# chamber geometry


def regularity(rs: RootSystem, X: Sequence) -> float:
    """min over roots of |alpha(X)| / (|alpha| |X|); zero for X = 0."""
    xf = [float(c) for c in X]
    nx = math.sqrt(sum(c * c for c in xf))
    if nx == 0.0:
        return 0.0
    best = math.inf
    for a in rs.positive_roots:
        af = [float(c) for c in a]
        na = math.sqrt(sum(c * c for c in af))
        val = abs(sum(c * x for c, x in zip(af, xf))) / (na * nx)
        best = min(best, val)
    return best


def chamber_point(rs: RootSystem, coords: Iterable, tol: float = 1e-8) -> ChamberPoint:
    """Validate a closed-chamber point and record its vanishing roots.

    Exact input (ints, Fractions, 'p/q' strings) is tested exactly; float
    input uses the relative tolerance ``tol`` per root.
    """
    raw = tuple(coords)
    exact = all(isinstance(c, (int, Q, str)) for c in raw)
    if exact:
        X = as_vector(raw)
        if len(X) != rs.ambient_dim:
            raise ChamberError(f"{rs.name} points have {rs.ambient_dim} coordinates")
        if not rs.in_span(X):
            raise ChamberError(f"point {X} is not in the root span of {rs.name}")
        vanishing = set()
        for i, a in enumerate(rs.positive_roots):
            v = dot(a, X)
            if v < 0:
                raise ChamberError(f"<alpha, X> < 0 for root {i}: not in the closed chamber")
            if v == 0:
                vanishing.add(i)
        return ChamberPoint(X, frozenset(vanishing), not vanishing)
    xf = tuple(float(c) for c in raw)
    if len(xf) != rs.ambient_dim:
        raise ChamberError(f"{rs.name} points have {rs.ambient_dim} coordinates")
    nx = math.sqrt(sum(c * c for c in xf)) or 1.0
    basis = rs.span_basis()
    proj = basis @ (basis.T @ np.array(xf))
    if float(np.max(np.abs(proj - np.array(xf)))) > tol * nx:
        raise ChamberError(f"point {xf} is not in the root span of {rs.name}")
    vanishing = set()
    for i, a in enumerate(rs.positive_roots):
        af = [float(c) for c in a]
        na = math.sqrt(sum(c * c for c in af))
        v = sum(c * x for c, x in zip(af, xf))
        if v < -tol * na * nx:
            raise ChamberError(f"<alpha, X> < 0 for root {i}: not in the closed chamber")
        if abs(v) <= tol * na * nx:
            vanishing.add(i)
    return ChamberPoint(xf, frozenset(vanishing), not vanishing)


def project_to_chamber(rs: RootSystem, X: Sequence, tol: float = 1e-12) -> tuple[ChamberPoint, WeylElement]:
    """Dominant representative (X_plus, w) with X_plus = w X.

    Among all elements sending X into the closed chamber, the first one in
    the fixed enumeration order is returned, so the identity wins whenever
    X is already dominant.
    """
    exact = all(isinstance(c, (int, Q)) for c in X)
    Xv = as_vector(X) if exact else tuple(float(c) for c in X)
    for w in enumerate_weyl(rs):
        img = w.apply(Xv)
        ok = True
        for a in rs.simple_roots:
            v = dot(a, img)
            if (v < 0) if exact else (float(v) < -tol):
                ok = False
                break
        if ok:
            cp = chamber_point(rs, img) if exact else chamber_point(rs, [float(c) for c in img])
            return cp, w
    raise RootSystemError("no Weyl image is dominant; unreachable for valid input")


def face_representative(
    rs: RootSystem,
    vanishing_simples: Iterable[int],
    coefficients: Sequence | None = None,
) -> ChamberPoint:
    """Chamber point with prescribed vanishing simple roots.

    The representative is the sum of the fundamental weights of the
    non-vanishing simple positions (positive coefficients optional).
    """
    vanish = frozenset(vanishing_simples)
    d = len(rs.simple_roots)
    if not vanish <= set(range(d)):
        raise RootSystemError("vanishing set must index the simple roots")
    live = [i for i in range(d) if i not in vanish]
    if coefficients is None:
        coeffs = {i: _q(1) for i in live}
    else:
        cl = list(coefficients)
        if len(cl) != len(live):
            raise RootSystemError("need one coefficient per non-vanishing simple root")
        coeffs = {}
        for i, c in zip(live, cl):
            cq = Q(c) if not isinstance(c, Q) else c
            if cq <= 0:
                raise RootSystemError("face coefficients must be positive")
            coeffs[i] = cq
    X = [_q(0)] * rs.ambient_dim
    for i in live:
        w = rs.fundamental_weights[i]
        for m in range(rs.ambient_dim):
            X[m] += coeffs[i] * w[m]
    return chamber_point(rs, X)


def vanishing_subset(rs: RootSystem, point: ChamberPoint) -> RootSubset:
    return RootSubset(point.vanishing, True)


# ---------------------------------------------------------------------------
# parabolic orders via Dynkin classification


def _order_from_cartan(cartan: list[list[int]]) -> int:
    """|W| of the root system with the given Cartan matrix (any ordering)."""
    r = len(cartan)
    if r == 0:
        return 1
    adj = {i: [] for i in range(r)}
    mult = {}
    for i in range(r):
        for j in range(i + 1, r):
            m = cartan[i][j] * cartan[j][i]
            if m:
                adj[i].append(j)
                adj[j].append(i)
                mult[(i, j)] = m
    # connected components
    seen = set()
    total = 1
    for start in range(r):
        if start in seen:
            continue
        comp = [start]
        seen.add(start)
        stack = [start]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    comp.append(v)
                    stack.append(v)
        total *= _component_order(comp, adj, mult)
    return total


def _component_order(comp: list[int], adj: dict[int, list[int]], mult: dict) -> int:
    k = len(comp)
    if k == 1:
        return 2
    mults = [mult[tuple(sorted((u, v)))] for u in comp for v in adj[u] if u < v]
    degrees = {u: len([v for v in adj[u] if v in comp]) for u in comp}
    maxdeg = max(degrees.values())
    if 3 in mults:
        if k != 2:
            raise RootSystemError("triple bond outside G2")
        return 12
    if 2 in mults:
        if maxdeg > 2:
            raise RootSystemError("double bond in a branched diagram")
        if k == 4:
            # F4 iff the double bond joins the two interior nodes of the chain
            for (u, v), m in ((e, mult[e]) for e in mult if set(e) <= set(comp)):
                if m == 2 and degrees[u] == 2 and degrees[v] == 2:
                    return 1152
        return (1 << k) * math.factorial(k)
    if maxdeg <= 2:
        return math.factorial(k + 1)  # type A chain
    branch = [u for u in comp if degrees[u] == 3]
    if len(branch) != 1:
        raise RootSystemError("unrecognized simply laced diagram")
    b = branch[0]
    arms = []
    for v in adj[b]:
        if v not in comp:
            continue
        length = 1
        prev, cur = b, v
        while True:
            nxt = [w for w in adj[cur] if w != prev and w in comp]
            if not nxt:
                break
            prev, cur = cur, nxt[0]
            length += 1
        arms.append(length)
    arms.sort()
    if arms[0] == 1 and arms[1] == 1:
        return (1 << k) * math.factorial(k) >> 1  # type D
    if arms == [1, 2, 2]:
        return _WEYL_ORDER_EXC["E6"]
    if arms == [1, 2, 3]:
        return _WEYL_ORDER_EXC["E7"]
    if arms == [1, 2, 4]:
        return _WEYL_ORDER_EXC["E8"]
    raise RootSystemError(f"unrecognized diagram with arms {arms}")


def parabolic_order(rs: RootSystem, simple_positions: Iterable[int]) -> int:
    """Order of the parabolic subgroup generated by the given simple reflections."""
    pos = sorted(set(simple_positions))
    cart = [[rs.cartan_matrix[i][j] for j in pos] for i in pos]
    return _order_from_cartan(cart)


def subsystem_order(rs: RootSystem, subset: RootSubset) -> int:
    """Order of the reflection subgroup of a pi-closed subset."""
    sims = subsystem_simple_indices(rs, subset)
    vecs = [rs.positive_roots[i] for i in sims]
    cart = [[int(2 * dot(a, b) / dot(b, b)) for b in vecs] for a in vecs]
    return _order_from_cartan(cart)


# ---------------------------------------------------------------------------
# serialization


def _q_str(x: Q) -> str:
    return str(x)


def to_json_dict(rs: RootSystem) -> dict:
    """JSON document: family, rank, positive roots, simples, rho, Cartan matrix."""
    return {
        "family": rs.family,
        "rank": rs.rank,
        "positive_roots": [[_q_str(c) for c in r] for r in rs.positive_roots],
        "simple_indices": list(rs.simple_indices),
        "rho": [_q_str(c) for c in rs.rho],
        "cartan_matrix": [list(row) for row in rs.cartan_matrix],
    }
