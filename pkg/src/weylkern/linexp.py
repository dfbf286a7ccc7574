"""Exact calculus on sums of (product of linear forms) * exponential.

The working representation is

    F(Y) = sum over terms of  c * prod_k <u_k, Y> * exp(<v, Y>)

with rational coefficients ``c`` and rational vectors ``u_k``, ``v``.
This class of functions is closed under directional derivatives, which is
all the singular-limit machinery requires.  Evaluation groups terms by the
exact rational value of the exponent so that the massive alternating-sum
cancellation happens in exact arithmetic; only the final handful of
exponentials is computed in floating point (or mpmath, caller's choice).
"""

from __future__ import annotations

import math
from fractions import Fraction as Q
from typing import Callable, Iterable, Sequence

from weylkern.rootsys import Vector, dot

TermKey = tuple[tuple[Vector, ...], Vector]


class LinExpPoly:
    """Finite rational combination of linear-form products times exponentials."""

    __slots__ = ("dim", "terms")

    def __init__(self, dim: int, terms: dict[TermKey, Q] | None = None):
        self.dim = dim
        self.terms: dict[TermKey, Q] = terms if terms is not None else {}

    @classmethod
    def term(cls, dim: int, coeff: Q, factors: Iterable[Vector] = (), expvec: Vector | None = None) -> "LinExpPoly":
        if expvec is None:
            expvec = (Q(0),) * dim
        key = (tuple(sorted(factors)), expvec)
        return cls(dim, {key: Q(coeff)} if coeff else {})

    def add_term(self, coeff: Q, factors: tuple[Vector, ...], expvec: Vector) -> None:
        if not coeff:
            return
        key = (factors, expvec)
        cur = self.terms.get(key)
        if cur is None:
            self.terms[key] = coeff
        else:
            s = cur + coeff
            if s:
                self.terms[key] = s
            else:
                del self.terms[key]

    def __iadd__(self, other: "LinExpPoly") -> "LinExpPoly":
        for (factors, expvec), c in other.terms.items():
            self.add_term(c, factors, expvec)
        return self

    def __len__(self) -> int:
        return len(self.terms)

    def derivative(self, a: Vector) -> "LinExpPoly":
        """Directional derivative along the vector a."""
        out = LinExpPoly(self.dim)
        for (factors, expvec), c in self.terms.items():
            ea = dot(expvec, a)
            if ea:
                out.add_term(c * ea, factors, expvec)
            for j, u in enumerate(factors):
                ua = dot(u, a)
                if ua:
                    rest = factors[:j] + factors[j + 1:]
                    out.add_term(c * ua, rest, expvec)
        return out

    def derivative_product(self, vectors: Iterable[Vector]) -> "LinExpPoly":
        """Apply prod_a D_a for the given directions (order immaterial)."""
        cur = self
        for a in vectors:
            cur = cur.derivative(a)
        return cur

    def eval_groups(self, point: Sequence[Q]) -> dict[Q, Q]:
        """Exact rational coefficient of exp(t) for each exponent value t."""
        groups: dict[Q, Q] = {}
        for (factors, expvec), c in self.terms.items():
            val = c
            for u in factors:
                val *= dot(u, point)
                if not val:
                    break
            if not val:
                continue
            t = dot(expvec, point)
            groups[t] = groups.get(t, Q(0)) + val
        return {t: v for t, v in groups.items() if v}

    def eval(self, point: Sequence[Q], exp_fn: Callable = math.exp, num=float):
        """Evaluate at an exact point; exponentials via exp_fn, scalars via num.

        Pass ``exp_fn=mp.exp, num=mp.mpf`` style callables for high
        precision; the rational group coefficients are converted through
        separate numerator/denominator to avoid double rounding.
        """
        total = num(0)
        for t, v in sorted(self.eval_groups(point).items()):
            scale = num(v.numerator) / num(v.denominator)
            arg = num(t.numerator) / num(t.denominator)
            total += scale * exp_fn(arg)
        return total

    def constant_value(self) -> Q:
        """The value when every term has empty factors and zero exponent."""
        total = Q(0)
        for (factors, expvec), c in self.terms.items():
            if factors or any(expvec):
                raise ValueError("not a constant")
            total += c
        return total


def monomial_expand(factors: Sequence[Vector]) -> dict[tuple[int, ...], Q]:
    """Expand prod_k <u_k, x> into monomial coefficients, exactly."""
    if not factors:
        return {(): Q(1)}
    n = len(factors[0])
    cur: dict[tuple[int, ...], Q] = {(0,) * n: Q(1)}
    for u in factors:
        nxt: dict[tuple[int, ...], Q] = {}
        for mono, c in cur.items():
            for i, ui in enumerate(u):
                if not ui:
                    continue
                key = mono[:i] + (mono[i] + 1,) + mono[i + 1:]
                cur_v = nxt.get(key)
                nxt[key] = c * ui if cur_v is None else cur_v + c * ui
        cur = {k: v for k, v in nxt.items() if v}
    return cur


def derivative_pairing(factors: Sequence[Vector]) -> Q:
    """Exact value of (prod <u_k, d/dx>) applied to (prod <u_k, x>).

    Both polynomials are the same homogeneous form, so the pairing is the
    sum over monomials of coeff^2 times the product of factorials of the
    exponents.  This stays polynomial-size even when the naive product
    rule would have |factors|! terms.
    """
    total = Q(0)
    for mono, c in monomial_expand(factors).items():
        weight = 1
        for e in mono:
            weight *= math.factorial(e)
        total += c * c * weight
    return total
