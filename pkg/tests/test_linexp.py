"""The exact linear-form/exponential calculus all singular limits lean on."""

import math
from fractions import Fraction as Q

import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weylkern.linexp import LinExpPoly, derivative_pairing, monomial_expand


rational = st.fractions(min_value=-4, max_value=4)
vec2 = st.tuples(rational, rational)


def test_single_term_eval():
    # 3 <(1,2), Y> exp(<(0,1), Y>) at Y = (1, 1): 3*3*e
    p = LinExpPoly.term(2, Q(3), [(Q(1), Q(2))], (Q(0), Q(1)))
    v = p.eval((Q(1), Q(1)))
    assert abs(v - 9 * math.e) < 1e-12


def test_cancellation_is_exact():
    """Terms with equal exponent merge rationally before any float math."""
    p = LinExpPoly(1)
    p.add_term(Q(1, 3), (), (Q(2),))
    p.add_term(Q(2, 3), (), (Q(2),))
    p.add_term(Q(-1), (), (Q(2),))
    assert p.eval_groups((Q(100),)) == {}
    assert p.eval((Q(100),)) == 0.0


def test_derivative_of_exponential():
    # D_a exp(<v, Y>) = <v, a> exp(<v, Y>)
    v = (Q(3), Q(-1))
    p = LinExpPoly.term(2, Q(1), [], v)
    d = p.derivative((Q(1), Q(1)))
    ((factors, expvec), c), = d.terms.items()
    assert factors == () and expvec == v and c == 2


def test_derivative_product_rule():
    # D_a (<u, Y> exp(<v, Y>)) = <u, a> exp + <v, a> <u, Y> exp
    u, v, a = (Q(1), Q(0)), (Q(0), Q(2)), (Q(1), Q(1))
    p = LinExpPoly.term(2, Q(1), [u], v)
    d = p.derivative(a)
    assert d.terms == {((), v): Q(1), ((u,), v): Q(2)}


def test_derivative_matches_finite_difference():
    """High-precision centered difference agrees with the formal derivative."""
    p = LinExpPoly(2)
    p.add_term(Q(2), ((Q(1), Q(1)), (Q(1), Q(-1))), (Q(1), Q(0)))
    p.add_term(Q(-1, 2), ((Q(0), Q(1)),), (Q(0), Q(-1)))
    a = (Q(2), Q(1))
    x = (Q(1, 3), Q(1, 7))
    formal = p.derivative(a).eval(x, exp_fn=mp.exp, num=mp.mpf)
    with mp.workdps(40):
        h = Q(1, 10**10)
        xp = tuple(c + h * d for c, d in zip(x, a))
        xm = tuple(c - h * d for c, d in zip(x, a))
        fd = (p.eval(xp, exp_fn=mp.exp, num=mp.mpf)
              - p.eval(xm, exp_fn=mp.exp, num=mp.mpf)) / (2 * mp.mpf(1) / 10**10)
        assert abs(formal - fd) < 1e-15


def test_constant_value():
    p = LinExpPoly.term(3, Q(5, 7))
    assert p.constant_value() == Q(5, 7)
    q = LinExpPoly.term(3, Q(1), [(Q(1), Q(0), Q(0))])
    with pytest.raises(ValueError):
        q.constant_value()


def test_monomial_expand_known_product():
    # <(1,1), x> * <(1,-1), x> = x0^2 - x1^2
    out = monomial_expand([(Q(1), Q(1)), (Q(1), Q(-1))])
    assert out == {(2, 0): Q(1), (0, 2): Q(-1)}


@given(st.lists(vec2, min_size=1, max_size=4))
@settings(max_examples=60, deadline=None)
def test_monomial_expand_evaluates_like_the_product(factors):
    out = monomial_expand(factors)
    x = (Q(3, 2), Q(-5, 7))
    direct = Q(1)
    for u in factors:
        direct *= u[0] * x[0] + u[1] * x[1]
    expanded = sum(c * x[0] ** m[0] * x[1] ** m[1] for m, c in out.items())
    assert expanded == direct


def brute_pairing(factors):
    """Derivative pairing via the full product-rule recursion (small inputs)."""
    from weylkern.linexp import LinExpPoly

    p = LinExpPoly.term(len(factors[0]), Q(1), factors)
    return p.derivative_product(factors).constant_value()


@given(st.lists(vec2.filter(lambda v: any(v)), min_size=1, max_size=4))
@settings(max_examples=40, deadline=None)
def test_pairing_agrees_with_product_rule(factors):
    assert derivative_pairing(factors) == brute_pairing(factors)


def test_pairing_small_cases():
    # <e1, d> <e1, x> = 1; (<e1,d><e2,d>)(x0 x1) = 1; (x0)^2 pairing = 2
    e1, e2 = (Q(1), Q(0)), (Q(0), Q(1))
    assert derivative_pairing([e1]) == 1
    assert derivative_pairing([e1, e2]) == 1
    assert derivative_pairing([e1, e1]) == 2
    # (x0 + x1)^2 expands to x0^2 + 2 x0 x1 + x1^2: pairing 2 + 4 + 2 = 8
    u = (Q(1), Q(1))
    assert derivative_pairing([u, u]) == 8
