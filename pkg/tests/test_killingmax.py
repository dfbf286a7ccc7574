"""Exhaustive maximizer-set checks against stabilizer products."""

import itertools
from fractions import Fraction as Q

import numpy as np
import pytest

from weylkern import (
    EnumerationLimit,
    build_root_system,
    dominance_gap_check,
    enumerate_weyl,
    expected_count,
    face_representative,
    killing_max_holds,
    spec_from_name,
    stabilizer,
    verify_face_pair,
    verify_system,
    w_set_exact,
)
from weylkern.killingmax import _StreamEngine, _engine_for

B2 = build_root_system(spec_from_name("B2"))
B3 = build_root_system(spec_from_name("B3"))
A3 = build_root_system(spec_from_name("A3"))
G2 = build_root_system(spec_from_name("G2"))


def sysname(name):
    return build_root_system(spec_from_name(name))


def all_faces(rs):
    # faces are subsets of simple walls; family A has one fewer than ambient
    return list(itertools.product(*[(0, 1)] * len(rs.simple_roots)))


def face_simples(mask):
    return tuple(i for i, b in enumerate(mask) if b)


# ---------------------------------------------------------------------------
# the exact maximizer set itself


def test_w_set_b2_mixed_pair():
    got = w_set_exact(B2, (1, 1), (1, 0))
    assert len(got) == 4


def test_w_set_regular_pair_is_identity():
    got = w_set_exact(B2, (3, 1), (2, 1))
    assert len(got) == 1
    (w,) = got
    assert w.apply((Q(3), Q(1))) == (Q(3), Q(1))


def test_w_set_degenerate_lambda_is_everything():
    assert len(w_set_exact(B2, (0, 0), (2, 1))) == 8


def test_w_set_contains_stabilizer_product():
    lam, y = (Q(1), Q(1)), (Q(1), Q(0))
    maxi = w_set_exact(B2, lam, y)
    keys = {w.key() for w in maxi}
    stab_l, _ = stabilizer(B2, lam)
    stab_y, _ = stabilizer(B2, y)
    for u in stab_l:
        for v in stab_y:
            assert u.compose(v).key() in keys


# ---------------------------------------------------------------------------
# report invariants


@pytest.mark.parametrize("rs", [B2, B3, A3, G2], ids=lambda r: r.name)
def test_symmetry_in_the_two_faces(rs):
    for fl in all_faces(rs):
        for fy in all_faces(rs):
            a = verify_face_pair(rs, face_simples(fl), face_simples(fy))
            b = verify_face_pair(rs, face_simples(fy), face_simples(fl))
            assert a.holds == b.holds
            assert a.observed == b.observed


@pytest.mark.parametrize("rs", [B2, B3, A3, G2], ids=lambda r: r.name)
def test_cardinality_law_every_pair(rs):
    """The product-set size is |W_lam| |W_Y| / |W_lam ∩ W_Y| on every pair."""
    for fl in all_faces(rs):
        for fy in all_faces(rs):
            rep = verify_face_pair(rs, face_simples(fl), face_simples(fy))
            assert rep.expected * rep.stab_meet == rep.stab_lambda * rep.stab_y
            assert rep.expected == expected_count(rs, face_simples(fl), face_simples(fy))
            # meet order divides both stabilizer orders
            assert rep.stab_lambda % rep.stab_meet == 0
            assert rep.stab_y % rep.stab_meet == 0


def test_cardinality_law_against_brute_product():
    """Multiply the stabilizers out and count distinct elements."""
    for rs in (B2, B3):
        for fl in all_faces(rs):
            for fy in all_faces(rs):
                lam = face_representative(rs, face_simples(fl)).coords
                y = face_representative(rs, face_simples(fy)).coords
                sl, _ = stabilizer(rs, lam)
                sy, _ = stabilizer(rs, y)
                product = {u.compose(v).key() for u in sl for v in sy}
                assert len(product) == expected_count(
                    rs, face_simples(fl), face_simples(fy))


@pytest.mark.parametrize("rs", [B2, B3, A3, G2], ids=lambda r: r.name)
def test_face_representative_independence(rs):
    """Five random positive coefficient draws per face agree with the verdict."""
    rng = np.random.default_rng(71)
    for fl in all_faces(rs):
        for fy in all_faces(rs):
            rep = verify_face_pair(rs, face_simples(fl), face_simples(fy))
            nsimp = len(rs.simple_roots)
            for _ in range(5):
                coef_l = [Q(int(rng.integers(1, 12)), int(rng.integers(1, 5)))
                          for _ in range(nsimp - sum(fl))]
                coef_y = [Q(int(rng.integers(1, 12)), int(rng.integers(1, 5)))
                          for _ in range(nsimp - sum(fy))]
                lam = face_representative(rs, face_simples(fl), coef_l).coords
                y = face_representative(rs, face_simples(fy), coef_y).coords
                assert len(w_set_exact(rs, lam, y)) == rep.observed


# ---------------------------------------------------------------------------
# whole systems


@pytest.mark.parametrize("name", ["A1", "A2", "A3", "B2", "B3", "C3", "D4", "G2"])
def test_small_systems_hold(name):
    rs = sysname(name)
    report = verify_system(rs)
    assert report.failures == []
    assert report.pairs_checked == 4 ** len(rs.simple_roots)
    assert report.weyl_order == rs.weyl_order
    assert killing_max_holds(rs)


@pytest.mark.parametrize("name", ["A3", "B3", "C3", "D4", "G2", "F4"])
def test_streaming_engine_agrees_with_materialized(name):
    """Level-synchronous pass tallies the same mask multiset as full storage."""
    rs = sysname(name)
    mat = _engine_for(rs.name)
    stream = _StreamEngine(rs)
    assert mat.uniq.tolist() == stream.uniq.tolist()
    assert mat.counts.tolist() == stream.counts.tolist()


@pytest.mark.parametrize("name", ["A2", "B3", "C3", "D4", "G2", "F4"])
def test_dominance_gap(name):
    assert dominance_gap_check(sysname(name))


# ---------------------------------------------------------------------------
# scope policy for the huge groups


def test_e6_needs_explicit_budget():
    e6 = sysname("E6")
    with pytest.raises(EnumerationLimit, match="order_budget"):
        verify_face_pair(e6, (), ())


def test_e8_always_refused():
    e8 = sysname("E8")
    with pytest.raises(EnumerationLimit, match="E8"):
        verify_face_pair(e8, (), (), order_budget=10**9)
    with pytest.raises(EnumerationLimit):
        verify_system(e8, order_budget=10**9)


def test_full_face_pair_is_whole_group():
    rep = verify_face_pair(G2, (0, 1), (0, 1))
    assert rep.observed == rep.expected == 12
    assert rep.stab_lambda == rep.stab_y == rep.stab_meet == 12
    assert rep.holds
