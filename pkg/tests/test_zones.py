import math
from fractions import Fraction

import pytest
from hypothesis import example, given, settings
from hypothesis import strategies as st

from zenocheck import dbm
from zenocheck.dbm import INF, LE0, LT0
from zenocheck.zones import (LT_INF, Bound, EdgeOp, Signature, StateSet, Zone, canonicalize,
                             clock_eliminate, compose_upperbound, delay_forever, extrapolate,
                             fed_complement, fed_includes, fed_intersect, fed_merge, fed_subtract,
                             fed_union, time_bck, time_until, xtion_bck)
from conftest import GRID, N, fed_points, points, zones

SIG = Signature(("x", "y"), (0,))
feds = st.lists(zones(), min_size=0, max_size=3).map(tuple)


def sset(f):
    return StateSet(SIG, {0: f})


def pts(s: StateSet):
    return fed_points(s.feds.get(0, ()))


# -- bounds -----------------------------------------------------------------

def test_compose_upperbound_examples():
    assert compose_upperbound(Bound.lt(2), Bound.le(3), 5) == LT_INF
    assert compose_upperbound(Bound.le(2), Bound.le(1), 5) == Bound.le(3)


@pytest.mark.parametrize("b1,b2,c,expect", [
    (Bound.le(2), Bound.le(3), 5, Bound.le(5)),
    (Bound.le(4), Bound.le(3), 5, LT_INF),
    (Bound.le(-3), Bound.lt(-2), 5, Bound(True, -math.inf)),
    (Bound.le(-3), Bound.le(-2), 5, Bound.le(-5)),
    (LT_INF, Bound.le(-9), 5, LT_INF),
])
def test_compose_upperbound_saturation(b1, b2, c, expect):
    assert compose_upperbound(b1, b2, c) == expect


def test_bound_encoding_round_trip():
    for b in (Bound.le(3), Bound.lt(-2), LT_INF, Bound.le(0)):
        assert Bound.decode(b.encode()) == b
    with pytest.raises(ValueError):
        Bound(False, math.inf)


@given(zones())
def test_canonicalize_idempotent(m):
    z = canonicalize(Zone(N, m))
    assert canonicalize(z) == z


def test_zone_from_constraints_and_emptiness():
    z = Zone.from_constraints(2, [(1, 0, Bound.lt(1)), (0, 1, Bound.le(-1))])
    assert z.is_empty()
    z = Zone.from_constraints(2, [(1, 0, Bound.le(1)), (0, 1, Bound.le(-1))])
    assert not z.is_empty()
    assert extrapolate(z, (0, 0)).entry(1, 0) == LT_INF


# -- federations and boolean laws -------------------------------------------------

@given(feds, feds)
def test_federation_ops_match_sampling(a, b):
    pa, pb = fed_points(a), fed_points(b)
    assert fed_points(fed_union(a, b)) == pa | pb
    assert fed_points(fed_intersect(a, b, N)) == pa & pb
    assert fed_points(fed_subtract(a, b, N)) == pa - pb
    if fed_includes(a, b, N):
        assert pb <= pa
    else:
        assert fed_subtract(b, a, N)


@given(feds)
def test_complement_is_an_involution(a):
    c = fed_complement(a, N)
    assert fed_points(c) == set(GRID) - fed_points(a)
    assert fed_points(fed_complement(c, N)) == fed_points(a)


@given(feds)
def test_merge_keeps_the_point_set(a):
    m = fed_merge(a, N)
    assert len(m) <= max(len(a), 1)
    assert fed_points(m) == fed_points(a)
    assert fed_includes(m, a, N) and fed_includes(a, m, N)


@given(feds, feds, feds)
def test_stateset_boolean_laws(a, b, c):
    A, B, C = sset(a), sset(b), sset(c)
    assert (A & (B | C)).equals((A & B) | (A & C))
    assert (A | (B & C)).equals((A | B) & (A | C))
    assert (A | B).complement().equals(A.complement() & B.complement())
    assert (A - B).equals(A & B.complement())
    assert A.complement().complement().equals(A)
    assert pts(A - B) == pts(A) - pts(B)


def test_signature_mismatch_is_an_error():
    other = Signature(("x",), (0,))
    with pytest.raises(ValueError):
        StateSet.universe(SIG) & StateSet.universe(other)


# -- time and edge operators (checked on a quarter grid) -------------------------

Q = Fraction(1, 4)
E = Fraction(1, 8)
STARTS = [(Fraction(0), a * Q * 2, b * Q * 2) for a in range(7) for b in range(7)]
DELAYS = [k * E for k in range(0, 49)]
# odd entries stand for the open interval between two grid delays
WALK = [k * E / 2 for k in range(0, 97)]


def _shift(p, t):
    return (p[0], p[1] + t, p[2] + t)


def _in(f, p):
    return any(dbm.contains_point(z, N, p) for z in f)


@settings(max_examples=60)
@given(feds, feds, st.one_of(st.none(), zones()))
@example(a=((LE0, LE0, LE0, INF, LE0, INF, LE0, LE0, LE0),), target=((LE0, LE0, LT0, INF, LE0, INF, INF, INF, LE0),),
         inv=None)  # y = 0 slice next to y > 0: no positive delay stays in a
def test_time_until_matches_sampling(a, target, inv):
    invd = {} if inv is None else {0: inv}
    got = time_until(sset(a), sset(target), invd)
    iv = (lambda p: True) if inv is None else (lambda p: dbm.contains_point(inv, N, p))
    for p in STARTS:
        expect = False
        for k, t in enumerate(WALK):
            q = _shift(p, t)
            if not iv(q):
                break
            # inside an open interval the prefix must already lie in a
            if k % 2 and not _in(a, q):
                break
            if _in(target, q):
                expect = True
                break
            if not _in(a, q):
                break
        assert got.contains(0, p[1:]) == expect, (p, expect)


@settings(max_examples=60)
@given(feds, st.one_of(st.none(), zones()))
def test_time_bck_matches_sampling(target, inv):
    invd = {} if inv is None else {0: inv}
    got = time_bck(sset(target), invd)
    iv = (lambda p: True) if inv is None else (lambda p: dbm.contains_point(inv, N, p))
    for p in STARTS:
        expect = False
        for t in DELAYS:
            q = _shift(p, t)
            if not iv(q):
                break
            if _in(target, q):
                expect = True
                break
        assert got.contains(0, p[1:]) == expect


@settings(max_examples=60)
@given(feds, st.one_of(st.none(), zones()))
def test_delay_forever_matches_sampling(eta, inv):
    invd = {} if inv is None else {0: inv}
    got = delay_forever(sset(eta), invd)
    iv = (lambda p: True) if inv is None else (lambda p: dbm.contains_point(inv, N, p))
    for p in STARTS:
        expect = all(iv(_shift(p, t)) and _in(eta, _shift(p, t)) for t in WALK)
        assert got.contains(0, p[1:]) == expect


@given(feds, zones(), st.sampled_from([(), (1,), (2,), (1, 2)]))
def test_edge_precondition_is_exact(eta, guard, resets):
    e = EdgeOp(0, 0, (guard,), resets)
    got = xtion_bck(sset(eta), e, {})
    for p in GRID:
        q = list(p)
        for x in resets:
            q[x] = Fraction(0)
        expect = dbm.contains_point(guard, N, p) and _in(eta, tuple(q))
        assert got.contains(0, p[1:]) == expect


@given(feds)
def test_clock_elimination_is_projection(eta):
    s = sset(eta)
    got = s.eliminate("y")
    for p in GRID:
        if _in(eta, p):
            assert got.contains(0, (p[1],))
    # saturation only ever adds valuations
    sat = clock_eliminate(s, "y", 2)
    assert sat.includes(got)


def test_lift_and_eliminate_round_trip():
    s = sset((dbm.close(list(dbm.universe(3))[:3] + [dbm.bound(2, True), dbm.LE0, dbm.INF,
                                                    dbm.INF, dbm.INF, dbm.LE0], 3),))
    up = s.add_clock("z")
    assert up.sig.clocks == ("x", "y", "z")
    assert up.eliminate("z").equals(s)
