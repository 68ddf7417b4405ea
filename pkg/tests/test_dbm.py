from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from zenocheck import dbm
from conftest import GRID, N, fed_points, points, raw_dbms, zones


def test_bound_encoding_orders_strict_below_weak():
    assert dbm.bound(3, False) < dbm.bound(3, True) < dbm.bound(4, False)
    assert dbm.add(dbm.bound(2, True), dbm.bound(1, False)) == dbm.bound(3, False)
    assert dbm.add(dbm.bound(2, True), dbm.bound(1, True)) == dbm.bound(3, True)
    assert dbm.add(dbm.INF, dbm.LE0) == dbm.INF


def test_negate_is_the_complementary_halfspace():
    # not (x - y <= 2)  <=>  y - x < -2
    assert dbm.negate(dbm.bound(2, True)) == dbm.bound(-2, False)
    assert dbm.negate(dbm.bound(-2, False)) == dbm.bound(2, True)


@given(raw_dbms())
def test_close_preserves_the_point_set(m):
    c = dbm.close(m, N)
    if c is None:
        assert not points(m)
    else:
        assert points(c) == points(m)


@given(raw_dbms())
def test_close_is_idempotent(m):
    c = dbm.close(m, N)
    if c is not None:
        assert dbm.close(c, N) == c
        assert dbm.is_canonical(c, N)


@given(zones(), st.integers(0, N - 1), st.integers(0, N - 1), st.integers(-3, 4), st.booleans())
def test_constrain_matches_close(m, i, j, c, weak):
    if i == j:
        return
    b = dbm.bound(c, weak)
    got = dbm.constrain(m, N, i, j, b)
    lst = list(m)
    lst[i * N + j] = min(lst[i * N + j], b)
    assert got == dbm.close(lst, N)


@given(zones(), zones())
def test_intersect_and_disjoint(a, b):
    got = dbm.intersect(a, b, N)
    expect = points(a) & points(b)
    if got is None:
        assert not expect
        assert dbm.disjoint(a, b, N)
    else:
        assert points(got) == expect
        assert not dbm.disjoint(a, b, N)


@given(zones(), zones())
def test_subset_agrees_with_sampling(a, b):
    if dbm.subset(a, b):
        assert points(a) <= points(b)


@given(zones(), zones())
def test_subtract_is_exact_and_disjoint(a, b):
    parts = dbm.subtract(a, b, N)
    assert fed_points(parts) == points(a) - points(b)
    for i, p in enumerate(parts):
        for q in parts[i + 1:]:
            assert not points(p) & points(q)


@given(zones())
def test_minimal_constraints_describe_the_same_zone(m):
    keep = dbm.minimal_constraints(m, N)
    lst = list(dbm.universe(N))
    for k in keep:
        lst[k] = m[k]
    assert dbm.close(lst, N) == m


@given(zones())
def test_up_is_the_future(m):
    u = dbm.up(m, N)
    pts = points(u)
    for p in points(m):
        for t in (Fraction(0), Fraction(1, 2), Fraction(3, 2)):
            q = tuple([Fraction(0)] + [x + t for x in p[1:]])
            if max(q) <= GRID[-1][1]:
                assert q in pts
    for q in pts:
        # a witness delay exists on the quarter grid for integer-bounded zones
        steps = int(min(q[1:]) * 4)
        assert any(dbm.contains_point(m, N, tuple([0] + [x - Fraction(k, 4) for x in q[1:]]))
                   for k in range(steps + 1))


@given(zones())
def test_down_is_the_past(m):
    d = dbm.down(m, N)
    assert d is not None
    pts = points(d)
    for p in points(m):
        for t in (Fraction(0), Fraction(1, 2), Fraction(1)):
            q = tuple([Fraction(0)] + [x - t for x in p[1:]])
            if min(q[1:]) >= 0:
                assert q in pts


@given(zones(), st.integers(1, N - 1))
def test_reset_and_free(m, x):
    r = dbm.reset(m, N, x)
    f = dbm.free(m, N, x)
    for p in points(m):
        q = list(p)
        q[x] = Fraction(0)
        assert tuple(q) in points(r)
        for v in (Fraction(0), Fraction(5, 2), Fraction(5)):
            q[x] = v
            assert tuple(q) in points(f)
    for p in points(r):
        assert p[x] == 0


@given(zones(), st.integers(1, N - 1))
def test_project_then_insert_is_free(m, x):
    if x != N - 1:
        return
    p = dbm.project(m, N, x)
    back = dbm.insert_clock(p, N - 1)
    assert points(back) == points(dbm.free(m, N, x))


@given(zones(), st.lists(st.integers(0, 3), min_size=N - 1, max_size=N - 1))
def test_extrapolation_only_grows(m, ks):
    k = (0,) + tuple(ks)
    e = dbm.extrapolate(m, N, k)
    assert e is not None
    assert points(m) <= points(e)


def test_extrapolation_example():
    # x in (5, 6) with bound 3 becomes x > 3
    m = dbm.close(list(dbm.universe(2))[:1] + [dbm.bound(-5, False), dbm.bound(6, False), dbm.LE0], 2)
    e = dbm.extrapolate(m, 2, (0, 3))
    assert e[2] == dbm.INF and e[1] == dbm.bound(-3, False)


@pytest.mark.parametrize("v,inside", [((0, 1, 1), True), ((0, 2, 1), False), ((0, 1, 0), False)])
def test_contains_point_diagonal(v, inside):
    # x = y and 0 < x <= 1
    m = [dbm.INF] * 9
    for i in range(3):
        m[i * 3 + i] = dbm.LE0
    m[1 * 3 + 2] = m[2 * 3 + 1] = dbm.LE0
    m[1 * 3 + 0] = dbm.bound(1, True)
    m[0 * 3 + 1] = dbm.bound(0, False)
    m[0 * 3 + 2] = dbm.LE0
    c = dbm.close(m, 3)
    assert dbm.contains_point(c, 3, v) is inside
