import itertools
import math
from fractions import Fraction

from hypothesis import settings
from hypothesis import strategies as st

from zenocheck import dbm

ACCEPTANCE: list = []  # lines filled in by test_acceptance


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)


settings.register_profile("default", max_examples=150, deadline=None)
settings.load_profile("default")

N = 3  # reference clock plus two clocks
STEP = Fraction(1, 2)
GRID = [tuple([Fraction(0)] + list(p))
        for p in itertools.product([STEP * k for k in range(0, 11)], repeat=N - 1)]


@st.composite
def raw_dbms(draw, n=N, lo=-3, hi=4):
    """Arbitrary (not necessarily closed or satisfiable) bound matrices."""
    m = list(dbm.universe(n))
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            if draw(st.booleans()):
                c = draw(st.integers(lo, hi))
                b = dbm.bound(c, draw(st.booleans()))
                m[i * n + j] = min(b, dbm.LE0) if i == 0 else b  # clocks stay nonnegative
    return tuple(m)


@st.composite
def zones(draw, n=N):
    """Canonical nonempty DBMs.

    Built around a half-integer anchor point so that no draw is wasted on an
    empty matrix; every bound is loose enough to keep the anchor inside.
    """
    p = [Fraction(0)] + [STEP * draw(st.integers(0, 4)) for _ in range(n - 1)]
    m = list(dbm.universe(n))
    for i in range(n):
        for j in range(n):
            if i == j or not draw(st.booleans()):
                continue
            gap = p[i] - p[j]
            c = math.ceil(gap) + draw(st.integers(0, 2))  # constants stay within 4
            b = dbm.bound(c, not (c > gap and draw(st.booleans())))  # strict only with room
            m[i * n + j] = min(b, dbm.LE0) if i == 0 else b
    z = dbm.close(tuple(m), n)
    assert z is not None
    return z


def points(m, n=N):
    return {p for p in GRID if dbm.contains_point(m, n, p)}


def fed_points(f, n=N):
    out = set()
    for z in f:
        out |= points(z, n)
    return out


# Staying in `a` forever needs infinitely many steps in bounded time.
ZENO = """
process P {
  clock x;
  mode a inv x <= 1;
  mode b;
  trans a -> a;
  trans a -> b when x = 1;
  init a;
}
system P;
initial x = 0;
"""

DEADLINE = """
process P {
  clock x;
  mode a inv x <= 3;
  mode b;
  trans a -> b when x >= 2;
  init a;
}
system P;
initial x = 0;
"""
