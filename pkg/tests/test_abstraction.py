import pytest
from hypothesis import given
from hypothesis import strategies as st

from zenocheck.abstraction import make_operator, opponent_closed, players_of
from zenocheck.engine import CheckConfig, Verdict, model_check
from zenocheck.model import load_system
from zenocheck.tctl import parse_formula
from zenocheck.zones import StateSet
from conftest import zones

TWO = """
channel go binary;

process A {
  clock x;
  mode s0;
  mode s1 inv x <= 2;
  trans s0 -> s1 sync go? reset {x};
  trans s1 -> s0 when x >= 1;
  init s0;
}

process B {
  clock y;
  mode t0 inv y <= 3;
  mode t1;
  trans t0 -> t1 when y >= 1 sync go! reset {y};
  trans t1 -> t0 when y >= 2 reset {y};
  init t0;
}

system A, B;
initial x = 0 and y = 0;
"""

SYS = load_system(TWO)
PHI = parse_formula("forall always (s1 -> x <= 2)", SYS.syms)
PS = players_of(SYS, PHI)
CLOSED = opponent_closed(SYS, PS)
SIG = CLOSED.signature()
OPS = ("game", "game_discrete", "game_magnitude")


@st.composite
def state_sets(draw):
    feds = {}
    for k in SIG.keys:
        feds[k] = tuple(draw(st.lists(zones(), max_size=2)))
    return StateSet(SIG, feds)


def test_players_and_closure():
    assert PS.players == frozenset({0}) and PS.opponents == frozenset({1})
    # every mode of B is present next to every reachable mode of A
    a_modes = {k[0] for k in SIG.keys}
    assert {(a, b) for a in a_modes for b in (0, 1)} <= {k[:2] for k in SIG.keys}


@pytest.mark.parametrize("name", OPS)
@given(s=state_sets())
def test_extensive(name, s):
    op = make_operator(name, CLOSED, PS)
    assert op(s).includes(s)


@pytest.mark.parametrize("name", OPS)
@given(s=state_sets(), t=state_sets())
def test_monotone(name, s, t):
    op = make_operator(name, CLOSED, PS)
    assert op(s | t).includes(op(s))


@given(s=state_sets())
def test_game_is_the_coarsest(s):
    g = make_operator("game", CLOSED, PS)(s)
    for name in ("game_discrete", "game_magnitude"):
        assert g.includes(make_operator(name, CLOSED, PS)(s))


def test_identity_operator():
    s = StateSet.universe(SIG)
    assert make_operator("none", CLOSED, PS)(s) is s


@pytest.mark.parametrize("name", OPS)
def test_abstraction_never_flips_a_verdict(name):
    exact = model_check(SYS, PHI).verdict
    got = model_check(SYS, PHI, CheckConfig(abstraction=name)).verdict
    assert exact == Verdict.TRUE
    assert got in (Verdict.TRUE, Verdict.MAYBE)
