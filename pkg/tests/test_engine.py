import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zenocheck.engine import (Checker, CheckConfig, ConfigError, UnsafeAbstraction, Verdict,
                              formula_clock_constants, model_check, satisfying_states)
from zenocheck.model import load_system
from zenocheck.oracle import random_instance
from zenocheck.syntax import Not
from zenocheck.tctl import expand_shorthands, parse_formula
from conftest import DEADLINE, ZENO


def check(model, formula, **kw):
    s = load_system(model)
    return model_check(s, parse_formula(formula, s.syms), CheckConfig(**kw)).verdict


@pytest.mark.parametrize("formula,nz,zeno", [
    ("forall eventually b", Verdict.TRUE, Verdict.MAYBE),
    ("exists always a", Verdict.FALSE, Verdict.MAYBE),
    ("forall always (a or b)", Verdict.TRUE, Verdict.TRUE),
])
def test_zeno_loop(formula, nz, zeno):
    assert check(ZENO, formula) == nz
    assert check(ZENO, formula, non_zeno=False) == zeno


@pytest.mark.parametrize("formula,expect", [
    ("forall eventually b", Verdict.TRUE),
    ("freeze z . forall eventually (b and z >= 2 and z <= 3)", Verdict.TRUE),
    ("freeze z . forall eventually (b and z < 2)", Verdict.FALSE),
    ("freeze z . exists eventually (b and z = 3)", Verdict.TRUE),
    ("forall (a until b)", Verdict.TRUE),
    ("exists always a", Verdict.FALSE),
    ("forall always (b -> x >= 2)", Verdict.TRUE),
])
def test_deadline(formula, expect):
    assert check(DEADLINE, formula) == expect
    assert check(DEADLINE, formula, edgf=False) == expect


def test_config_validation():
    with pytest.raises(ConfigError):
        CheckConfig(d_value=0)
    with pytest.raises(ConfigError):
        CheckConfig(abstraction="bogus")
    with pytest.raises(UnsafeAbstraction):
        check(DEADLINE, "exists eventually b", abstraction="game")


def _instance(seed):
    m, f = random_instance(random.Random(seed))
    s = load_system(m)
    return s, parse_formula(f, s.syms)


@settings(max_examples=40)
@given(st.integers(0, 10 ** 6))
def test_negation_is_complement(seed):
    s, phi = _instance(seed)
    pos = satisfying_states(s, phi)
    neg = satisfying_states(s, Not(phi))
    assert (pos & neg).is_empty()
    assert (pos | neg).equals(pos.complement() | pos)


@settings(max_examples=40)
@given(st.integers(0, 10 ** 6))
def test_gfp_descends_and_zeno_gfp_contains_gfp(seed):
    s, phi = _instance(seed)
    c = max([s.cmax] + formula_clock_constants(phi, s))
    nz = Checker(s, CheckConfig(paranoid=True), c)
    z = Checker(s, CheckConfig(paranoid=True, non_zeno=False), c)
    body = satisfying_states(s, phi)
    # paranoid mode raises if any iterate grows
    strict = nz.gfp(body)
    loose = z.gfp_zeno(body)
    assert loose.includes(strict)
    for cfg in (CheckConfig(paranoid=True), CheckConfig(paranoid=True, non_zeno=False),
                CheckConfig(paranoid=True, edgf=False)):
        model_check(s, phi, cfg)


@settings(max_examples=40)
@given(st.integers(0, 10 ** 6))
def test_edgf_does_not_change_verdicts(seed):
    s, phi = _instance(seed)
    assert model_check(s, phi, CheckConfig()).verdict == \
        model_check(s, phi, CheckConfig(edgf=False)).verdict


@settings(max_examples=25)
@given(st.integers(0, 10 ** 6), st.sampled_from([(1, False), (2, True), (7, False), (7, True)]))
def test_d_does_not_change_the_semantics(seed, dv):
    s, phi = _instance(seed)
    ref = satisfying_states(s, phi, CheckConfig(edgf=False))
    got = satisfying_states(s, phi, CheckConfig(edgf=False, d_value=dv[0], d_strict=dv[1]))
    assert got.includes(ref) and ref.includes(got)


def test_determinism():
    s, phi = _instance(12345)
    a = model_check(s, phi)
    b = model_check(s, phi)
    assert a.verdict == b.verdict
    assert (a.stats.outer_iters, a.stats.inner_iters, a.stats.peak_zones) == \
        (b.stats.outer_iters, b.stats.inner_iters, b.stats.peak_zones)


def test_expanded_and_sugared_forms_agree():
    s = load_system(DEADLINE)
    for text in ("forall (a until b)", "forall always (b -> x >= 2)"):
        phi = parse_formula(text, s.syms)
        assert satisfying_states(s, phi).equals(satisfying_states(s, expand_shorthands(phi)))
