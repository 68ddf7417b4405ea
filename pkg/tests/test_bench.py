import os

import pytest

from zenocheck.bench import BenchSpec, write_benchmark
from zenocheck.engine import CheckConfig, Verdict, model_check
from zenocheck.model import load_system
from zenocheck.syntax import conjuncts
from zenocheck.tctl import classify_fragment, Fragment, modal_depth, parse_formula


def load(spec):
    m, f = spec.generate()
    s = load_system(m)
    return s, parse_formula(f, s.syms)


@pytest.mark.parametrize("spec,cmax", [
    (BenchSpec("pathos", 2), 2), (BenchSpec("pathos", 4), 4),
    (BenchSpec("leader", 2), 2), (BenchSpec("leader", 4), 2),
    (BenchSpec("csma", 2, "A"), 808), (BenchSpec("csma", 3, "C"), 808),
])
def test_constants(spec, cmax):
    s, _ = load(spec)
    assert s.cmax == cmax


def test_pathos_formula_targets_the_lowest_priority():
    _, f = BenchSpec("pathos", 3).generate()
    assert f == "forall always (pending3 -> forall eventually running3)"


def test_leader_formula_expansion():
    s, phi = load(BenchSpec("leader", 3))
    assert modal_depth(phi) == 1
    parts = conjuncts(phi.body)
    names = {n for p in parts for n in p.names()}
    assert names == {"parent1", "parent2", "parent3"}


def nesting(phi):
    # operators stacked under the outermost one
    return modal_depth(phi) - 1


@pytest.mark.parametrize("spec,depth", [(BenchSpec("pathos", 3), 1), (BenchSpec("leader", 3), 0),
                                        (BenchSpec("csma", 2, "B"), 1),
                                        (BenchSpec("csma", 2, "C"), 2)])
def test_nesting_depths(spec, depth):
    assert nesting(load(spec)[1]) == depth


@pytest.mark.parametrize("variant", ["A", "B", "C"])
def test_csma_formulas(variant):
    s, phi = load(BenchSpec("csma", 2, variant))
    assert classify_fragment(phi) == Fragment.FORALL
    for c in (26, 52, 808):
        assert c in {abs(x) for x in _constants(s)}


def _constants(s):
    from zenocheck.syntax import Cmp, walk
    out = set()
    for p in s.net.processes:
        for m in p.modes:
            out |= {n.const for n in walk(m.inv) if isinstance(n, Cmp)}
        for t in p.transitions:
            out |= {n.const for n in walk(t.guard) if isinstance(n, Cmp)}
    return out


@pytest.mark.parametrize("args", [("pathos", 1, None), ("leader", 2, "A"), ("csma", 2, None),
                                  ("csma", 2, "D"), ("fischer", 2, None)])
def test_invalid_specs(args):
    with pytest.raises(ValueError):
        BenchSpec(*args)


def test_write_benchmark(tmp_path):
    mp, fp = write_benchmark(BenchSpec("leader", 2), str(tmp_path))
    assert os.path.basename(mp) == "leader_2.model"
    assert os.path.basename(fp) == "leader_2.tctl"
    load_system(open(mp).read())


@pytest.mark.parametrize("spec", [BenchSpec("pathos", 2), BenchSpec("leader", 2),
                                  BenchSpec("csma", 2, "A"), BenchSpec("csma", 2, "C")])
def test_small_instances_hold(spec):
    s, phi = load(spec)
    assert model_check(s, phi).verdict == Verdict.TRUE
