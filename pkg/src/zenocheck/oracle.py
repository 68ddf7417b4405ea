"""Region-graph model checker for tiny networks.

Slow and exact: it serves as ground truth for the zone-based engine.  A
region is stored per clock as ``(k, r)``: ``k`` is the integer part, or
``c + 1`` once the clock is beyond its maximal constant ``c``; ``r`` is 0
for a zero fractional part, a positive rank in the ordering of the nonzero
fractional parts otherwise, and -1 beyond ``c``.

Time divergence is detected with an auxiliary clock that is reset each time
it reaches 1; a run diverges iff it performs that reset infinitely often,
so the non-Zeno ``exists always`` is a fair greatest fixpoint.
"""

from __future__ import annotations

import itertools
import os
from collections import deque
from dataclasses import dataclass

from . import dbm
from .engine import Answer, Stats, Verdict
from .model import (ModelError, Network, Symbols, _init_modes, clock_maxima, compile_pred)
from .syntax import And, Cmp, Const, Node, Not, Or, Prop, compare, conj, conjuncts
from .tctl import ExistsAlways, ExistsUntil, Freeze, expand_shorthands, freeze_clocks

DEFAULT_BUDGET = 200_000
AUX = "~div"


class OracleRefusal(RuntimeError):
    """The instance is outside what the oracle handles (size or constraint shape)."""


def region_budget() -> int:
    raw = os.environ.get("ZENOCHECK_REGION_BUDGET")
    return int(raw) if raw else DEFAULT_BUDGET


# ---------------------------------------------------------------------------
# Clock regions


def _normalize(ints, ranks, caps) -> tuple:
    """Clip integer parts at the caps and compress fractional ranks to 1..m."""
    out = []
    for k, r, c in zip(ints, ranks, caps):
        if k > c or (k == c and r > 0):
            out.append((c + 1, -1))
        else:
            out.append((k, r))
    order = sorted({r for _, r in out if r > 0})
    pos = {r: i + 1 for i, r in enumerate(order)}
    return tuple((k, pos.get(r, r)) for k, r in out)


def zero_region(caps) -> tuple:
    return tuple((0, 0) for _ in caps)


def time_successor(reg: tuple, caps) -> tuple | None:
    """The next region reached by letting time pass; None if every clock is beyond."""
    bounded = [i for i, (k, r) in enumerate(reg) if r >= 0]
    if not bounded:
        return None
    ints = [k for k, _ in reg]
    ranks = [r for _, r in reg]
    if any(reg[i][1] == 0 for i in bounded):
        # zero fractions become the smallest positive ones
        for i in bounded:
            ranks[i] = ranks[i] + 1 if ranks[i] > 0 else 1
        return _normalize(ints, ranks, caps)
    top = max(reg[i][1] for i in bounded)
    for i in bounded:
        if reg[i][1] == top:
            ints[i] += 1
            ranks[i] = 0
    return _normalize(ints, ranks, caps)


def is_boundary(reg: tuple) -> bool:
    """Time leaves the region immediately (some clock sits on an integer)."""
    return any(r == 0 for _, r in reg)


def reset(reg: tuple, idx) -> tuple:
    out = list(reg)
    for i in idx:
        out[i] = (0, 0)
    # ranks may now have gaps; recompress
    order = sorted({r for _, r in out if r > 0})
    pos = {r: i + 1 for i, r in enumerate(order)}
    return tuple((k, pos.get(r, r)) for k, r in out)


def enumerate_regions(caps) -> list:
    """Every region over clocks with the given maximal constants."""
    n = len(caps)
    out = set()
    for ints in itertools.product(*[range(c + 2) for c in caps]):
        bounded = [i for i in range(n) if ints[i] <= caps[i]]
        # ordered set partitions of bounded clocks into a zero block and ranked blocks
        for labels in itertools.product(range(len(bounded) + 1), repeat=len(bounded)):
            used = sorted(set(x for x in labels if x > 0))
            if used != list(range(1, len(used) + 1)):
                continue
            ranks = [-1] * n
            for i, lab in zip(bounded, labels):
                ranks[i] = lab
            reg = []
            ok = True
            for i in range(n):
                if ints[i] > caps[i]:
                    reg.append((caps[i] + 1, -1))
                elif ints[i] == caps[i] and ranks[i] > 0:
                    ok = False
                    break
                else:
                    reg.append((ints[i], ranks[i]))
            if ok:
                out.add(tuple(reg))
    return sorted(out)


def _holds(reg: tuple, i: int, j: int, b: int) -> bool:
    """Does ``x_i - x_j <~ b`` hold on the region?  Index 0 is the constant zero."""
    if i and j:
        raise OracleRefusal("diagonal clock constraints are not supported by the oracle")
    if b == dbm.INF:
        return True
    c, weak = dbm.const(b), dbm.is_weak(b)
    if j == 0:  # x <~ c
        k, r = reg[i - 1]
        if r < 0:
            return False
        if r == 0:
            return k <= c if weak else k < c
        return k + 1 <= c
    # -x <~ c, i.e. x >~ -c
    k, r = reg[j - 1]
    c = -c
    if r < 0:
        return True
    if r == 0:
        return k >= c if weak else k > c
    return k >= c


def eval_pred(p, key, reg) -> bool:
    """Evaluate a compiled predicate (see :func:`compile_pred`) on one region."""
    tag = p[0]
    if tag == "T":
        return True
    if tag == "F":
        return False
    if tag == "mode":
        return key[p[1]] == p[2]
    if tag == "var":
        return compare(sum(c * key[i] for i, c in p[1]), p[2], p[3])
    if tag == "clock":
        return any(all(_holds(reg, i, j, b) for i, j, b in cj) for cj in p[1])
    if tag == "not":
        return not eval_pred(p[1], key, reg)
    if tag == "and":
        return eval_pred(p[1], key, reg) and eval_pred(p[2], key, reg)
    if tag == "or":
        return eval_pred(p[1], key, reg) or eval_pred(p[2], key, reg)
    raise ValueError(tag)


# ---------------------------------------------------------------------------
# The graph


@dataclass
class RegionGraph:
    clocks: tuple  # model clocks, then extra clocks, then the divergence clock if any
    caps: tuple
    nodes: list  # (key, region)
    index: dict
    succ: list  # per node: list of (target, kind) with kind in {"time", "jump", "tick"}
    initial: tuple  # node ids
    aux: int | None  # position of the divergence clock

    def __len__(self):
        return len(self.nodes)

    def accepting(self, v: int) -> bool:
        """The divergence clock has just reached 1."""
        if self.aux is None:
            return False
        return self.nodes[v][1][self.aux] == (1, 0)


def build_region_graph(net: Network, extra_clocks: tuple = (), extra_bounds: dict | None = None,
                       divergence: bool = False, budget: int | None = None) -> RegionGraph:
    """Explore the region graph forward from the initial region.

    ``extra_clocks`` are never touched by the model (freeze clocks); for each
    node the graph also contains the node with any one of them reset, so a
    freeze binder can be evaluated anywhere.
    """
    budget = region_budget() if budget is None else budget
    syms = Symbols(net, tuple(extra_clocks))
    model_clocks = net.all_clocks
    clocks = model_clocks + tuple(extra_clocks) + ((AUX,) if divergence else ())
    aux = len(clocks) - 1 if divergence else None
    procs = net.processes
    nproc = len(procs)
    vdecls = syms.var_decls

    maxima: dict = {}
    for p in procs:
        for nd in [m.inv for m in p.modes] + [t.guard for t in p.transitions] + [p.init]:
            clock_maxima(nd, syms, maxima)
    clock_maxima(net.initial, syms, maxima)
    for c, v in (extra_bounds or {}).items():
        maxima[c] = max(v, maxima.get(c, 0))
    caps = tuple(1 if c == AUX else maxima.get(c, 0) for c in clocks)

    comp = {}

    def pred(node, proc=None):
        k = (node, proc)
        if k not in comp:
            comp[k] = compile_pred(node, syms, clocks, proc)
        return comp[k]

    inv = [[pred(m.inv, pi) for m in p.modes] for pi, p in enumerate(procs)]
    guards = [[pred(t.guard, pi) for t in p.transitions] for pi, p in enumerate(procs)]
    kinds = {c.name: c.kind for c in net.channels}
    cidx = {c: i for i, c in enumerate(clocks)}
    mode_of = [{m.name: mi for mi, m in enumerate(p.modes)} for p in procs]
    freeze_idx = [cidx[c] for c in extra_clocks]

    def inv_ok(key, reg):
        return all(eval_pred(inv[pi][key[pi]], key, reg) for pi in range(nproc))

    def apply(key, parts):
        k = list(key)
        env = {v.name: key[nproc + i] for i, v in enumerate(vdecls)}
        for pi, ti in parts:
            t = procs[pi].transitions[ti]
            k[pi] = mode_of[pi][t.target]
            for var, expr in t.updates:
                env[var] = expr.eval(env)
        for i, v in enumerate(vdecls):
            if not v.lo <= env[v.name] <= v.hi:
                raise ModelError(f"assignment puts {v.name}={env[v.name]} outside [{v.lo}..{v.hi}]")
            k[nproc + i] = env[v.name]
        return tuple(k)

    def enabled(pi, key, reg):
        return [ti for ti, t in enumerate(procs[pi].transitions)
                if t.source == procs[pi].modes[key[pi]].name and eval_pred(guards[pi][ti], key, reg)]

    def steps(key, reg):
        en = [enabled(pi, key, reg) for pi in range(nproc)]
        for pi in range(nproc):
            for ti in en[pi]:
                t = procs[pi].transitions[ti]
                if t.sync is None:
                    yield ((pi, ti),)
                    continue
                ch, d = t.sync
                if d != "!":
                    continue
                recv = [[(qi, ui) for ui in en[qi] if procs[qi].transitions[ui].sync == (ch, "?")]
                        for qi in range(nproc) if qi != pi]
                if kinds[ch] == "binary":
                    for r in itertools.chain.from_iterable(recv):
                        yield ((pi, ti), r)
                else:
                    for combo in itertools.product(*[c if c else [None] for c in recv]):
                        yield ((pi, ti),) + tuple(c for c in combo if c is not None)

    init_modes = _init_modes(net, syms)
    init_key = init_modes + tuple(v.init for v in vdecls)
    zero = zero_region(caps)
    start_pred = pred(conj([net.initial] + [conj(c for c in conjuncts(p.init)
                                                  if not isinstance(c, Prop)) for p in procs]))

    nodes: list = []
    index: dict = {}
    succ: list = []
    todo: deque = deque()

    def add(key, reg):
        v = index.get((key, reg))
        if v is None:
            if len(nodes) >= budget:
                raise OracleRefusal(
                    f"region graph exceeds the budget of {budget} nodes; "
                    "raise ZENOCHECK_REGION_BUDGET to allow more")
            v = len(nodes)
            index[(key, reg)] = v
            nodes.append((key, reg))
            succ.append(None)
            todo.append(v)
        return v

    initial = ()
    if inv_ok(init_key, zero) and eval_pred(start_pred, init_key, zero):
        initial = (add(init_key, zero),)
    while todo:
        v = todo.popleft()
        key, reg = nodes[v]
        out = []
        if aux is not None and reg[aux] == (1, 0):
            # the divergence clock is reset before anything else happens
            out.append((add(key, reset(reg, (aux,))), "tick"))
        else:
            nxt = time_successor(reg, caps)
            if nxt is None:
                out.append((v, "time"))
            elif inv_ok(key, nxt):
                out.append((add(key, nxt), "time"))
            for parts in steps(key, reg):
                dst = apply(key, parts)
                rs = sorted({cidx[c] for pi, ti in parts for c in procs[pi].transitions[ti].resets})
                reg2 = reset(reg, rs)
                if inv_ok(dst, reg2):
                    out.append((add(dst, reg2), "jump"))
        for i in freeze_idx:
            add(key, reset(reg, (i,)))
        succ[v] = out
    return RegionGraph(clocks, caps, nodes, index, succ, initial, aux)


# ---------------------------------------------------------------------------
# Labeling


class _Labeler:
    def __init__(self, g: RegionGraph, net: Network, extra_clocks: tuple):
        self.g = g
        self.syms = Symbols(net, tuple(extra_clocks))
        self.pred_: list = [[] for _ in g.nodes]
        for v, out in enumerate(g.succ):
            for w, kind in out:
                self.pred_[w].append((v, kind))
        self.all = frozenset(range(len(g.nodes)))

    def atom(self, node: Node) -> frozenset:
        p = compile_pred(node, self.syms, self.g.clocks)
        return frozenset(v for v, (k, r) in enumerate(self.g.nodes) if eval_pred(p, k, r))

    def _step_ok(self, v: int, w: int, kind: str, left: frozenset) -> bool:
        # leaving a boundary region by delay passes through the successor's interior
        if kind == "time" and is_boundary(self.g.nodes[v][1]):
            return w in left
        return True

    def until(self, left: frozenset, right: frozenset) -> frozenset:
        y = set(right)
        work = deque(right)
        while work:
            w = work.popleft()
            for v, kind in self.pred_[w]:
                if v in y or v not in left:
                    continue
                if self._step_ok(v, w, kind, left):
                    y.add(v)
                    work.append(v)
        return frozenset(y)

    def always(self, body: frozenset) -> frozenset:
        """Fair greatest fixpoint: stay in ``body`` forever and pass 1 time unit infinitely often."""
        g = self.g
        if g.aux is None:
            raise OracleRefusal("graph was built without the divergence clock")
        z = frozenset(body)
        while True:
            goal = frozenset(v for v in z if g.accepting(v)
                             and any(w in z for w, _ in g.succ[v]))
            reach = self.until(z, goal)
            if reach == z:
                return z
            z = reach

    def freeze(self, clock: str, body: frozenset) -> frozenset:
        i = self.g.clocks.index(clock)
        out = set()
        for v, (k, r) in enumerate(self.g.nodes):
            w = self.g.index[(k, reset(r, (i,)))]
            if w in body:
                out.add(v)
        return frozenset(out)

    def label(self, phi: Node) -> frozenset:
        if isinstance(phi, Const):
            return self.all if phi.value else frozenset()
        if isinstance(phi, (Prop, Cmp)):
            return self.atom(phi)
        if isinstance(phi, Not):
            return self.all - self.label(phi.arg)
        if isinstance(phi, And):
            return self.label(phi.left) & self.label(phi.right)
        if isinstance(phi, Or):
            return self.label(phi.left) | self.label(phi.right)
        if isinstance(phi, Freeze):
            return self.freeze(phi.clock, self.label(phi.body))
        if isinstance(phi, ExistsUntil):
            return self.until(self.label(phi.left), self.label(phi.right))
        if isinstance(phi, ExistsAlways):
            return self.always(self.label(phi.body))
        raise TypeError(f"not a core formula node: {phi!r}")


def _formula_bounds(phi: Node, net: Network) -> dict:
    syms = Symbols(net, freeze_clocks(phi))
    return clock_maxima(phi, syms, {})


def _has_always(phi: Node) -> bool:
    from .syntax import walk
    return any(isinstance(n, ExistsAlways) for n in walk(phi))


def oracle_satisfying(net: Network, phi: Node, budget: int | None = None):
    """Return ``(graph, node set satisfying phi)``."""
    core = expand_shorthands(phi)
    extra = freeze_clocks(core)
    g = build_region_graph(net, extra, _formula_bounds(core, net), _has_always(core), budget)
    return g, _Labeler(g, net, extra).label(core)


def oracle_check(net: Network, phi: Node, budget: int | None = None) -> Answer:
    """Exact verdict over non-Zeno runs, computed on the region graph."""
    g, sat = oracle_satisfying(net, phi, budget)
    ok = all(v in sat for v in g.initial)
    return Answer(Verdict.TRUE if ok else Verdict.FALSE, Stats(peak_zones=len(g)))


# ---------------------------------------------------------------------------
# Random small instances for cross-checking


def random_instance(rng, max_const: int = 2) -> tuple:
    """A random ``(model_text, formula_text)`` pair small enough for the oracle.

    Clock atoms compare a single clock with a constant, so the oracle never
    refuses on constraint shape.
    """
    nproc = rng.choice((1, 1, 2))
    clocks = [f"x{i}" for i in range(nproc)]
    chans = ["c"] if nproc > 1 else []
    kind = rng.choice(("binary", "broadcast"))
    modes_all = []
    lines = [f"channel c {kind};"] if chans else []

    def atom(cl):
        x = rng.choice(cl)
        op = rng.choice(("<", "<=", ">", ">=", "="))
        return f"{x} {op} {rng.randint(0, max_const)}"

    for pi in range(nproc):
        x = clocks[pi]
        nm = rng.choice((2, 2, 3))
        modes = [f"m{pi}{j}" for j in range(nm)]
        modes_all += modes
        lines.append(f"process P{pi} {{")
        lines.append(f"  clock {x};")
        for j, m in enumerate(modes):
            if j > 0 and rng.random() < 0.4:
                lines.append(f"  mode {m} inv {x} {rng.choice(('<=', '<'))} {rng.randint(1, max_const)};")
            elif j == 0 and rng.random() < 0.3:
                lines.append(f"  mode {m} inv {x} <= {rng.randint(1, max_const)};")
            else:
                lines.append(f"  mode {m};")
        for _ in range(rng.randint(1, 4)):
            src, dst = rng.choice(modes), rng.choice(modes)
            parts = [f"  trans {src} -> {dst}"]
            if rng.random() < 0.7:
                parts.append("when " + " and ".join(atom(clocks) for _ in range(rng.randint(1, 2))))
            if chans and rng.random() < 0.4:
                parts.append(f"sync c{rng.choice('!?')}")
            if rng.random() < 0.5:
                parts.append(f"reset {{{x}}}")
            lines.append(" ".join(parts) + ";")
        lines.append(f"  init {modes[0]};")
        lines.append("}")
    lines.append("system " + ", ".join(f"P{i}" for i in range(nproc)) + ";")
    lines.append("initial " + " and ".join(f"{x} = 0" for x in clocks) + ";")

    def state(depth):
        r = rng.random()
        if depth == 0 or r < 0.3:
            return rng.choice(modes_all) if rng.random() < 0.7 else atom(clocks)
        if r < 0.4:
            return f"not ({state(depth - 1)})"
        if r < 0.55:
            return f"({state(depth - 1)}) {rng.choice(('and', 'or', '->'))} ({state(depth - 1)})"
        if r < 0.65:
            q = rng.choice(("exists", "forall"))
            return f"{q} ({state(depth - 1)} until {state(depth - 1)})"
        if r < 0.75:
            y = f"y{depth}"
            op = rng.choice(("<", "<=", ">", ">="))
            body = f"({state(depth - 1)}) {rng.choice(('and', 'or'))} {y} {op} {rng.randint(0, max_const)}"
            q = rng.choice(("exists", "forall"))
            t = rng.choice(("eventually", "always"))
            return f"freeze {y} . {q} {t} ({body})"
        q = rng.choice(("exists", "forall"))
        t = rng.choice(("eventually", "always"))
        return f"{q} {t} ({state(depth - 1)})"

    return "\n".join(lines) + "\n", state(rng.choice((1, 2, 2)))
