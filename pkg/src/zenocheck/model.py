"""Networks of timed automata: data model, text front-end and the compiled product.

The compiled form (:class:`System`) enumerates the discrete configurations
reachable when clock constraints are ignored, and builds one symbolic edge
per product transition between them.  Clock constraints are kept as
federations of DBMs over the model clocks and lifted on demand into larger
signatures (freeze clocks, the auxiliary non-Zeno clock).
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field

from . import dbm
from .syntax import (TRUE, And, Cmp, Const, ExprParser, IntExpr, Node, Not, Or,
                     ParseError, Prop, TokenStream, compare, conj, conjuncts,
                     format_node, int_expr, walk)
from .zones import EdgeOp, Signature, StateSet, fed_complement, fed_intersect, fed_reduce


class ModelError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Data model


@dataclass(frozen=True)
class VarDecl:
    name: str
    lo: int
    hi: int
    init: int


@dataclass(frozen=True)
class Channel:
    name: str
    kind: str  # "binary" | "broadcast"


@dataclass(frozen=True)
class Mode:
    name: str
    inv: Node = TRUE


@dataclass(frozen=True)
class Transition:
    source: str
    target: str
    guard: Node = TRUE
    sync: tuple | None = None  # (channel, "!" | "?")
    resets: tuple = ()
    updates: tuple = ()  # ((var, IntExpr), ...)


@dataclass(frozen=True)
class Process:
    name: str
    modes: tuple
    transitions: tuple = ()
    init: Node = TRUE
    clocks: tuple = ()
    vars: tuple = ()

    def mode_index(self, name: str) -> int:
        for i, m in enumerate(self.modes):
            if m.name == name:
                return i
        raise KeyError(name)


@dataclass(frozen=True)
class Network:
    processes: tuple
    clocks: tuple = ()  # global clocks
    vars: tuple = ()  # global VarDecls
    channels: tuple = ()
    initial: Node = TRUE

    @property
    def all_clocks(self) -> tuple:
        out = list(self.clocks)
        for p in self.processes:
            out.extend(p.clocks)
        return tuple(out)

    @property
    def all_vars(self) -> tuple:
        out = list(self.vars)
        for p in self.processes:
            out.extend(p.vars)
        return tuple(out)

    def channel(self, name: str) -> Channel:
        for c in self.channels:
            if c.name == name:
                return c
        raise KeyError(name)

    def owner(self) -> dict:
        """Map each local clock/variable name to its process index."""
        out = {}
        for i, p in enumerate(self.processes):
            for c in p.clocks:
                out[c] = i
            for v in p.vars:
                out[v.name] = i
        return out


# ---------------------------------------------------------------------------
# Name resolution


class Symbols:
    """Lookup tables for clocks, variables and (possibly qualified) mode names."""

    def __init__(self, net: Network, extra_clocks: tuple = ()):
        self.net = net
        self.clocks = net.all_clocks + tuple(extra_clocks)
        self.clock_set = set(self.clocks)
        self.var_decls = net.all_vars
        self.var_index = {v.name: i for i, v in enumerate(self.var_decls)}
        self.modes: dict = {}
        for pi, p in enumerate(net.processes):
            for mi, m in enumerate(p.modes):
                self.modes.setdefault(m.name, []).append((pi, mi))
                self.modes[f"{p.name}.{m.name}"] = [(pi, mi)]

    def mode(self, name: str, proc: int | None = None):
        hits = self.modes.get(name)
        if not hits:
            return None
        if len(hits) > 1 and proc is not None:
            own = [h for h in hits if h[0] == proc]
            if len(own) == 1:
                return own[0]
        if len(hits) > 1:
            raise ModelError(f"ambiguous mode name {name!r}; qualify it as process.mode")
        return hits[0]

    def kind(self, name: str) -> str | None:
        if name in self.clock_set:
            return "clock"
        if name in self.var_index:
            return "var"
        return None

    def check(self, node: Node, proc: int | None = None, positions: dict | None = None):
        """Raise ParseError on undeclared or ill-typed names."""
        positions = positions or {}
        for sub in walk(node):
            line, col = positions.get(sub, (0, 0))
            try:
                if isinstance(sub, Prop):
                    if self.mode(sub.name, proc) is None:
                        raise ModelError(f"undeclared identifier {sub.name!r}")
                elif isinstance(sub, Cmp):
                    clock_atom_shape(sub, self)
            except ModelError as e:
                raise ParseError(str(e), line, col) from None


def clock_atom_shape(node: Cmp, syms: Symbols):
    """Classify a comparison; returns ("var",) or ("clock", left, right)."""
    kinds = set()
    for name, _ in node.terms:
        k = syms.kind(name)
        if k is None:
            raise ModelError(f"undeclared identifier {name!r}")
        kinds.add(k)
    if kinds == {"var"}:
        return ("var",)
    if kinds != {"clock"}:
        raise ModelError("comparison mixes clocks and integer variables")
    terms = dict(node.terms)
    pos = [n for n, c in terms.items() if c == 1]
    neg = [n for n, c in terms.items() if c == -1]
    if len(pos) + len(neg) != len(terms) or len(pos) > 1 or len(neg) > 1:
        raise ModelError("clock atoms must have the form x ~ c or x - y ~ c")
    return ("clock", pos[0] if pos else None, neg[0] if neg else None)


def clock_atom_dnf(left: int, right: int, op: str, c: int) -> list:
    """``x_left - x_right op c`` as a list of conjunctions of (i, j, encoded bound)."""
    le = [(left, right, dbm.bound(c, True))]
    lt = [(left, right, dbm.bound(c, False))]
    ge = [(right, left, dbm.bound(-c, True))]
    gt = [(right, left, dbm.bound(-c, False))]
    return {"<": [lt], "<=": [le], ">": [gt], ">=": [ge], "=": [le + ge],
            "!=": [lt, gt]}[op]


# ---------------------------------------------------------------------------
# Compiled predicates: a small tuple-based tree evaluated per discrete key


def compile_pred(node: Node, syms: Symbols, clocks: tuple, proc: int | None = None):
    """Resolve ``node`` against ``syms``; clock atoms index into ``clocks``."""
    idx = {c: i + 1 for i, c in enumerate(clocks)}
    nproc = len(syms.net.processes)

    def go(n):
        if isinstance(n, Const):
            return ("T",) if n.value else ("F",)
        if isinstance(n, Prop):
            hit = syms.mode(n.name, proc)
            if hit is None:
                raise ModelError(f"undeclared identifier {n.name!r}")
            return ("mode", hit[0], hit[1])
        if isinstance(n, Cmp):
            shape = clock_atom_shape(n, syms)
            if shape[0] == "var":
                coefs = tuple((nproc + syms.var_index[v], c) for v, c in n.terms)
                return ("var", coefs, n.op, n.const)
            _, left, right = shape
            for nm in (left, right):
                if nm is not None and nm not in idx:
                    raise ModelError(f"clock {nm!r} is not in scope")
            i = 0 if left is None else idx[left]
            j = 0 if right is None else idx[right]
            return ("clock", tuple(tuple(c) for c in clock_atom_dnf(i, j, n.op, n.const)))
        if isinstance(n, Not):
            return ("not", go(n.arg))
        if isinstance(n, And):
            return ("and", go(n.left), go(n.right))
        if isinstance(n, Or):
            return ("or", go(n.left), go(n.right))
        raise ModelError(f"not a state predicate: {format_node(n)}")

    return go(node)


class PredEval:
    """Evaluates compiled predicates to federations at a given key and dimension."""

    def __init__(self, n: int):
        self.n = n
        self.universe = (dbm.universe(n),)
        self._atoms: dict = {}

    def clock_fed(self, dnf) -> tuple:
        f = self._atoms.get(dnf)
        if f is None:
            zs = []
            for conj_ in dnf:
                z = self.universe[0]
                for i, j, b in conj_:
                    z = dbm.constrain(z, self.n, i, j, b)
                    if z is None:
                        break
                if z is not None:
                    zs.append(z)
            f = fed_reduce(zs)
            self._atoms[dnf] = f
        return f

    def fed(self, r, key) -> tuple:
        tag = r[0]
        if tag == "T":
            return self.universe
        if tag == "F":
            return ()
        if tag == "mode":
            return self.universe if key[r[1]] == r[2] else ()
        if tag == "var":
            val = sum(c * key[i] for i, c in r[1])
            return self.universe if compare(val, r[2], r[3]) else ()
        if tag == "clock":
            return self.clock_fed(r[1])
        if tag == "not":
            return fed_complement(self.fed(r[1], key), self.n)
        if tag == "and":
            a = self.fed(r[1], key)
            if not a:
                return ()
            b = self.fed(r[2], key)
            return fed_intersect(a, b, self.n) if b else ()
        if tag == "or":
            a = self.fed(r[1], key)
            b = self.fed(r[2], key)
            return fed_reduce(a + b) if a and b else (a or b)
        raise ValueError(tag)


def clock_maxima(node: Node, syms: Symbols, acc: dict) -> dict:
    """Fold the largest constant each clock is compared with into ``acc``."""
    for sub in walk(node):
        if isinstance(sub, Cmp) and clock_atom_shape(sub, syms)[0] == "clock":
            for name in sub.names():
                acc[name] = max(acc.get(name, 0), abs(sub.const))
    return acc


def clock_constants(node: Node, syms: Symbols) -> list:
    out = []
    for sub in walk(node):
        if isinstance(sub, Cmp) and clock_atom_shape(sub, syms)[0] == "clock":
            out.append(abs(sub.const))
    return out


# ---------------------------------------------------------------------------
# Parser


class _ModelParser:
    def __init__(self, text: str):
        self.ts = TokenStream(text)
        self.clocks: list = []
        self.vars: list = []
        self.channels: list = []
        self.procs: list = []
        self.system: list | None = None
        self.initial: list = []
        self.preds: list = []  # (node, proc name, positions) checked after declarations

    def pred(self, proc: str | None) -> Node:
        p = ExprParser(self.ts)
        node = p.implication()
        self.preds.append((node, proc, p.positions))
        return node

    def var_decl(self) -> VarDecl:
        ts = self.ts
        name = ts.name().text
        ts.expect("[")
        lo = ts.integer()
        ts.expect("..")
        hi = ts.integer()
        ts.expect("]")
        init = lo
        tok = ts.cur
        if ts.accept("="):
            tok = ts.cur
            init = ts.integer()
        ts.expect(";")
        if lo > hi:
            ts.error(f"empty range for {name!r}")
        if not lo <= init <= hi:
            ts.error(f"initial value {init} of {name!r} outside [{lo}..{hi}]", tok)
        return VarDecl(name, lo, hi, init)

    def names(self) -> list:
        out = [self.ts.name().text]
        while self.ts.accept(","):
            out.append(self.ts.name().text)
        return out

    def parse(self) -> Network:
        ts = self.ts
        while not ts.done():
            tok = ts.cur
            if ts.accept("clock"):
                self.clocks.extend(self.names())
                ts.expect(";")
            elif ts.accept("int"):
                self.vars.append(self.var_decl())
            elif ts.accept("channel"):
                name = ts.name().text
                kind = "binary"
                if ts.cur.text in ("binary", "broadcast"):
                    kind = ts.cur.text
                    ts.i += 1
                ts.expect(";")
                self.channels.append(Channel(name, kind))
            elif ts.accept("process"):
                self.procs.append(self.process())
            elif ts.accept("system"):
                self.system = [(t.text, t) for t in self._name_tokens()]
                ts.expect(";")
            elif ts.accept("initial"):
                self.initial.append(self.pred(None))
                ts.expect(";")
            else:
                ts.error(f"unexpected {tok.text!r}")
        return self.finish()

    def _name_tokens(self) -> list:
        out = [self.ts.name()]
        while self.ts.accept(","):
            out.append(self.ts.name())
        return out

    def process(self) -> Process:
        ts = self.ts
        name = ts.name().text
        ts.expect("{")
        clocks, vars_, modes, trans, init = [], [], [], [], []
        while not ts.accept("}"):
            tok = ts.cur
            if ts.accept("clock"):
                clocks.extend(self.names())
                ts.expect(";")
            elif ts.accept("int"):
                vars_.append(self.var_decl())
            elif ts.accept("mode"):
                mname = ts.name().text
                inv = self.pred(name) if ts.accept("inv") else TRUE
                ts.expect(";")
                if any(m.name == mname for m in modes):
                    ts.error(f"duplicate mode {mname!r}", tok)
                modes.append(Mode(mname, inv))
            elif ts.accept("trans"):
                trans.append((self.transition(name), tok))
            elif ts.accept("init"):
                init.append(self.pred(name))
                ts.expect(";")
            elif ts.done():
                ts.error(f"unterminated process {name!r}")
            else:
                ts.error(f"unexpected {tok.text!r} in process {name!r}")
        names = {m.name for m in modes}
        for t, tok in trans:
            for end in (t.source, t.target):
                if end not in names:
                    ts.error(f"undeclared mode {end!r} in process {name!r}", tok)
        if not modes:
            ts.error(f"process {name!r} has no modes")
        return Process(name, tuple(modes), tuple(t for t, _ in trans),
                       conj(init), tuple(clocks), tuple(vars_))

    def transition(self, proc: str) -> Transition:
        ts = self.ts
        src = ts.name().text
        ts.expect("->")
        dst = ts.name().text
        guard, sync, resets, updates = TRUE, None, [], []
        self._reset_toks = getattr(self, "_reset_toks", [])
        while not ts.accept(";"):
            if ts.accept("when"):
                guard = self.pred(proc)
            elif ts.accept("sync"):
                tok = ts.cur
                ch = ts.name().text
                if ts.accept("!"):
                    sync = (ch, "!")
                elif ts.accept("?"):
                    sync = (ch, "?")
                else:
                    ts.error("expected '!' or '?' after channel name")
                self._reset_toks.append(("chan", ch, tok))
            elif ts.accept("reset"):
                ts.expect("{")
                if not ts.at("}"):
                    for t in self._name_tokens():
                        resets.append(t.text)
                        self._reset_toks.append(("clock", t.text, t))
                ts.expect("}")
            elif ts.accept("do"):
                ts.expect("{")
                while not ts.accept("}"):
                    t = ts.name()
                    ts.expect(":=")
                    form, _ = ExprParser(ts).linear()
                    updates.append((t.text, int_expr(form)))
                    self._reset_toks.append(("var", t.text, t))
                    for nm in form:
                        if nm is not None:
                            self._reset_toks.append(("var", nm, t))
                    if not ts.at("}"):
                        ts.expect(",")
            else:
                ts.error(f"unexpected {ts.cur.text or 'end of input'!r} in transition")
        return Transition(src, dst, guard, sync, tuple(resets), tuple(updates))

    def finish(self) -> Network:
        procs = self.procs
        by_name = {p.name: p for p in procs}
        if len(by_name) != len(procs):
            raise ParseError("duplicate process name")
        if self.system is not None:
            chosen = []
            for nm, tok in self.system:
                if nm not in by_name:
                    raise ParseError(f"undeclared process {nm!r}", tok.line, tok.col)
                chosen.append(by_name[nm])
            procs = chosen
        net = Network(tuple(procs), tuple(self.clocks), tuple(self.vars),
                      tuple(self.channels), conj(self.initial))
        seen = set()
        for nm in list(net.all_clocks) + [v.name for v in net.all_vars]:
            if nm in seen:
                raise ParseError(f"duplicate declaration of {nm!r}")
            seen.add(nm)
        syms = Symbols(net)
        pidx = {p.name: i for i, p in enumerate(net.processes)}
        for node, proc, pos in self.preds:
            if proc is None or proc in pidx:
                syms.check(node, pidx.get(proc), pos)
        chans = {c.name for c in net.channels}
        for kind, nm, tok in getattr(self, "_reset_toks", []):
            ok = {"chan": nm in chans, "clock": nm in syms.clock_set,
                  "var": nm in syms.var_index}[kind]
            if not ok:
                raise ParseError(f"undeclared identifier {nm!r}", tok.line, tok.col)
        for p in net.processes:
            modes_in_init = [c for c in conjuncts(p.init) if isinstance(c, Prop)]
            if len(modes_in_init) != 1:
                raise ParseError(f"init of process {p.name!r} must name exactly one mode")
        return net


def parse_model(text: str) -> Network:
    return _ModelParser(text).parse()


# ---------------------------------------------------------------------------
# Printer


def _var_text(v: VarDecl) -> str:
    return f"int {v.name} [{v.lo}..{v.hi}] = {v.init};"


def format_model(net: Network) -> str:
    out = []
    if net.clocks:
        out.append(f"clock {', '.join(net.clocks)};")
    out.extend(_var_text(v) for v in net.vars)
    out.extend(f"channel {c.name} {c.kind};" for c in net.channels)
    for p in net.processes:
        out.append("")
        out.append(f"process {p.name} {{")
        if p.clocks:
            out.append(f"  clock {', '.join(p.clocks)};")
        out.extend("  " + _var_text(v) for v in p.vars)
        for m in p.modes:
            inv = "" if m.inv == TRUE else f" inv {format_node(m.inv)}"
            out.append(f"  mode {m.name}{inv};")
        for t in p.transitions:
            s = f"  trans {t.source} -> {t.target}"
            if t.guard != TRUE:
                s += f" when {format_node(t.guard)}"
            if t.sync:
                s += f" sync {t.sync[0]}{t.sync[1]}"
            if t.resets:
                s += f" reset {{{', '.join(t.resets)}}}"
            if t.updates:
                s += " do {" + ", ".join(f"{v} := {e}" for v, e in t.updates) + "}"
            out.append(s + ";")
        out.append(f"  init {format_node(p.init)};")
        out.append("}")
    out.append("")
    out.append(f"system {', '.join(p.name for p in net.processes)};")
    if net.initial != TRUE:
        out.append(f"initial {format_node(net.initial)};")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Product transitions (discrete, key-specialised)


@dataclass(frozen=True)
class ProductTransition:
    """Participating (process index, transition index) pairs of one product step."""

    parts: tuple
    channel: str | None = None


def product_transitions(net: Network) -> list:
    """All synchronisation patterns, ignoring guards.

    For broadcast channels one entry is produced per sender and per choice of
    receiving subset/transition; whether absent receivers were forced to
    participate is decided on concrete keys by :class:`System`.
    """
    out = []
    procs = net.processes
    kinds = {c.name: c.kind for c in net.channels}
    for pi, p in enumerate(procs):
        for ti, t in enumerate(p.transitions):
            if t.sync is None:
                out.append(ProductTransition(((pi, ti),)))
            elif t.sync[1] == "!":
                ch = t.sync[0]
                recv = [[(qi, ui) for ui, u in enumerate(q.transitions) if u.sync == (ch, "?")]
                        for qi, q in enumerate(procs) if qi != pi]
                if kinds[ch] == "binary":
                    for r in itertools.chain.from_iterable(recv):
                        out.append(ProductTransition(((pi, ti), r), ch))
                else:
                    options = [[None] + r for r in recv]
                    for combo in itertools.product(*options):
                        parts = ((pi, ti),) + tuple(c for c in combo if c is not None)
                        out.append(ProductTransition(parts, ch))
    return out


@dataclass
class System:
    """A network compiled against its discrete state space."""

    net: Network
    syms: Symbols
    clocks: tuple
    keys: tuple
    init_key: tuple
    inv: dict  # key -> DBM over model clocks (missing: true)
    edges: tuple  # EdgeOp over model clocks
    cmax: int
    nproc: int
    clock_max: dict = field(default_factory=dict)
    universe: str = "reachable"
    opponents: frozenset = frozenset()  # processes whose state the key space ranges over
    _spaces: dict = field(default_factory=dict, repr=False)

    @property
    def dim(self) -> int:
        return len(self.clocks) + 1

    def signature(self, extra: tuple = ()) -> Signature:
        return Signature(self.clocks + tuple(extra), self.keys)

    def describe_key(self, key) -> str:
        parts = [f"{p.name}.{p.modes[key[i]].name}" for i, p in enumerate(self.net.processes)]
        parts += [f"{v.name}={key[self.nproc + i]}" for i, v in enumerate(self.syms.var_decls)]
        return ",".join(parts)

    # lifting -------------------------------------------------------------
    def space(self, sig: Signature):
        """Invariants and edges (grouped by target key) lifted into ``sig``."""
        extra = len(sig.clocks) - len(self.clocks)
        hit = self._spaces.get(extra)
        if hit is not None:
            return hit
        if sig.clocks[:len(self.clocks)] != self.clocks:
            raise ModelError("signature does not extend the model clocks")

        def lift(z):
            n = self.dim
            for _ in range(extra):
                z = dbm.insert_clock(z, n)
                n += 1
            return z
        inv = {k: lift(z) for k, z in self.inv.items()}
        into: dict = {}
        for e in self.edges:
            le = EdgeOp(e.src, e.dst, tuple(lift(g) for g in e.guard), e.resets)
            into.setdefault(e.dst, []).append(le)
        res = (inv, {k: tuple(v) for k, v in into.items()})
        self._spaces[extra] = res
        return res

    # predicates ----------------------------------------------------------
    def predicate(self, node: Node, sig: Signature, proc: int | None = None) -> StateSet:
        extra = sig.clocks[len(self.clocks):]
        syms = self.syms if not extra else Symbols(self.net, extra)
        r = compile_pred(node, syms, sig.clocks, proc)
        ev = PredEval(sig.dim)
        out = {}
        for k in sig.keys:
            f = ev.fed(r, k)
            if f:
                out[k] = f
        return StateSet(sig, out)

    def invariant_set(self, sig: Signature | None = None) -> StateSet:
        sig = sig or self.signature()
        inv, _ = self.space(sig)
        u = dbm.universe(sig.dim)
        return StateSet(sig, {k: (inv.get(k, u),) for k in sig.keys})

    def initial_set(self, sig: Signature | None = None) -> StateSet:
        sig = sig or self.signature()
        base = self.signature()
        z = dbm.zero(self.dim)
        s = StateSet(base, {self.init_key: (z,)})
        pred = conj([self.net.initial] + [self._init_rest(i) for i in range(self.nproc)])
        s = s & self.predicate(pred, base) & self.invariant_set(base)
        return s.lift_to(sig)

    def _init_rest(self, i: int) -> Node:
        p = self.net.processes[i]
        return conj(c for c in conjuncts(p.init) if not isinstance(c, Prop))


def _init_modes(net: Network, syms: Symbols) -> tuple:
    out = []
    for i, p in enumerate(net.processes):
        prop = [c for c in conjuncts(p.init) if isinstance(c, Prop)][0]
        hit = syms.mode(prop.name, i)
        if hit is None or hit[0] != i:
            raise ModelError(f"init of {p.name!r} names a mode of another process")
        out.append(hit[1])
    return tuple(out)


def compile_network(net: Network, universe: str = "reachable",
                    opponents: frozenset = frozenset()) -> System:
    """Build the discrete state space and symbolic product edges.

    ``universe="reachable"`` keeps the configurations reachable from the
    initial one when clock constraints are treated as satisfiable; ``"all"``
    enumerates every mode vector and variable valuation.  Processes listed in
    ``opponents`` (indices) get their modes and local variables ranged over
    every value for each reachable configuration of the others, so that
    forgetting an opponent's state stays inside the key space.
    """
    syms = Symbols(net)
    clocks = net.all_clocks
    n = len(clocks) + 1
    nproc = len(net.processes)
    ev = PredEval(n)
    procs = net.processes
    vdecls = syms.var_decls
    kinds = {c.name: c.kind for c in net.channels}

    cmax = 1
    for p in procs:
        nodes = [m.inv for m in p.modes] + [t.guard for t in p.transitions] + [p.init]
        for nd in nodes:
            cmax = max([cmax] + clock_constants(nd, syms))
    cmax = max([cmax] + clock_constants(net.initial, syms))
    clock_max: dict = {}
    for p in procs:
        for nd in [m.inv for m in p.modes] + [t.guard for t in p.transitions] + [p.init]:
            clock_maxima(nd, syms, clock_max)
    clock_maxima(net.initial, syms, clock_max)

    inv_c = [[compile_pred(m.inv, syms, clocks, pi) for m in p.modes]
             for pi, p in enumerate(procs)]
    guard_c = [[compile_pred(t.guard, syms, clocks, pi) for t in p.transitions]
               for pi, p in enumerate(procs)]
    reset_idx = [[tuple(sorted({clocks.index(c) + 1 for c in t.resets}))
                  for t in p.transitions] for p in procs]
    by_mode = [[[ti for ti, t in enumerate(p.transitions) if t.source == m.name]
                for m in p.modes] for p in procs]
    mode_of = [{m.name: mi for mi, m in enumerate(p.modes)} for p in procs]

    inv_cache: dict = {}

    def key_inv(key):
        if key in inv_cache:
            return inv_cache[key]
        f = ev.universe
        for pi in range(nproc):
            g = ev.fed(inv_c[pi][key[pi]], key)
            f = fed_intersect(f, g, n) if g else ()
            if not f:
                break
        if len(f) > 1:
            raise ModelError(f"non-convex invariant in configuration {key}")
        res = f[0] if f else None
        inv_cache[key] = res
        return res

    def apply(key, parts):
        k = list(key)
        env = {v.name: key[nproc + i] for i, v in enumerate(vdecls)}
        for pi, ti in parts:
            t = procs[pi].transitions[ti]
            k[pi] = mode_of[pi][t.target]
            for var, expr in t.updates:
                env[var] = expr.eval(env)
        for i, v in enumerate(vdecls):
            val = env[v.name]
            if not v.lo <= val <= v.hi:
                raise ModelError(f"assignment puts {v.name}={val} outside [{v.lo}..{v.hi}]")
            k[nproc + i] = val
        return tuple(k)

    def successors(key):
        """Yield (parts, guard federation) for each enabled product step at ``key``."""
        gcache = {}

        def guard(pi, ti):
            g = gcache.get((pi, ti))
            if g is None:
                g = ev.fed(guard_c[pi][ti], key)
                gcache[(pi, ti)] = g
            return g

        for pi in range(nproc):
            for ti in by_mode[pi][key[pi]]:
                t = procs[pi].transitions[ti]
                g = guard(pi, ti)
                if not g:
                    continue
                if t.sync is None:
                    yield ((pi, ti),), g
                    continue
                ch, d = t.sync
                if d != "!":
                    continue
                recv = []
                for qi in range(nproc):
                    if qi == pi:
                        continue
                    cands = [(qi, ui) for ui in by_mode[qi][key[qi]]
                             if procs[qi].transitions[ui].sync == (ch, "?") and guard(qi, ui)]
                    recv.append(cands)
                if kinds[ch] == "binary":
                    for r in itertools.chain.from_iterable(recv):
                        gg = fed_intersect(g, guard(*r), n)
                        if gg:
                            yield ((pi, ti), r), gg
                    continue
                options = []
                for cands in recv:
                    opts = [(c, guard(*c)) for c in cands]
                    absent = ev.universe
                    for _, gc in opts:
                        absent = fed_intersect(absent, fed_complement(gc, n), n)
                        if not absent:
                            break
                    if absent:
                        opts.append((None, absent))
                    options.append(opts)
                for combo in itertools.product(*options):
                    gg = g
                    for _, gc in combo:
                        gg = fed_intersect(gg, gc, n)
                        if not gg:
                            break
                    if gg:
                        parts = ((pi, ti),) + tuple(c for c, _ in combo if c is not None)
                        yield parts, gg

    syms_init = _init_modes(net, syms)
    init_key = syms_init + tuple(v.init for v in vdecls)

    if universe == "all":
        ranges = [range(len(p.modes)) for p in procs] + [range(v.lo, v.hi + 1) for v in vdecls]
        candidates = list(itertools.product(*ranges))
        valid = [k for k in candidates if key_inv(k) is not None]
    elif universe == "reachable":
        valid = []
    else:
        raise ValueError(f"unknown universe {universe!r}")

    edges: dict = {}
    seen = set()
    order = []
    if universe == "all":
        todo = deque(valid)
        seen.update(valid)
        expand_new = False
    else:
        todo = deque([init_key] if key_inv(init_key) is not None else [])
        seen.add(init_key)
        expand_new = True
    owner = net.owner()
    opp_pos = [pi for pi in sorted(opponents)]
    opp_pos += [nproc + i for i, v in enumerate(vdecls) if owner.get(v.name) in opponents]
    opp_ranges = [range(len(procs[i].modes)) if i < nproc
                  else range(vdecls[i - nproc].lo, vdecls[i - nproc].hi + 1) for i in opp_pos]

    def widen(key):
        for combo in itertools.product(*opp_ranges):
            k = list(key)
            for i, v in zip(opp_pos, combo):
                k[i] = v
            yield tuple(k)

    while todo:
        key = todo.popleft()
        if opp_pos and universe != "all":
            for k in widen(key):
                if k not in seen and key_inv(k) is not None:
                    seen.add(k)
                    todo.append(k)
        order.append(key)
        src_inv = key_inv(key)
        for parts, g in successors(key):
            g = fed_intersect(g, (src_inv,), n)
            if not g:
                continue
            dst = apply(key, parts)
            if key_inv(dst) is None:
                continue
            resets = tuple(sorted({x for pi, ti in parts for x in reset_idx[pi][ti]}))
            ek = (key, dst, resets)
            edges[ek] = edges.get(ek, ()) + g
            if dst not in seen:
                if not expand_new:
                    continue
                seen.add(dst)
                todo.append(dst)

    keys = tuple(sorted(order))
    u = dbm.universe(n)
    inv = {}
    for k in keys:
        z = key_inv(k)
        if z != u:
            inv[k] = z
    edge_ops = tuple(EdgeOp(s, d, fed_reduce(g), r)
                     for (s, d, r), g in sorted(edges.items()))
    return System(net, syms, clocks, keys, init_key, inv, edge_ops, cmax, nproc, clock_max,
                  universe, frozenset(opponents))


def load_system(text: str, universe: str = "reachable") -> System:
    return compile_network(parse_model(text), universe)
