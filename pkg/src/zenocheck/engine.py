"""Backward fixpoint evaluation of TCTL over compiled networks."""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field, replace

from . import dbm
from .model import Symbols, System, clock_maxima
from .syntax import And, Cmp, Const, Node, Not, Or, Prop, walk
from .tctl import (ExistsAlways, ExistsUntil, Fragment, Freeze, classify_fragment,
                   expand_shorthands, freeze_clocks, is_modal_free, negate_nnf)
from .zones import (Signature, StateSet, delay_forever, fed_complement, fed_includes,
                    fed_union, pre_all, time_until)

ZC = "~zc"  # not a lexable identifier, so it cannot clash with model or formula names

ABSTRACTIONS = ("none", "game", "game_discrete", "game_magnitude")


class ConfigError(ValueError):
    pass


class UnsafeAbstraction(ConfigError):
    pass


@dataclass(frozen=True)
class CheckConfig:
    d_value: int | None = None  # None: min(80, C + 1)
    d_strict: bool = False
    edgf: bool = True
    non_zeno: bool = True
    abstraction: str = "none"
    universe: str = "reachable"
    paranoid: bool = False  # re-check fixpoint invariants each iteration
    local_bounds: bool = True  # per-clock extrapolation constants instead of C_global

    def __post_init__(self):
        if self.d_value is not None and self.d_value < 1:
            raise ConfigError("d must be at least 1")
        if self.abstraction not in ABSTRACTIONS:
            raise ConfigError(f"unknown abstraction {self.abstraction!r}")


class Verdict(enum.Enum):
    TRUE = "true"
    FALSE = "false"
    MAYBE = "maybe"


@dataclass
class Stats:
    outer_iters: int = 0
    inner_iters: int = 0
    peak_zones: int = 0
    gfp_calls: int = 0
    early_exits: int = 0
    elapsed_ms: float = 0.0
    c_global: int = 0
    d_value: int = 0

    def see(self, s: StateSet):
        n = s.zone_count()
        if n > self.peak_zones:
            self.peak_zones = n


@dataclass(frozen=True)
class Answer:
    verdict: Verdict
    stats: Stats = field(compare=False)
    approximated: bool = False


def default_d(c_global: int) -> int:
    return min(80, c_global + 1)


def formula_clock_maxima(phi: Node, system: System) -> dict:
    syms = Symbols(system.net, freeze_clocks(phi))
    return clock_maxima(phi, syms, {})


def formula_clock_constants(phi: Node, system: System) -> list:
    clocks = set(system.clocks) | set(freeze_clocks(phi))
    return [abs(n.const) for n in walk(phi)
            if isinstance(n, Cmp) and any(x in clocks for x in n.names())]


class Checker:
    """One evaluation context: a system, a configuration and a formula constant bound."""

    def __init__(self, system: System, cfg: CheckConfig = CheckConfig(), c_global: int | None = None,
                 players=None, clock_max: dict | None = None):
        self.system = system
        self.clock_max = dict(system.clock_max)
        for c, v in (clock_max or {}).items():
            self.clock_max[c] = max(v, self.clock_max.get(c, 0))
        self.cfg = cfg
        self.C = max(system.cmax, c_global or 0, 1)
        self.d = cfg.d_value if cfg.d_value is not None else default_d(self.C)
        self.stats = Stats(c_global=self.C, d_value=self.d)
        self.approximated = False  # some result over-approximates its exact set
        self.under = False  # ... or under-approximates it (an over-approximation below a negation)
        self._parity = 0
        self.base = system.signature()
        self.players = players
        self._abs = None
        if cfg.abstraction != "none":
            from . import abstraction
            if players is None:
                raise ConfigError("abstraction requires a player set")
            self._abs = abstraction.make_operator(cfg.abstraction, system, players)
        self._atoms: dict = {}

    # helpers -------------------------------------------------------------
    def bounds(self, sig: Signature) -> tuple:
        if not self.cfg.local_bounds:
            zc = max(self.C, self.d)
            return (0,) + tuple(zc if c == ZC else self.C for c in sig.clocks)
        cm = self.clock_max
        return (0,) + tuple(self.d if c == ZC else cm.get(c, 0) for c in sig.clocks)

    def extrapolate(self, s: StateSet) -> StateSet:
        return s.extrapolate(self.bounds(s.sig))

    def universe(self, sig: Signature) -> StateSet:
        return StateSet.universe(sig)

    def atom(self, node: Node, sig: Signature) -> StateSet:
        key = (node, sig.clocks)
        s = self._atoms.get(key)
        if s is None:
            s = self.system.predicate(node, sig)
            self._atoms[key] = s
        return s

    def abstract(self, s: StateSet) -> StateSet:
        return s if self._abs is None else self._abs(s)

    # reachability ----------------------------------------------------------
    def reachable_bck(self, eta1: StateSet, eta2: StateSet) -> StateSet:
        """Least ``Y`` with ``Y = time_until(eta1, eta2 | (eta1 & pre(Y)))``.

        With an abstraction configured every iterate is widened by it.
        """
        sig = eta1.sig
        inv, into = self.system.space(sig)
        n = sig.dim
        bad = {k: fed_complement(f, n) for k, f in eta1.feds.items()}
        bounds = self.bounds(sig)
        y = self.abstract(time_until(eta1, eta2, inv, bad).extrapolate(bounds))
        frontier = y
        self.stats.see(y)
        while frontier:
            self.stats.inner_iters += 1
            step = eta1 & pre_all(frontier, into, inv)
            cand = self.abstract(time_until(eta1, step, inv, bad).extrapolate(bounds))
            new = {}
            feds = dict(y.feds)
            for k, f in cand.feds.items():
                have = feds.get(k, ())
                fresh = tuple(z for z in f if not (have and fed_includes(have, (z,), n)))
                if fresh:
                    new[k] = fresh
                    feds[k] = fed_union(have, fresh) if have else fresh
            frontier = StateSet(sig, new)
            y = StateSet(sig, feds)
            self.stats.see(y)
        return y

    # greatest fixpoints ----------------------------------------------------
    def _check_descent(self, old: StateSet, new: StateSet):
        if self.cfg.paranoid and not old.includes(new):
            raise AssertionError("greatest-fixpoint iterate grew")

    def gfp(self, eta: StateSet, beta: StateSet | None = None) -> StateSet:
        """``exists always eta`` over time-divergent runs; early exit on ``Y & beta`` empty."""
        self.stats.gfp_calls += 1
        sig = eta.sig
        sig2 = sig.with_clock(ZC)
        z = len(sig2.clocks)
        eta2 = eta.lift_to(sig2)
        dbound = dbm.bound(-self.d, not self.cfg.d_strict)  # 0 - ZC <~ -d
        y = eta
        while True:
            self.stats.outer_iters += 1
            target = y.lift_to(sig2).constrain(0, z, dbound)
            r = self.reachable_bck(eta2, target)
            r0 = r.constrain(z, 0, dbm.LE0)
            ynew = (y & r0.eliminate(ZC)).merge()
            self._check_descent(y, ynew)
            self.stats.see(ynew)
            if beta is not None and not (ynew & beta):
                self.stats.early_exits += 1
                return ynew
            if ynew.includes(y):
                return ynew
            y = ynew

    def gfp_zeno(self, eta: StateSet, beta: StateSet | None = None) -> StateSet:
        """Zeno-tolerant ``exists always eta``; a superset of :meth:`gfp`."""
        self.stats.gfp_calls += 1
        if self._parity:
            self.under = True
        else:
            self.approximated = True
        sig = eta.sig
        inv, into = self.system.space(sig)
        n = sig.dim
        bad = {k: fed_complement(f, n) for k, f in eta.feds.items()}
        forever = delay_forever(eta, inv)
        y = eta
        while True:
            self.stats.outer_iters += 1
            step = eta & pre_all(y, into, inv)
            keep = time_until(eta, step, inv, bad) | forever
            ynew = y & self.extrapolate(keep)
            self._check_descent(y, ynew)
            self.stats.see(ynew)
            if beta is not None and not (ynew & beta):
                self.stats.early_exits += 1
                return ynew
            if ynew.includes(y):
                return ynew
            y = ynew

    # evaluation ------------------------------------------------------------
    def eval(self, phi: Node, sig: Signature | None = None, beta: StateSet | None = None) -> StateSet:
        """Evaluate a core formula; ``beta`` (None: true) enables early gfp decisions."""
        sig = sig or self.base
        if not self.cfg.edgf:
            beta = None
        return self._eval(phi, sig, beta)

    def _eval(self, phi: Node, sig: Signature, beta):
        if isinstance(phi, Const):
            return StateSet.universe(sig) if phi.value else StateSet.empty(sig)
        if isinstance(phi, (Prop, Cmp)):
            return self.atom(phi, sig)
        if isinstance(phi, Not):
            self._parity ^= 1
            try:
                return self._eval(phi.arg, sig, None).complement()
            finally:
                self._parity ^= 1
        if isinstance(phi, Or):
            return self._eval(phi.left, sig, beta) | self._eval(phi.right, sig, beta)
        if isinstance(phi, And):
            first, second = phi.left, phi.right
            if is_modal_free(phi.right) and not is_modal_free(phi.left):
                first, second = phi.right, phi.left
            a = self._eval(first, sig, beta)
            if not a:
                return a
            nb = a if beta is None else (beta & a)
            if self.cfg.edgf and not nb:
                return StateSet.empty(sig)
            return a & self._eval(second, sig, nb if self.cfg.edgf else None)
        if isinstance(phi, Freeze):
            sig2 = sig.with_clock(phi.clock)
            x = len(sig2.clocks)
            b2 = None
            if beta is not None:
                # only the x = 0 slice of the body survives the binder
                b2 = beta.lift_to(sig2).constrain(x, 0, dbm.LE0)
            r = self._eval(phi.body, sig2, b2)
            return r.constrain(x, 0, dbm.LE0).eliminate(phi.clock)
        if isinstance(phi, ExistsUntil):
            a = self._eval(phi.left, sig, None)
            b = self._eval(phi.right, sig, None)
            return self.reachable_bck(a, b)
        if isinstance(phi, ExistsAlways):
            body = self._eval(phi.body, sig, None)
            if not body:
                return body
            if self.cfg.non_zeno:
                return self.gfp(body, beta)
            return self.gfp_zeno(body, beta)
        raise TypeError(f"not a core formula node: {phi!r}")


def model_check(system: System, phi: Node, cfg: CheckConfig = CheckConfig()) -> Answer:
    """Three-valued check of ``phi`` at the initial states."""
    t0 = time.perf_counter()
    frag = classify_fragment(phi)
    players = None
    if cfg.abstraction != "none":
        if frag not in (Fragment.FORALL, Fragment.STATE):
            raise UnsafeAbstraction(
                f"abstraction needs a universal formula, got fragment {frag.value}")
        from .abstraction import opponent_closed, players_of
        players = players_of(system, phi)
        system = opponent_closed(system, players)
    c = max([system.cmax] + formula_clock_constants(phi, system))
    chk = Checker(system, cfg, c, players, formula_clock_maxima(phi, system))
    neg = negate_nnf(phi)
    sat_neg = chk.eval(neg)
    bad = sat_neg & system.initial_set()
    approx = chk.approximated or cfg.abstraction != "none"
    if not bad:
        verdict = Verdict.MAYBE if chk.under else Verdict.TRUE
    else:
        verdict = Verdict.MAYBE if approx else Verdict.FALSE
    approx = approx or chk.under
    chk.stats.elapsed_ms = (time.perf_counter() - t0) * 1000.0
    return Answer(verdict, chk.stats, approx)


def satisfying_states(system: System, phi: Node, cfg: CheckConfig = CheckConfig()) -> StateSet:
    """``[[phi]]`` over the model clocks (no abstraction)."""
    cfg = replace(cfg, abstraction="none")
    c = max([system.cmax] + formula_clock_constants(phi, system))
    chk = Checker(system, cfg, c, None, formula_clock_maxima(phi, system))
    return chk.eval(expand_shorthands(phi))
