"""Game-based over-approximations for checking universal formulas.

Processes observed by the formula are players; the others are opponents
whose state information is (partly) forgotten.  Every operator here is
extensive and monotone, so fixpoints computed with it over-approximate the
exact ones.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import dbm
from .model import ModelError, System
from .syntax import Cmp, Node, Prop, walk
from .tctl import freeze_clocks
from .zones import StateSet, fed_reduce


@dataclass(frozen=True)
class PlayerSet:
    players: frozenset
    opponents: frozenset


def players_of(system: System, phi: Node) -> PlayerSet:
    """Processes whose modes, local clocks or local variables occur in ``phi``.

    If none does, every process is a player.
    """
    net = system.net
    owner = net.owner()
    bound = set(freeze_clocks(phi))
    found = set()
    for n in walk(phi):
        if isinstance(n, Prop):
            hit = system.syms.mode(n.name)
            if hit is None:
                raise ModelError(f"unknown mode {n.name!r}")
            found.add(hit[0])
        elif isinstance(n, Cmp):
            for name in n.names():
                if name in owner and name not in bound:
                    found.add(owner[name])
    everyone = frozenset(range(len(net.processes)))
    if not found:
        return PlayerSet(everyone, frozenset())
    return PlayerSet(frozenset(found), everyone - frozenset(found))


def opponent_closed(system: System, ps: PlayerSet) -> System:
    """The same network over a key space that ranges over every opponent state.

    Forgetting an opponent's discrete state has to land on configurations
    that exist; the reachable key space alone is not closed under that.
    """
    if system.universe == "all" or ps.opponents <= system.opponents:
        return system
    from .model import compile_network
    return compile_network(system.net, system.universe, ps.opponents | system.opponents)


class _Layout:
    """Per-system bookkeeping: which key positions and clocks belong to opponents."""

    def __init__(self, system: System, ps: PlayerSet):
        net = system.net
        nproc = len(net.processes)
        owner = net.owner()
        kept = [i for i in range(nproc) if i in ps.players]
        for vi, v in enumerate(system.syms.var_decls):
            o = owner.get(v.name)
            if o is None or o in ps.players:
                kept.append(nproc + vi)
        self.kept = tuple(kept)
        self.opp_clocks = frozenset(c for c, o in owner.items()
                                    if o in ps.opponents and c in system.clocks)
        self.groups: dict = {}
        self._group_cache: dict = {}

    def group(self, key):
        return tuple(key[i] for i in self.kept)

    def members(self, keys: tuple) -> dict:
        hit = self._group_cache.get(id(keys))
        if hit is None or hit[0] is not keys:
            g: dict = {}
            for k in keys:
                g.setdefault(self.group(k), []).append(k)
            hit = (keys, g)
            self._group_cache[id(keys)] = hit
        return hit[1]

    def clock_indices(self, sig) -> tuple:
        return tuple(i + 1 for i, c in enumerate(sig.clocks) if c in self.opp_clocks)


def _free(z, n, idx):
    for x in idx:
        z = dbm.free(z, n, x)
    return z


def _drop_diagonals(z, n, idx):
    m = list(z)
    for x in idx:
        for j in range(1, n):
            if j != x:
                m[x * n + j] = dbm.INF
                m[j * n + x] = dbm.INF
    return dbm.close(m, n)


def _merge(s: StateSet, lay: _Layout, zone_fn) -> StateSet:
    groups = lay.members(s.sig.keys)
    acc: dict = {}
    for k, f in s.feds.items():
        acc.setdefault(lay.group(k), []).extend(zone_fn(z) for z in f)
    out = {}
    for g, zs in acc.items():
        red = fed_reduce(z for z in zs if z is not None)
        if red:
            for k in groups[g]:
                out[k] = red
    return StateSet(s.sig, out)


def abs_game(s: StateSet, lay: _Layout) -> StateSet:
    if len(lay.kept) == len(next(iter(s.sig.keys), ())) and not lay.opp_clocks:
        return s
    idx = lay.clock_indices(s.sig)
    n = s.sig.dim
    return _merge(s, lay, lambda z: _free(z, n, idx))


def abs_game_discrete(s: StateSet, lay: _Layout) -> StateSet:
    idx = lay.clock_indices(s.sig)
    if not idx:
        return s
    n = s.sig.dim
    return s.map_zones(lambda z: _free(z, n, idx))


def abs_game_magnitude(s: StateSet, lay: _Layout) -> StateSet:
    """Forget opponents' discrete state and their clock differences; keep magnitudes."""
    idx = lay.clock_indices(s.sig)
    n = s.sig.dim
    if len(lay.kept) == len(next(iter(s.sig.keys), ())) and not idx:
        return s
    return _merge(s, lay, lambda z: _drop_diagonals(z, n, idx))


_OPERATORS = {
    "game": abs_game,
    "game_discrete": abs_game_discrete,
    "game_magnitude": abs_game_magnitude,
}


def make_operator(name: str, system: System, ps: PlayerSet):
    """Return ``abs`` as a one-argument function on state sets."""
    if name == "none":
        return lambda s: s
    fn = _OPERATORS[name]
    lay = _Layout(system, ps)
    return lambda s: fn(s, lay)


def reachable_bck_over(system: System, eta1: StateSet, eta2: StateSet, abs_name: str,
                       ps: PlayerSet, c_global: int | None = None) -> StateSet:
    """Backward reachability with ``abs`` applied to every iterate."""
    from .engine import CheckConfig, Checker

    chk = Checker(system, CheckConfig(abstraction=abs_name), c_global,
                  ps if abs_name != "none" else None)
    return chk.reachable_bck(eta1, eta2)
