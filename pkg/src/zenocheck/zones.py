"""Clock zones, federations and symbolic state sets.

A :class:`StateSet` maps each discrete configuration (a hashable key) to a
federation, i.e. a tuple of canonical non-empty DBMs over the clocks of its
:class:`Signature`.  Values are immutable; every operation returns a new set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import dbm
from .dbm import INF, LE0


class SignatureError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Bounds


@dataclass(frozen=True, order=False)
class Bound:
    """A one-sided bound ``<~ c``; ``c`` may be ``math.inf`` or ``-math.inf``."""

    strict: bool
    constant: float

    def __post_init__(self):
        if math.isinf(self.constant) and not self.strict:
            raise ValueError("infinite bounds are always strict")

    @classmethod
    def le(cls, c):
        return cls(False, c)

    @classmethod
    def lt(cls, c):
        return cls(True, c)

    def __str__(self):
        return f"{'<' if self.strict else '<='}{self.constant}"

    def encode(self) -> int:
        if self.constant == math.inf:
            return INF
        if self.constant == -math.inf:
            raise ValueError("-inf has no DBM encoding")
        return dbm.bound(int(self.constant), not self.strict)

    @classmethod
    def decode(cls, b: int) -> "Bound":
        if b == INF:
            return cls(True, math.inf)
        return cls(not dbm.is_weak(b), dbm.const(b))


LT_INF = Bound(True, math.inf)
LT_NEG_INF = Bound(True, -math.inf)


def compose_upperbound(b1: Bound, b2: Bound, cmax: int) -> Bound:
    """Sum of two upper bounds, saturated at the magnitude bound ``cmax``.

    Strictness is settled before the saturation tests.
    """
    c1, c2 = b1.constant, b2.constant
    if c1 == math.inf or c2 == math.inf:
        return LT_INF
    if c1 == -math.inf:
        return LT_NEG_INF if c2 <= 0 else Bound(True, -cmax + c2)
    if c2 == -math.inf:
        return LT_NEG_INF if c1 <= 0 else Bound(True, -cmax + c1)
    cr = c1 + c2
    strict = b1.strict or b2.strict
    if cr > cmax or (strict and cr == cmax):
        return LT_INF
    if cr < -cmax or (strict and cr == -cmax):
        return LT_NEG_INF
    return Bound(strict, cr)


# ---------------------------------------------------------------------------
# Zones


@dataclass(frozen=True)
class Zone:
    """A DBM over ``dim`` clocks (reference clock included)."""

    dim: int
    m: tuple

    @classmethod
    def from_constraints(cls, dim: int, constraints: Iterable[tuple]) -> "Zone":
        """``constraints`` are ``(i, j, Bound)`` triples meaning ``x_i - x_j <~ c``."""
        m = list(dbm.universe(dim))
        for i, j, b in constraints:
            e = b.encode() if isinstance(b, Bound) else b
            if e < m[i * dim + j]:
                m[i * dim + j] = e
        return cls(dim, tuple(m))

    def entry(self, i: int, j: int) -> Bound:
        return Bound.decode(self.m[i * self.dim + j])

    def is_empty(self) -> bool:
        return dbm.close(self.m, self.dim) is None

    def lines(self, names: Sequence[str]) -> list:
        return dbm.format_dbm(self.m, names)


def canonicalize(z: Zone) -> Zone | None:
    """Tightest equivalent zone, or ``None`` if empty."""
    m = dbm.close(z.m, z.dim)
    return None if m is None else Zone(z.dim, m)


def extrapolate(z: Zone, bounds: Sequence[int]) -> Zone | None:
    m = dbm.close(z.m, z.dim)
    if m is None:
        return None
    out = dbm.extrapolate(m, z.dim, tuple(bounds))
    return None if out is None else Zone(z.dim, out)


# ---------------------------------------------------------------------------
# Federations (tuples of canonical DBMs of a common dimension)


def fed_reduce(zs: Iterable[tuple]) -> tuple:
    """Drop zones syntactically included in another member."""
    zs = list(dict.fromkeys(zs))
    if len(zs) < 2:
        return tuple(zs)
    zs.sort(key=_looseness, reverse=True)
    kept: list = []
    for z in zs:
        for k in kept:
            if dbm.subset(z, k):
                break
        else:
            kept.append(z)
    return tuple(kept)


def _looseness(z: tuple) -> int:
    return sum(1 for b in z if b == INF)


def fed_union(a: tuple, b: tuple) -> tuple:
    if not a:
        return b
    if not b:
        return a
    return fed_reduce(a + b)


def fed_intersect(a: tuple, b: tuple, n: int) -> tuple:
    out = []
    for x in a:
        for y in b:
            z = dbm.intersect(x, y, n)
            if z is not None:
                out.append(z)
    return fed_reduce(out)


def fed_intersect_zone(a: tuple, z: tuple, n: int) -> tuple:
    out = []
    for x in a:
        r = dbm.intersect(x, z, n)
        if r is not None:
            out.append(r)
    return tuple(out)


def fed_subtract(a: tuple, b: tuple, n: int) -> tuple:
    cur = list(a)
    for y in b:
        nxt = []
        for x in cur:
            if dbm.subset(x, y):
                continue
            nxt.extend(dbm.subtract(x, y, n))
        cur = nxt
        if not cur:
            return ()
    return fed_reduce(cur)


def _hull(a: tuple, b: tuple) -> tuple:
    return tuple(x if x > y else y for x, y in zip(a, b))


def fed_merge(a: tuple, n: int) -> tuple:
    """Replace pairs of zones by their convex hull whenever the hull adds nothing.

    The entrywise maximum of two canonical DBMs is canonical, so the hull is
    cheap; the exactness test is a federation subtraction.
    """
    zs = list(fed_reduce(a))
    merged = True
    while merged and len(zs) > 1:
        merged = False
        i = 0
        while i < len(zs):
            j = i + 1
            while j < len(zs):
                h = _hull(zs[i], zs[j])
                if not fed_subtract((h,), (zs[i], zs[j]), n):
                    zs[i] = h
                    del zs[j]
                    zs = list(fed_reduce(zs))
                    merged = True
                    j = i + 1
                else:
                    j += 1
            i += 1
    return tuple(zs)


def fed_complement(a: tuple, n: int) -> tuple:
    return fed_subtract((dbm.universe(n),), a, n)


def fed_includes(a: tuple, b: tuple, n: int) -> bool:
    """Semantic ``b <= a``."""
    rest = []
    for y in b:
        if any(dbm.subset(y, x) for x in a):
            continue
        rest.append(y)
    if not rest:
        return True
    return not fed_subtract(tuple(rest), a, n)


def fed_map(a: tuple, fn) -> tuple:
    out = []
    for z in a:
        r = fn(z)
        if r is not None:
            out.append(r)
    return fed_reduce(out)


# ---------------------------------------------------------------------------
# Symbolic state sets


@dataclass(frozen=True)
class Signature:
    """Clock names (reference clock excluded) and the universe of discrete keys."""

    clocks: tuple
    keys: tuple = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.clocks) + 1

    def index(self, clock: str) -> int:
        try:
            return self.clocks.index(clock) + 1
        except ValueError:
            raise SignatureError(f"unknown clock {clock!r}") from None

    def with_clock(self, name: str) -> "Signature":
        if name in self.clocks:
            raise SignatureError(f"duplicate clock {name!r}")
        return Signature(self.clocks + (name,), self.keys)

    def without_clock(self, name: str) -> "Signature":
        self.index(name)
        return Signature(tuple(c for c in self.clocks if c != name), self.keys)

    def same(self, other: "Signature") -> bool:
        return self is other or (self.clocks == other.clocks
                                  and (self.keys is other.keys or self.keys == other.keys))


class StateSet:
    """Map from discrete key to federation; absent keys are empty."""

    __slots__ = ("sig", "feds")

    def __init__(self, sig: Signature, feds: dict | None = None):
        self.sig = sig
        self.feds = {k: v for k, v in (feds or {}).items() if v}

    # construction ---------------------------------------------------------
    @classmethod
    def empty(cls, sig: Signature) -> "StateSet":
        return cls(sig)

    @classmethod
    def universe(cls, sig: Signature) -> "StateSet":
        u = (dbm.universe(sig.dim),)
        return cls(sig, {k: u for k in sig.keys})

    @classmethod
    def of_keys(cls, sig: Signature, keys: Iterable) -> "StateSet":
        u = (dbm.universe(sig.dim),)
        return cls(sig, {k: u for k in keys})

    # queries --------------------------------------------------------------
    def is_empty(self) -> bool:
        return not self.feds

    def __bool__(self):
        return bool(self.feds)

    def zone_count(self) -> int:
        return sum(len(f) for f in self.feds.values())

    def contains(self, key, valuation: Sequence) -> bool:
        """``valuation`` lists the clock values in signature order."""
        v = (0,) + tuple(valuation)
        n = self.sig.dim
        return any(dbm.contains_point(z, n, v) for z in self.feds.get(key, ()))

    def includes(self, other: "StateSet") -> bool:
        _check(self, other)
        n = self.sig.dim
        for k, fb in other.feds.items():
            fa = self.feds.get(k)
            if fa is None or not fed_includes(fa, fb, n):
                return False
        return True

    def equals(self, other: "StateSet") -> bool:
        return self.includes(other) and other.includes(self)

    def dump(self) -> str:
        names = ("0",) + self.sig.clocks
        out = []
        for k in sorted(self.feds, key=repr):
            for z in self.feds[k]:
                out.append(f"{k}: " + " && ".join(dbm.format_dbm(z, names)))
        return "\n".join(out)

    # boolean algebra ------------------------------------------------------
    def __and__(self, other: "StateSet") -> "StateSet":
        _check(self, other)
        n = self.sig.dim
        a, b = self.feds, other.feds
        if len(b) < len(a):
            a, b = b, a
        out = {}
        for k, fa in a.items():
            fb = b.get(k)
            if fb is not None:
                r = fed_intersect(fa, fb, n)
                if r:
                    out[k] = r
        return StateSet(self.sig, out)

    def __or__(self, other: "StateSet") -> "StateSet":
        _check(self, other)
        out = dict(self.feds)
        for k, fb in other.feds.items():
            fa = out.get(k)
            out[k] = fb if fa is None else fed_union(fa, fb)
        return StateSet(self.sig, out)

    def __sub__(self, other: "StateSet") -> "StateSet":
        _check(self, other)
        n = self.sig.dim
        out = {}
        for k, fa in self.feds.items():
            fb = other.feds.get(k)
            out[k] = fa if fb is None else fed_subtract(fa, fb, n)
        return StateSet(self.sig, out)

    def complement(self) -> "StateSet":
        n = self.sig.dim
        u = (dbm.universe(n),)
        out = {}
        for k in self.sig.keys:
            f = self.feds.get(k)
            out[k] = u if f is None else fed_complement(f, n)
        return StateSet(self.sig, out)

    def restrict(self, keys) -> "StateSet":
        return StateSet(self.sig, {k: f for k, f in self.feds.items() if k in keys})

    def map_zones(self, fn) -> "StateSet":
        return StateSet(self.sig, {k: fed_map(f, fn) for k, f in self.feds.items()})

    # clocks ---------------------------------------------------------------
    def constrain(self, i: int, j: int, b: int) -> "StateSet":
        """Intersect with the atom ``x_i - x_j <~ b`` (indices into the DBM)."""
        n = self.sig.dim
        return self.map_zones(lambda z: dbm.constrain(z, n, i, j, b))

    def constrain_atom(self, left: str | None, right: str | None, b: Bound) -> "StateSet":
        """Intersect with ``left - right <~ b``; ``None`` names the zero clock."""
        i = 0 if left is None else self.sig.index(left)
        j = 0 if right is None else self.sig.index(right)
        return self.constrain(i, j, b.encode())

    def add_clock(self, name: str) -> "StateSet":
        sig = self.sig.with_clock(name)
        n = self.sig.dim
        return StateSet(sig, {k: tuple(dbm.insert_clock(z, n) for z in f)
                              for k, f in self.feds.items()})

    def lift_to(self, sig: Signature) -> "StateSet":
        """Add any clocks of ``sig`` missing here (they must be a suffix)."""
        s = self
        if s.sig.same(sig):
            return s
        if sig.clocks[:len(s.sig.clocks)] != s.sig.clocks:
            raise SignatureError("signature is not an extension")
        for c in sig.clocks[len(s.sig.clocks):]:
            s = s.add_clock(c)
        return StateSet(sig, s.feds)

    def eliminate(self, name: str) -> "StateSet":
        """Exact existential projection of a clock."""
        x = self.sig.index(name)
        sig = self.sig.without_clock(name)
        n = self.sig.dim
        return StateSet(sig, {k: fed_reduce(dbm.project(z, n, x) for z in f)
                              for k, f in self.feds.items()})

    def free(self, names: Iterable[str]) -> "StateSet":
        idx = [self.sig.index(c) for c in names]
        if not idx:
            return self
        n = self.sig.dim

        def fn(z):
            for x in idx:
                z = dbm.free(z, n, x)
            return z
        return self.map_zones(fn)

    def merge(self) -> "StateSet":
        n = self.sig.dim
        return StateSet(self.sig, {k: fed_merge(f, n) for k, f in self.feds.items()})

    def extrapolate(self, bounds: Sequence[int]) -> "StateSet":
        n = self.sig.dim
        k = tuple(bounds)
        return self.map_zones(lambda z: dbm.extrapolate(z, n, k))


def _check(a: StateSet, b: StateSet):
    if not a.sig.same(b.sig):
        raise SignatureError(f"signature mismatch: {a.sig.clocks} vs {b.sig.clocks}")


def clock_eliminate(eta: StateSet, clock: str, cmax: int | None = None) -> StateSet:
    """Remove ``clock``, keeping the relations it induced among the others.

    On canonical DBMs every pair of bounds ``x1 - clock <~ c`` and
    ``clock - x2 <~' c'`` is already composed into the ``x1 - x2`` entry, so
    the exact result is a row/column drop.  With ``cmax`` set, each remaining
    entry is additionally saturated the way :func:`compose_upperbound` does:
    constants above ``cmax`` (or equal and strict) become ``< inf``, constants
    below ``-cmax`` (or equal and strict) are clipped to ``< -cmax``.
    """
    x = eta.sig.index(clock)
    if cmax is None:
        return eta.eliminate(clock)
    n = eta.sig.dim
    sig = eta.sig.without_clock(clock)
    k = n - 1

    def fn(z):
        m = list(dbm.project(z, n, x))
        for i in range(k):
            for j in range(k):
                b = m[i * k + j]
                if i == j or b == INF:
                    continue
                c, strict = b >> 1, not (b & 1)
                if c > cmax or (strict and c == cmax):
                    m[i * k + j] = INF
                elif c < -cmax or (strict and c == -cmax):
                    m[i * k + j] = dbm.bound(-cmax, False)
        return dbm.close(m, k)
    return StateSet(sig, {key: fed_map(f, fn) for key, f in eta.feds.items()})


# ---------------------------------------------------------------------------
# Backward operators


def time_bck(eta: StateSet, inv: dict) -> StateSet:
    """States that reach ``eta`` by delaying while the mode invariant holds.

    ``inv`` maps each key to a convex invariant DBM (missing means true).
    Convexity makes "invariant at both endpoints" equivalent to "invariant
    along the whole delay".
    """
    n = eta.sig.dim
    out = {}
    for k, f in eta.feds.items():
        iz = inv.get(k)
        zs = []
        for z in f:
            if iz is not None:
                z = dbm.intersect(z, iz, n)
                if z is None:
                    continue
            p = dbm.down(z, n)
            if iz is not None:
                p = dbm.intersect(p, iz, n)
            if p is not None:
                zs.append(p)
        if zs:
            out[k] = fed_reduce(zs)
    return StateSet(eta.sig, out)


def time_until(a: StateSet, target: StateSet, inv: dict,
               bad: dict | None = None) -> StateSet:
    """States with a delay ``t`` reaching ``target`` while ``a`` holds on ``[0, t)``.

    The invariant must hold along ``[0, t]``.  ``bad`` optionally supplies the
    precomputed per-key complement of ``a``.
    """
    _check(a, target)
    n = a.sig.dim
    out = {}
    for k, goal in target.feds.items():
        iz = inv.get(k)
        if iz is not None:
            goal = fed_intersect_zone(goal, iz, n)
            if not goal:
                continue
        if bad is not None:
            bz = bad.get(k)
            if bz is None:
                bz = (dbm.universe(n),) if k not in a.feds else ()
        else:
            fa = a.feds.get(k)
            bz = fed_complement(fa, n) if fa else (dbm.universe(n),)
        pieces = []
        for g in goal:
            acc = None
            for b in bz:
                p = _pred_avoid(g, b, n)
                acc = p if acc is None else fed_intersect(acc, p, n)
                if not acc:
                    break
            if acc is None:
                d = dbm.down(g, n)
                acc = (d,) if d is not None else ()
            pieces.extend(acc)
        if iz is not None:
            pieces = fed_intersect_zone(tuple(pieces), iz, n)
        if pieces:
            out[k] = fed_reduce(pieces)
    return StateSet(a.sig, out)


def _pred_avoid(g: tuple, b: tuple, n: int) -> tuple:
    """Convex case: reach ``g`` by delay, avoiding ``b`` on the half-open prefix."""
    gd = dbm.down(g, n)
    if gd is None:
        return ()
    bd = dbm.down(b, n)
    if bd is None:
        return (gd,)
    res = [g]  # zero delay: the prefix is empty
    res.extend(dbm.subtract(gd, bd, n))
    gb = dbm.intersect(g, bd, n)
    if gb is not None:
        inner = dbm.entry(b, n)
        blocked = dbm.intersect(b, inner, n) if inner is not None else None
        rest = [gb] if blocked is None else dbm.subtract(gb, blocked, n)
        for r in rest:
            d = dbm.down(r, n)
            if d is not None:
                res.append(d)
    return fed_reduce(res)


def delay_forever(eta: StateSet, inv: dict) -> StateSet:
    """States from which every delay stays inside ``eta`` and the invariant."""
    n = eta.sig.dim
    out = {}
    for k, f in eta.feds.items():
        iz = inv.get(k)
        good = f if iz is None else fed_intersect_zone(f, iz, n)
        if not good:
            continue
        escape = fed_complement(good, n)
        reach = fed_reduce(d for d in (dbm.down(z, n) for z in escape) if d is not None)
        r = fed_subtract(good, reach, n)
        if r:
            out[k] = r
    return StateSet(eta.sig, out)


@dataclass(frozen=True)
class EdgeOp:
    """A discrete step lifted into a signature: guard federation and reset indices."""

    src: object
    dst: object
    guard: tuple
    resets: tuple


def xtion_bck(eta: StateSet, edge: EdgeOp, inv: dict) -> StateSet:
    """Weakest precondition of ``eta`` through a single edge."""
    f = eta.feds.get(edge.dst)
    if not f:
        return StateSet(eta.sig)
    pre = _pre_fed(f, edge, inv, eta.sig.dim)
    return StateSet(eta.sig, {edge.src: pre} if pre else {})


def _pre_fed(f: tuple, edge: EdgeOp, inv: dict, n: int) -> tuple:
    idst = inv.get(edge.dst)
    isrc = inv.get(edge.src)
    out = []
    for z in f:
        if idst is not None:
            z = dbm.intersect(z, idst, n)
            if z is None:
                continue
        ok = True
        for x in edge.resets:
            z = dbm.constrain(z, n, x, 0, LE0)
            if z is None:
                ok = False
                break
            z = dbm.free(z, n, x)
        if not ok:
            continue
        if isrc is not None:
            z = dbm.intersect(z, isrc, n)
            if z is None:
                continue
        for g in edge.guard:
            r = dbm.intersect(z, g, n)
            if r is not None:
                out.append(r)
    return fed_reduce(out)


def pre_all(eta: StateSet, edges_into: dict, inv: dict) -> StateSet:
    """Union of ``xtion_bck`` over all edges (``edges_into`` keyed by target)."""
    n = eta.sig.dim
    acc: dict = {}
    for dst, f in eta.feds.items():
        for e in edges_into.get(dst, ()):
            pre = _pre_fed(f, e, inv, n)
            if pre:
                acc.setdefault(e.src, []).extend(pre)
    return StateSet(eta.sig, {k: fed_reduce(v) for k, v in acc.items()})
