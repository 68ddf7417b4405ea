"""Raw difference-bound-matrix kernels.

A DBM of dimension ``n`` is a flat tuple of ``n * n`` encoded bounds; entry
``(i, j)`` sits at ``i * n + j`` and reads ``x_i - x_j <~ c``.  Index 0 is the
reference clock.  Bounds are encoded as plain ints so that comparison of
bounds is integer comparison:

    (<, c)  ->  2c
    (<=, c) ->  2c + 1
    (<, +inf) -> INF

Every function here takes and returns canonical (shortest-path closed) DBMs
unless stated otherwise; ``None`` stands for the empty zone.
"""

from __future__ import annotations

INF = 1 << 62
LE0 = 1  # (<=, 0)
LT0 = 0  # (<, 0)


def bound(c: int, weak: bool) -> int:
    return 2 * c + (1 if weak else 0)


def is_weak(b: int) -> bool:
    return b != INF and (b & 1) == 1


def const(b: int) -> int:
    return b >> 1


def add(a: int, b: int) -> int:
    if a == INF or b == INF:
        return INF
    return (((a >> 1) + (b >> 1)) << 1) | (a & b & 1)


def negate(b: int) -> int:
    """Complement of the halfspace ``x_i - x_j <~ c``, as a bound on ``x_j - x_i``."""
    return 1 - b


def universe(n: int) -> tuple:
    """All valuations with nonnegative clocks."""
    m = [INF] * (n * n)
    for i in range(n):
        m[i * n + i] = LE0
        m[i] = LE0  # 0 - x_i <= 0
    return tuple(m)


def zero(n: int) -> tuple:
    return tuple([LE0] * (n * n))


def close(m, n: int):
    """Floyd-Warshall tightening; returns a canonical tuple or None if empty."""
    m = list(m)
    rng = range(n)
    for k in rng:
        rk = k * n
        for i in rng:
            ri = i * n
            mik = m[ri + k]
            if mik == INF:
                continue
            ci = mik >> 1
            wi = mik & 1
            for j in rng:
                mkj = m[rk + j]
                if mkj == INF:
                    continue
                s = ((ci + (mkj >> 1)) << 1) | (wi & mkj & 1)
                if s < m[ri + j]:
                    m[ri + j] = s
        if m[rk + k] < LE0:
            return None
    for i in rng:
        if m[i * n + i] < LE0:
            return None
    return tuple(m)


def constrain(m: tuple, n: int, i: int, j: int, b: int):
    """Intersect canonical ``m`` with ``x_i - x_j <~ b`` (O(n^2) reclosure)."""
    if b >= m[i * n + j]:
        return m
    back = m[j * n + i]
    if back != INF and add(b, back) < LE0:
        return None
    out = list(m)
    out[i * n + j] = b
    rng = range(n)
    # new path p -> i -> j -> q
    for p in rng:
        pi = m[p * n + i] if p != i else LE0
        if pi == INF:
            continue
        pij = add(pi, b)
        rp = p * n
        for q in rng:
            jq = m[j * n + q] if q != j else LE0
            if jq == INF:
                continue
            s = add(pij, jq)
            if s < out[rp + q]:
                out[rp + q] = s
    for p in rng:
        if out[p * n + p] < LE0:
            return None
    return tuple(out)


def disjoint(a: tuple, b: tuple, n: int) -> bool:
    """Exact emptiness test for the intersection of two canonical DBMs.

    Both operands are closed, so any negative cycle of the combined graph
    shortens to one that alternates a single edge of each.
    """
    for i in range(n):
        ri = i * n
        for j in range(i + 1, n):
            x = a[ri + j]
            y = b[j * n + i]
            if x != INF and y != INF and add(x, y) < LE0:
                return True
            x = b[ri + j]
            y = a[j * n + i]
            if x != INF and y != INF and add(x, y) < LE0:
                return True
    return False


def intersect(a: tuple, b: tuple, n: int):
    if disjoint(a, b, n):
        return None
    m = a
    for k in range(n * n):
        if b[k] < m[k]:
            i, j = divmod(k, n)
            m = constrain(m, n, i, j, b[k])
            if m is None:
                return None
    return m


def subset(a: tuple, b: tuple) -> bool:
    """Syntactic inclusion; exact for canonical, non-empty DBMs."""
    for x, y in zip(a, b):
        if x > y:
            return False
    return True


_MIN_CACHE: dict = {}


def minimal_constraints(m: tuple, n: int) -> tuple:
    """Indices of a constraint subset of ``m`` whose closure is ``m`` again.

    An entry is dropped when a two-step path through entries still kept
    yields the same bound; later drops never rely on earlier ones, so the
    kept set stays sufficient.
    """
    hit = _MIN_CACHE.get(m)
    if hit is not None:
        return hit
    keep = [m[k] != INF and k // n != k % n for k in range(n * n)]
    for i in range(n):
        ri = i * n
        for j in range(n):
            if not keep[ri + j]:
                continue
            b = m[ri + j]
            for k in range(n):
                if k == i or k == j:
                    continue
                if keep[ri + k] and keep[k * n + j] and add(m[ri + k], m[k * n + j]) <= b:
                    keep[ri + j] = False
                    break
    out = tuple(k for k in range(n * n) if keep[k])
    if len(_MIN_CACHE) > 200000:
        _MIN_CACHE.clear()
    _MIN_CACHE[m] = out
    return out


def subtract(a: tuple, b: tuple, n: int) -> list:
    """``a \\ b`` as a list of pairwise-disjoint canonical DBMs."""
    if disjoint(a, b, n):
        return [a]
    out = []
    cur = a
    for k in minimal_constraints(b, n):
        bk = b[k]
        if bk >= cur[k]:
            continue
        i, j = divmod(k, n)
        piece = constrain(cur, n, j, i, negate(bk))
        if piece is not None:
            out.append(piece)
        cur = constrain(cur, n, i, j, bk)
        if cur is None:
            break
    return out


def up(m: tuple, n: int) -> tuple:
    """Future: drop upper magnitude bounds."""
    out = list(m)
    for i in range(1, n):
        out[i * n] = INF
    return tuple(out)


def down(m: tuple, n: int):
    """Past, clipped to nonnegative clocks."""
    out = list(m)
    for j in range(1, n):
        best = LE0
        for i in range(1, n):
            v = m[i * n + j]
            if v < best:
                best = v
        out[j] = best
    return close(out, n)


def free(m: tuple, n: int, x: int) -> tuple:
    """Forget everything about clock ``x`` (keep ``x >= 0``)."""
    out = list(m)
    for i in range(n):
        if i != x:
            out[x * n + i] = INF
            out[i * n + x] = m[i * n] if i != 0 else LE0
    # x - 0 unbounded, 0 - x <= 0, y - x <= y - 0
    out[x * n] = INF
    out[x] = LE0
    return tuple(out)


def reset(m: tuple, n: int, x: int) -> tuple:
    out = list(m)
    for i in range(n):
        if i != x:
            out[x * n + i] = m[i]  # x - y = 0 - y
            out[i * n + x] = m[i * n]  # y - x = y - 0
    out[x * n] = LE0
    out[x] = LE0
    return tuple(out)


def entry(m: tuple, n: int):
    """Points ``p`` such that ``p - eps`` lies in ``m`` for all small ``eps > 0``.

    Upper magnitude bounds become weak, lower magnitude bounds strict.
    """
    out = list(m)
    for i in range(1, n):
        u = out[i * n]
        if u != INF:
            out[i * n] = u | 1
        lo = out[i]
        out[i] = lo & ~1
    return close(out, n)


def project(m: tuple, n: int, x: int) -> tuple:
    """Existential projection: drop row/column ``x`` of a canonical DBM."""
    out = []
    for i in range(n):
        if i == x:
            continue
        ri = i * n
        for j in range(n):
            if j != x:
                out.append(m[ri + j])
    return tuple(out)


def insert_clock(m: tuple, n: int) -> tuple:
    """Append a fresh unconstrained nonnegative clock as index ``n``."""
    k = n + 1
    out = [INF] * (k * k)
    for i in range(n):
        out[i * k:i * k + n] = m[i * n:i * n + n]
        out[i * k + n] = m[i * n] if i != 0 else LE0
    out[n * k + n] = LE0
    out[n] = LE0
    return tuple(out)


def extrapolate(m: tuple, n: int, k: tuple):
    """Per-clock max-constant normalisation (``k[0]`` must be 0)."""
    out = list(m)
    changed = False
    for i in range(n):
        ki = k[i]
        ri = i * n
        for j in range(n):
            if i == j:
                continue
            v = out[ri + j]
            if v == INF:
                continue
            c = v >> 1
            if c > ki:
                out[ri + j] = INF
                changed = True
            elif -c > k[j]:
                nb = 2 * (-k[j])
                if nb != v:
                    out[ri + j] = nb
                    changed = True
    if not changed:
        return m
    return close(out, n)


def is_canonical(m: tuple, n: int) -> bool:
    c = close(m, n)
    return c is not None and c == tuple(m)


def contains_point(m: tuple, n: int, v) -> bool:
    """Membership of a valuation ``v`` (sequence of length n, v[0] == 0)."""
    for i in range(n):
        ri = i * n
        for j in range(n):
            b = m[ri + j]
            if b == INF or i == j:
                continue
            d = v[i] - v[j]
            c = b >> 1
            if b & 1:
                if d > c:
                    return False
            elif d >= c:
                return False
    return True


def format_dbm(m: tuple, names) -> list:
    """One line per non-trivial entry, ``xi - xj <= c`` / ``< c``."""
    n = len(names)
    lines = []
    for i in range(n):
        for j in range(n):
            b = m[i * n + j]
            if i == j or b == INF:
                continue
            op = "<=" if b & 1 else "<"
            lines.append(f"{names[i]} - {names[j]} {op} {b >> 1}")
    return lines
