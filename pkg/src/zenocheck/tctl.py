"""TCTL formulas: AST, parser, shorthand expansion, negation normal form, fragments."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .syntax import (FALSE, NEGATE, TRUE, And, Cmp, Const, ExprParser, Node, Not, Or,
                     ParseError, Prop, TokenStream, format_node, walk)


@dataclass(frozen=True)
class Freeze(Node):
    clock: str
    body: Node

    def format(self, fmt, prec):
        s = f"freeze {self.clock} . {fmt(self.body, 0)}"
        return f"({s})" if prec > 0 else s


@dataclass(frozen=True)
class ExistsUntil(Node):
    left: Node
    right: Node

    def format(self, fmt, prec):
        return f"exists ({fmt(self.left, 0)} until {fmt(self.right, 0)})"


@dataclass(frozen=True)
class ForallUntil(Node):
    left: Node
    right: Node

    def format(self, fmt, prec):
        return f"forall ({fmt(self.left, 0)} until {fmt(self.right, 0)})"


@dataclass(frozen=True)
class _Unary(Node):
    body: Node
    word = ""

    def format(self, fmt, prec):
        return f"{self.word} {fmt(self.body, 3)}"


@dataclass(frozen=True)
class ExistsAlways(_Unary):
    word = "exists always"


@dataclass(frozen=True)
class ExistsEventually(_Unary):
    word = "exists eventually"


@dataclass(frozen=True)
class ForallAlways(_Unary):
    word = "forall always"


@dataclass(frozen=True)
class ForallEventually(_Unary):
    word = "forall eventually"


CORE = (Const, Prop, Cmp, Not, And, Or, Freeze, ExistsUntil, ExistsAlways)
MODAL = (ExistsUntil, ExistsAlways, ExistsEventually, ForallUntil, ForallAlways,
         ForallEventually)


class Fragment(enum.Enum):
    FORALL = "forall"
    EXISTS = "exists"
    GENERAL = "general"
    STATE = "state"  # no path quantifier at all; belongs to both fragments


# ---------------------------------------------------------------------------
# Parsing


class _FormulaParser(ExprParser):
    def extension(self):
        ts = self.ts
        tok = ts.cur
        if ts.at("exists") or ts.at("forall"):
            universal = ts.cur.text == "forall"
            ts.i += 1
            if ts.accept("always"):
                body = self.unary()
                return ForallAlways(body) if universal else ExistsAlways(body)
            if ts.accept("eventually"):
                body = self.unary()
                return ForallEventually(body) if universal else ExistsEventually(body)
            if not ts.accept("("):
                ts.error("expected 'always', 'eventually' or '(' after path quantifier")
            left = self.implication()
            ts.expect("until")
            right = self.implication()
            ts.expect(")")
            return ForallUntil(left, right) if universal else ExistsUntil(left, right)
        if ts.accept("freeze"):
            name = ts.name()
            if "." in name.text:
                ts.error("write 'freeze x . body' with spaces around the dot", name)
            ts.expect(".")
            return Freeze(name.text, self.implication())
        del tok
        return None


def parse_formula(text: str, syms=None) -> Node:
    """Parse a formula; with ``syms`` (a :class:`model.Symbols`) names are checked."""
    ts = TokenStream(text)
    p = _FormulaParser(ts)
    node = p.parse()
    if not ts.done():
        ts.error(f"unexpected {ts.cur.text!r}")
    check_freeze_scopes(node)
    if syms is not None:
        check_names(node, syms, p.positions)
    return node


def check_freeze_scopes(node: Node, bound: frozenset = frozenset()):
    if isinstance(node, Freeze):
        if node.clock in bound:
            raise ParseError(f"freeze clock {node.clock!r} is already bound in this scope")
        bound = bound | {node.clock}
    for f in getattr(node, "__dataclass_fields__", {}):
        v = getattr(node, f)
        if isinstance(v, Node):
            check_freeze_scopes(v, bound)


def check_names(node: Node, syms, positions: dict | None = None):
    from .model import ModelError, Symbols, clock_atom_shape

    positions = positions or {}

    def go(n, bound):
        if isinstance(n, Freeze):
            if n.clock in syms.clock_set or n.clock in syms.var_index:
                raise ParseError(f"freeze clock {n.clock!r} clashes with a model name")
            go(n.body, bound + (n.clock,))
            return
        line, col = positions.get(n, (0, 0))
        try:
            if isinstance(n, Prop):
                if syms.mode(n.name) is None:
                    raise ModelError(f"unknown mode {n.name!r}")
            elif isinstance(n, Cmp):
                local = Symbols(syms.net, bound) if bound else syms
                clock_atom_shape(n, local)
        except ModelError as e:
            raise ParseError(str(e), line, col) from None
        for f in getattr(n, "__dataclass_fields__", {}):
            v = getattr(n, f)
            if isinstance(v, Node):
                go(v, bound)

    go(node, ())


def format_formula(node: Node) -> str:
    return format_node(node)


# ---------------------------------------------------------------------------
# Rewriting


def expand_shorthands(node: Node) -> Node:
    """Rewrite sugar into the core kinds (atoms, not, and, or, freeze, EU, EG)."""
    if isinstance(node, (Const, Prop, Cmp)):
        return node
    if isinstance(node, Not):
        return Not(expand_shorthands(node.arg))
    if isinstance(node, And):
        return And(expand_shorthands(node.left), expand_shorthands(node.right))
    if isinstance(node, Or):
        return Or(expand_shorthands(node.left), expand_shorthands(node.right))
    if isinstance(node, Freeze):
        return Freeze(node.clock, expand_shorthands(node.body))
    if isinstance(node, ExistsUntil):
        return ExistsUntil(expand_shorthands(node.left), expand_shorthands(node.right))
    if isinstance(node, ExistsAlways):
        return ExistsAlways(expand_shorthands(node.body))
    if isinstance(node, ExistsEventually):
        return ExistsUntil(TRUE, expand_shorthands(node.body))
    if isinstance(node, ForallAlways):
        return Not(ExistsUntil(TRUE, Not(expand_shorthands(node.body))))
    if isinstance(node, ForallEventually):
        return Not(ExistsAlways(Not(expand_shorthands(node.body))))
    if isinstance(node, ForallUntil):
        a = expand_shorthands(node.left)
        b = expand_shorthands(node.right)
        return Not(Or(ExistsUntil(Not(b), Not(Or(a, b))), ExistsAlways(Not(b))))
    raise TypeError(f"unknown formula node {node!r}")


def nnf(node: Node) -> Node:
    """Push negations down to atoms and path quantifiers; drops double negation."""
    if isinstance(node, Not):
        a = node.arg
        if isinstance(a, Not):
            return nnf(a.arg)
        if isinstance(a, Const):
            return FALSE if a.value else TRUE
        if isinstance(a, Cmp):
            return Cmp(a.terms, NEGATE[a.op], a.const)
        if isinstance(a, Or):
            return And(nnf(Not(a.left)), nnf(Not(a.right)))
        if isinstance(a, And):
            return Or(nnf(Not(a.left)), nnf(Not(a.right)))
        if isinstance(a, Freeze):
            return Freeze(a.clock, nnf(Not(a.body)))
        if isinstance(a, Prop):
            return node
        return Not(nnf(a))
    if isinstance(node, And):
        return And(nnf(node.left), nnf(node.right))
    if isinstance(node, Or):
        return Or(nnf(node.left), nnf(node.right))
    if isinstance(node, Freeze):
        return Freeze(node.clock, nnf(node.body))
    if isinstance(node, ExistsUntil):
        return ExistsUntil(nnf(node.left), nnf(node.right))
    if isinstance(node, ExistsAlways):
        return ExistsAlways(nnf(node.body))
    return node


def negate_nnf(node: Node) -> Node:
    return nnf(Not(expand_shorthands(node)))


def classify_fragment(node: Node) -> Fragment:
    """Fragment by polarity of path quantifiers in the expanded formula.

    A quantifier under an even number of negations is existential, under an
    odd number universal.  Atoms may be negated freely.
    """
    node = expand_shorthands(node)
    seen = set()

    def go(n, neg):
        if isinstance(n, Not):
            go(n.arg, not neg)
        elif isinstance(n, (ExistsUntil, ExistsAlways)):
            seen.add("forall" if neg else "exists")
            for f in n.__dataclass_fields__:
                go(getattr(n, f), neg)
        elif isinstance(n, (And, Or)):
            go(n.left, neg)
            go(n.right, neg)
        elif isinstance(n, Freeze):
            go(n.body, neg)

    go(node, False)
    if not seen:
        return Fragment.STATE
    if seen == {"forall"}:
        return Fragment.FORALL
    if seen == {"exists"}:
        return Fragment.EXISTS
    return Fragment.GENERAL


def modal_depth(node: Node) -> int:
    sub = [getattr(node, f) for f in getattr(node, "__dataclass_fields__", {})]
    inner = max([modal_depth(s) for s in sub if isinstance(s, Node)], default=0)
    return inner + (1 if isinstance(node, MODAL) else 0)


def is_modal_free(node: Node) -> bool:
    return all(not isinstance(s, MODAL + (Freeze,)) for s in walk(node))


def freeze_clocks(node: Node) -> tuple:
    out = []
    for s in walk(node):
        if isinstance(s, Freeze) and s.clock not in out:
            out.append(s.clock)
    return tuple(out)


def free_clock_refs(node: Node) -> set:
    """Names compared in atoms that are not bound by an enclosing freeze."""
    out = set()

    def go(n, bound):
        if isinstance(n, Freeze):
            go(n.body, bound | {n.clock})
            return
        if isinstance(n, Cmp):
            out.update(x for x in n.names() if x not in bound)
        for f in getattr(n, "__dataclass_fields__", {}):
            v = getattr(n, f)
            if isinstance(v, Node):
                go(v, bound)

    go(node, frozenset())
    return out
