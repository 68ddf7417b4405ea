"""Tokenizer and the boolean/arithmetic expression AST shared by models and formulas.

Atoms are kept unresolved: a bare identifier is a :class:`Prop` (a mode
name) and a comparison is a normalised linear :class:`Cmp`.  Whether the
names in a comparison are clocks or integer variables is decided later
against a symbol table.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.message = message
        self.line = line
        self.col = col
        where = f"{line}:{col}: " if line else ""
        super().__init__(where + message)


# ---------------------------------------------------------------------------
# AST


class Node:
    __slots__ = ()


@dataclass(frozen=True)
class Const(Node):
    value: bool


TRUE = Const(True)
FALSE = Const(False)


@dataclass(frozen=True)
class Prop(Node):
    """A mode atom, ``name`` or ``process.name``."""

    name: str


@dataclass(frozen=True)
class Cmp(Node):
    """``sum(coef * name for name, coef in terms) op const``; terms sorted by name."""

    terms: tuple
    op: str
    const: int

    def names(self) -> tuple:
        return tuple(n for n, _ in self.terms)


@dataclass(frozen=True)
class Not(Node):
    arg: Node


@dataclass(frozen=True)
class And(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class Or(Node):
    left: Node
    right: Node


def implies(a: Node, b: Node) -> Node:
    return Or(Not(a), b)


def conj(items) -> Node:
    out = None
    for it in items:
        out = it if out is None else And(out, it)
    return TRUE if out is None else out


def disj(items) -> Node:
    out = None
    for it in items:
        out = it if out is None else Or(out, it)
    return FALSE if out is None else out


def conjuncts(node: Node) -> list:
    if isinstance(node, And):
        return conjuncts(node.left) + conjuncts(node.right)
    return [node]


FLIP = {"<": ">", "<=": ">=", "=": "=", "!=": "!=", ">=": "<=", ">": "<"}
NEGATE = {"<": ">=", "<=": ">", "=": "!=", "!=": "=", ">=": "<", ">": "<="}


def make_cmp(lhs: dict, op: str, rhs: dict) -> Node:
    """Build ``lhs op rhs`` from linear forms ``{name: coef, None: const}``."""
    terms: dict = {}
    for name, c in lhs.items():
        terms[name] = terms.get(name, 0) + c
    for name, c in rhs.items():
        terms[name] = terms.get(name, 0) - c
    const = -terms.pop(None, 0)
    terms = {k: v for k, v in terms.items() if v}
    if not terms:
        return Const(_compare(0, op, const))
    items = tuple(sorted(terms.items()))
    # normalise so that the first coefficient is positive
    if items[0][1] < 0:
        items = tuple((n, -c) for n, c in items)
        const = -const
        op = FLIP[op]
    return Cmp(items, op, const)


def _compare(a: int, op: str, b: int) -> bool:
    return {"<": a < b, "<=": a <= b, "=": a == b, "!=": a != b,
            ">=": a >= b, ">": a > b}[op]


compare = _compare


def format_node(node: Node) -> str:
    return _fmt(node, 0)


def _fmt(node: Node, prec: int) -> str:
    if isinstance(node, Const):
        return "true" if node.value else "false"
    if isinstance(node, Prop):
        return node.name
    if isinstance(node, Cmp):
        return format_cmp(node)
    if isinstance(node, Not):
        return "not " + _fmt(node.arg, 3)
    if isinstance(node, And):
        s = f"{_fmt(node.left, 2)} and {_fmt(node.right, 3)}"
        return f"({s})" if prec > 2 else s
    if isinstance(node, Or):
        s = f"{_fmt(node.left, 1)} or {_fmt(node.right, 2)}"
        return f"({s})" if prec > 1 else s
    fmt = getattr(node, "format", None)
    if fmt is not None:
        return fmt(_fmt, prec)
    raise TypeError(f"cannot format {node!r}")


def format_cmp(node: Cmp) -> str:
    parts = []
    for i, (name, c) in enumerate(node.terms):
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        term = name if mag == 1 else f"{mag} * {name}"
        if i == 0:
            parts.append(("-" if c < 0 else "") + term)
        else:
            parts.append(f"{sign} {term}")
    return f"{' '.join(parts)} {node.op} {node.const}"


# ---------------------------------------------------------------------------
# Integer expressions (assignment right-hand sides)


@dataclass(frozen=True)
class IntExpr:
    """Linear integer expression ``const + sum(coef * var)``."""

    terms: tuple
    const: int

    def eval(self, env) -> int:
        return self.const + sum(c * env[n] for n, c in self.terms)

    def names(self) -> tuple:
        return tuple(n for n, _ in self.terms)

    def __str__(self):
        if not self.terms:
            return str(self.const)
        s = format_cmp(Cmp(self.terms, "=", 0)).rsplit(" = ", 1)[0]
        if self.const > 0:
            s += f" + {self.const}"
        elif self.const < 0:
            s += f" - {-self.const}"
        return s


def int_expr(lin: dict) -> IntExpr:
    const = lin.get(None, 0)
    terms = tuple(sorted((k, v) for k, v in lin.items() if k is not None and v))
    return IntExpr(terms, const)


# ---------------------------------------------------------------------------
# Tokens


@dataclass(frozen=True)
class Token:
    kind: str  # NAME, INT, OP, EOF
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>(\#|//)[^\n]*)
  | (?P<int>\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*(?:\.[A-Za-z_][A-Za-z0-9_]*)?)
  | (?P<op>:=|->|<=|>=|==|!=|\.\.|[<>=!?(){}\[\],;.+\-*:~])
""", re.VERBOSE)


def tokenize(text: str) -> list:
    out = []
    line, col0, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - col0 + 1)
        kind = m.lastgroup
        col = pos - col0 + 1
        if kind == "nl":
            line += 1
            col0 = m.end()
        elif kind == "int":
            out.append(Token("INT", m.group(), line, col))
        elif kind == "name":
            out.append(Token("NAME", m.group(), line, col))
        elif kind == "op":
            out.append(Token("OP", m.group(), line, col))
        pos = m.end()
    out.append(Token("EOF", "", line, pos - col0 + 1))
    return out


CMP_OPS = ("<", "<=", "=", "==", "!=", ">=", ">")
KEYWORDS = {"and", "or", "not", "true", "false", "exists", "forall", "always",
            "eventually", "until", "freeze"}


class TokenStream:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def cur(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        t = self.cur
        return t.kind in ("OP", "NAME") and t.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}, found {self.cur.text or 'end of input'!r}")
        t = self.cur
        self.i += 1
        return t

    def name(self) -> Token:
        t = self.cur
        if t.kind != "NAME" or t.text in KEYWORDS:
            self.error(f"expected identifier, found {t.text or 'end of input'!r}")
        self.i += 1
        return t

    def integer(self) -> int:
        neg = self.accept("-")
        t = self.cur
        if t.kind != "INT":
            self.error(f"expected integer, found {t.text or 'end of input'!r}")
        self.i += 1
        return -int(t.text) if neg else int(t.text)

    def error(self, msg: str, tok: Token | None = None):
        t = tok or self.cur
        raise ParseError(msg, t.line, t.col)

    def done(self) -> bool:
        return self.cur.kind == "EOF"


# ---------------------------------------------------------------------------
# Expression parser; ``extension`` hooks let the formula parser add modalities


class ExprParser:
    def __init__(self, ts: TokenStream):
        self.ts = ts
        self.positions: dict = {}

    def parse(self) -> Node:
        return self.implication()

    def implication(self) -> Node:
        left = self.disjunction()
        if self.ts.accept("->"):
            right = self.implication()
            return implies(left, right)
        return left

    def disjunction(self) -> Node:
        left = self.conjunction()
        while self.ts.accept("or"):
            left = Or(left, self.conjunction())
        return left

    def conjunction(self) -> Node:
        left = self.unary()
        while self.ts.accept("and"):
            left = And(left, self.unary())
        return left

    def unary(self) -> Node:
        if self.ts.accept("not"):
            return Not(self.unary())
        ext = self.extension()
        if ext is not None:
            return ext
        return self.primary()

    def extension(self) -> Node | None:
        return None

    def primary(self) -> Node:
        ts = self.ts
        tok = ts.cur
        if ts.accept("("):
            node = self.implication()
            ts.expect(")")
            return node
        if ts.accept("true"):
            return TRUE
        if ts.accept("false"):
            return FALSE
        lhs, single = self.linear()
        if ts.cur.kind == "OP" and ts.cur.text in CMP_OPS:
            op = ts.cur.text
            ts.i += 1
            rhs, _ = self.linear()
            node = make_cmp(lhs, "=" if op == "==" else op, rhs)
            self.positions.setdefault(node, (tok.line, tok.col))
            return node
        if single is not None:
            node = Prop(single)
            self.positions.setdefault(node, (tok.line, tok.col))
            return node
        ts.error("expected comparison", tok)

    def linear(self):
        """Parse ``term (+|- term)*``; returns the linear form and the lone name, if any."""
        ts = self.ts
        form: dict = {}
        count = 0
        single = None
        sign = -1 if ts.accept("-") else 1
        while True:
            tok = ts.cur
            if tok.kind == "INT":
                ts.i += 1
                if ts.accept("*"):
                    nm = ts.name().text
                    form[nm] = form.get(nm, 0) + sign * int(tok.text)
                else:
                    form[None] = form.get(None, 0) + sign * int(tok.text)
            elif tok.kind == "NAME" and tok.text not in KEYWORDS:
                ts.i += 1
                form[tok.text] = form.get(tok.text, 0) + sign
                single = tok.text if count == 0 and sign == 1 else None
            else:
                ts.error(f"unexpected {tok.text or 'end of input'!r}", tok)
            count += 1
            if ts.accept("+"):
                sign = 1
            elif ts.at("-") and not ts.peek().text == ">":
                ts.i += 1
                sign = -1
            else:
                break
        return form, (single if count == 1 else None)


def parse_predicate(text: str) -> Node:
    ts = TokenStream(text)
    node = ExprParser(ts).parse()
    if not ts.done():
        ts.error(f"unexpected {ts.cur.text!r}")
    return node


def walk(node: Node) -> Iterator[Node]:
    yield node
    for f in getattr(node, "__dataclass_fields__", {}):
        v = getattr(node, f)
        if isinstance(v, Node):
            yield from walk(v)
