"""Expression language for user-supplied metrics and maps.

Grammar (standard precedence, left associative binary operators)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | power
    power  := base ('^' '-'? INT)?
    base   := NUMBER | IDENT | '(' expr ')' | FUNC '(' expr ')'

``^`` binds tighter than unary minus, so ``-x^2`` is ``-(x^2)``.  Identifiers
must be declared up front (coordinates and parameters).  Evaluation works on
floats, numpy arrays and :class:`~phmlab.jetcalc.Jet2` alike.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Union

from .jetcalc import PRIMITIVES, apply_primitive

FUNCTIONS = frozenset(PRIMITIVES)


class ExprError(ValueError):
    """Structured parse failure carrying the byte offset in the source text."""

    def __init__(self, kind: str, message: str, offset: int, name: str | None = None):
        self.kind = kind
        self.offset = offset
        self.name = name
        super().__init__(f"{kind} at offset {offset}: {message}")


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Num, Var, Neg, BinOp, Pow, Call]

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^(),]))"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    raw = text.encode("utf-8")
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        mt = _TOKEN.match(text, pos)
        if mt is None or mt.end() == pos:
            bad = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExprError("syntax error", f"unexpected character {text[bad]!r}",
                            len(text[:bad].encode("utf-8")))
        kind = mt.lastgroup
        start = mt.start(kind)
        tokens.append((kind, mt.group(kind), len(text[:start].encode("utf-8"))))
        pos = mt.end()
    tokens.append(("end", "", len(raw)))
    return tokens


class _Parser:
    def __init__(self, text: str, names: frozenset[str]):
        self.tokens = _tokenize(text)
        self.i = 0
        self.names = names

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, text, off = self.take()
        if text != value or kind != "op":
            got = "end of input" if kind == "end" else repr(text)
            raise ExprError("syntax error", f"expected {value!r}, got {got}", off)

    def parse(self) -> Expr:
        node = self.expr()
        kind, text, off = self.peek()
        if kind != "end":
            raise ExprError("syntax error", f"unexpected {text!r}", off)
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Expr:
        if self.peek() [:2] == ("op", "-"):
            self.take()
            return Neg(self.factor())
        return self.power()

    def power(self) -> Expr:
        node = self.base()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            sign = 1
            if self.peek()[:2] == ("op", "-"):
                self.take()
                sign = -1
            kind, text, off = self.take()
            if kind != "num" or not text.isdigit():
                raise ExprError("syntax error", "exponent must be an integer literal", off)
            node = Pow(node, sign * int(text))
        return node

    def base(self) -> Expr:
        kind, text, off = self.take()
        if kind == "num":
            return Num(float(text))
        if kind == "ident":
            if self.peek()[:2] == ("op", "("):
                if text not in FUNCTIONS:
                    raise ExprError("unknown function", f"unknown function {text!r}", off, text)
                self.take()
                arg = self.expr()
                k2, t2, o2 = self.peek()
                if t2 == "," and k2 == "op":
                    raise ExprError("arity error", f"{text} takes exactly one argument", o2, text)
                self.expect(")")
                return Call(text, arg)
            if text in FUNCTIONS and text not in self.names:
                raise ExprError("arity error", f"function {text!r} used without an argument", off, text)
            if text not in self.names:
                raise ExprError("unknown identifier", f"undeclared identifier {text!r}", off, text)
            return Var(text)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect(")")
            return node
        got = "end of input" if kind == "end" else repr(text)
        raise ExprError("syntax error", f"unexpected {got}", off)


def parse_expression(text: str, names: Iterable[str] = ()) -> Expr:
    """Parse ``text`` into an AST; ``names`` lists the declared identifiers."""
    if not isinstance(text, str) or not text.strip():
        raise ExprError("syntax error", "empty expression", 0)
    return _Parser(text, frozenset(names)).parse()


def to_text(node: Expr) -> str:
    """Print an AST; ``parse_expression(to_text(e))`` reproduces ``e``."""
    if isinstance(node, Num):
        return repr(float(node.value))
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_text(node.arg)})"
    if isinstance(node, BinOp):
        return f"({to_text(node.left)} {node.op} {to_text(node.right)})"
    if isinstance(node, Pow):
        base = to_text(node.base)
        if isinstance(node.base, (Num, Neg, Pow)):
            base = f"({base})"
        return f"{base}^{node.exponent}"
    if isinstance(node, Call):
        return f"{node.func}({to_text(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


def free_names(node: Expr) -> set[str]:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Num):
        return set()
    if isinstance(node, (Neg, Call)):
        return free_names(node.arg)
    if isinstance(node, Pow):
        return free_names(node.base)
    return free_names(node.left) | free_names(node.right)


def evaluate(node: Expr, env: Mapping[str, object]):
    """Evaluate with ``env`` mapping names to floats, arrays or jets."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, Neg):
        return -evaluate(node.arg, env)
    if isinstance(node, Pow):
        base = evaluate(node.base, env)
        if node.exponent < 0 and not hasattr(base, "grad"):
            return 1.0 / base ** (-node.exponent)
        return base**node.exponent
    if isinstance(node, Call):
        return apply_primitive(node.func, evaluate(node.arg, env))
    a = evaluate(node.left, env)
    b = evaluate(node.right, env)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if _is_zero(b):
        raise ZeroDivisionError("division by zero")
    return a / b


def _is_zero(b) -> bool:
    if hasattr(b, "grad"):
        return False
    try:
        import numpy as np

        return bool(np.any(np.asarray(b) == 0))
    except TypeError:
        return False


# small builders used by the catalog and the cone construction

def num(v: float) -> Num:
    return Num(float(v))


def add(a: Expr, b: Expr) -> Expr:
    return BinOp("+", a, b)


def mul(a: Expr, b: Expr) -> Expr:
    return BinOp("*", a, b)


def as_expr(item, names: Iterable[str]) -> Expr:
    if isinstance(item, (Num, Var, Neg, BinOp, Pow, Call)):
        return item
    if isinstance(item, (int, float)):
        return Num(float(item))
    return parse_expression(str(item), names)
