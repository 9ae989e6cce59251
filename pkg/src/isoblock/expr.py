"""Expression trees for vector-field components.

Grammar (lowest to highest precedence)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' exponent)?          # right associative
    atom   := NUMBER | IDENT | FUNC '(' expr ')' | '(' expr ')'

Exponents must be integer constants (possibly negated) so that derivatives
stay total. ``-x^2`` parses as ``-(x^2)``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence, Union

import numpy as np

from .dual import Dual, dcos, dexp, dsin, dsqrt
from .errors import DomainError, ParseError


class UnknownIdentifierError(ParseError):
    pass


@dataclass(frozen=True)
class Num:
    value: float
    label: str | None = None  # parameter name the value was resolved from


@dataclass(frozen=True)
class Var:
    index: int
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: int


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Num, Var, Neg, BinOp, Pow, Call]

FUNCTIONS = ("sin", "cos", "exp", "sqrt")

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)


@dataclass(frozen=True)
class Token:
    kind: str  # num, ident, op, end
    text: str
    pos: int


def tokenize(source: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(source):
        if source[pos:].strip() == "":
            break
        m = _TOKEN_RE.match(source, pos)
        if m is None or m.end() == pos:
            bad = pos + (len(source[pos:]) - len(source[pos:].lstrip()))
            raise ParseError(f"unexpected character {source[bad]!r}", bad, source)
        kind = m.lastgroup
        tokens.append(Token(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(Token("end", "", len(source)))
    return tokens


class _Parser:
    def __init__(self, source: str, names: Mapping[str, int], params: Mapping[str, float]):
        self.source = source
        self.tokens = tokenize(source)
        self.i = 0
        self.names = names
        self.params = params
        self.unknown: list[Token] = []

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def error(self, message, tok=None):
        tok = tok or self.tok
        return ParseError(message, tok.pos, self.source)

    def advance(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, text):
        if self.tok.text != text or self.tok.kind != "op":
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return self.advance()

    def parse_list(self) -> list[Node]:
        items = [self.expr()]
        while self.tok.kind == "op" and self.tok.text == ",":
            self.advance()
            items.append(self.expr())
        if self.tok.kind != "end":
            raise self.error(f"unexpected {self.tok.text!r}")
        return items

    def expr(self) -> Node:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.tok.kind == "op" and self.tok.text == "-":
            self.advance()
            return Neg(self.unary())
        if self.tok.kind == "op" and self.tok.text == "+":
            self.advance()
            return self.unary()
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            return Pow(base, self.exponent())
        return base

    def exponent(self) -> int:
        sign = 1
        while self.tok.kind == "op" and self.tok.text in "+-":
            if self.advance().text == "-":
                sign = -sign
        paren = False
        if self.tok.kind == "op" and self.tok.text == "(":
            # allow x^(-1) and x^(2)
            self.advance()
            paren = True
            while self.tok.kind == "op" and self.tok.text in "+-":
                if self.advance().text == "-":
                    sign = -sign
        tok = self.tok
        if tok.kind != "num":
            raise self.error("exponent must be an integer constant")
        value = float(tok.text)
        if not value.is_integer():
            raise self.error("exponent must be an integer constant")
        self.advance()
        if paren:
            self.expect(")")
        return sign * int(value)

    def atom(self) -> Node:
        tok = self.tok
        if tok.kind == "num":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "ident":
            self.advance()
            if tok.text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(tok.text, arg)
            if tok.text in self.names:
                return Var(self.names[tok.text], tok.text)
            if tok.text in self.params:
                return Num(float(self.params[tok.text]), tok.text)
            # reported after the whole input parses, so syntax errors win
            self.unknown.append(tok)
            return Num(float("nan"), tok.text)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        found = tok.text or "end of input"
        raise self.error(f"unexpected {found!r}")


def coordinate_names(n: int) -> dict[str, int]:
    names = {f"x{i + 1}": i for i in range(n)}
    if n <= 3:
        names.update({c: i for i, c in enumerate("xyz"[:n])})
    return names


def parse_expressions(source: str, n: int, params: Mapping[str, float] | None = None) -> list[Node]:
    params = dict(params or {})
    names = coordinate_names(n)
    clash = set(names) & set(params)
    if clash:
        raise ParseError(f"parameter names shadow coordinates: {sorted(clash)}")
    bad = [p for p in params if p in FUNCTIONS]
    if bad:
        raise ParseError(f"parameter names shadow functions: {bad}")
    parser = _Parser(source, names, params)
    nodes = parser.parse_list()
    if parser.unknown:
        tok = parser.unknown[0]
        raise UnknownIdentifierError(f"unknown identifier {tok.text!r}", tok.pos, source)
    return nodes


# -- printing ---------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def to_source(node: Node) -> str:
    """Render a tree so that re-parsing yields an identical tree."""
    if isinstance(node, Num):
        return node.label if node.label is not None else repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"-{_wrap(node.arg, 3)}"
    if isinstance(node, BinOp):
        p = _PREC[node.op]
        # left associative: the right operand needs parens at equal precedence
        return f"{_wrap(node.left, p)} {node.op} {_wrap(node.right, p + 1)}"
    if isinstance(node, Pow):
        exp = str(node.exponent) if node.exponent >= 0 else f"({node.exponent})"
        return f"{_wrap(node.base, 5)}^{exp}"
    if isinstance(node, Call):
        return f"{node.func}({to_source(node.arg)})"
    raise TypeError(node)


def _prec(node: Node) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return 3
    if isinstance(node, Pow):
        return 4
    return 5


def _wrap(node: Node, min_prec: int) -> str:
    text = to_source(node)
    return f"({text})" if _prec(node) < min_prec else text


def identifiers(node: Node) -> set[str]:
    if isinstance(node, Num):
        return {node.label} if node.label else set()
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, (Neg, Call)):
        return identifiers(node.arg)
    if isinstance(node, BinOp):
        return identifiers(node.left) | identifiers(node.right)
    if isinstance(node, Pow):
        return identifiers(node.base)
    raise TypeError(node)


# -- compilation ------------------------------------------------------------

Evaluator = Callable[[Sequence], object]


def _is_dual(v):
    return isinstance(v, Dual)


def _any(mask) -> bool:
    return bool(np.any(mask))


def _checked_div(a, b, text):
    den = b.val if _is_dual(b) else b
    if _any(np.asarray(den) == 0):
        raise DomainError("division by zero", text)
    return a / b


def _checked_sqrt(a, text):
    val = a.val if _is_dual(a) else a
    if _any(np.asarray(val) < 0):
        raise DomainError("square root of a negative number", text)
    if _is_dual(a):
        if _any(np.asarray(val) == 0):
            raise DomainError("square root is not differentiable at zero", text)
        return dsqrt(a)
    return np.sqrt(a)


def _checked_pow(a, k, text):
    if k < 0:
        val = a.val if _is_dual(a) else a
        if _any(np.asarray(val) == 0):
            raise DomainError("negative power of zero", text)
    return a**k


_UNARY = {
    "sin": lambda a: dsin(a) if _is_dual(a) else np.sin(a),
    "cos": lambda a: dcos(a) if _is_dual(a) else np.cos(a),
    "exp": lambda a: dexp(a) if _is_dual(a) else np.exp(a),
}


def compile_node(node: Node) -> Evaluator:
    """Turn a tree into a closure over a coordinate sequence.

    The closure works on floats, numpy arrays (elementwise) and :class:`Dual`
    values alike, so one compiled tree serves evaluation and differentiation.
    """
    if isinstance(node, Num):
        v = node.value
        return lambda xs: v
    if isinstance(node, Var):
        i = node.index
        return lambda xs: xs[i]
    if isinstance(node, Neg):
        f = compile_node(node.arg)
        return lambda xs: -f(xs)
    if isinstance(node, BinOp):
        f, g = compile_node(node.left), compile_node(node.right)
        if node.op == "+":
            return lambda xs: f(xs) + g(xs)
        if node.op == "-":
            return lambda xs: f(xs) - g(xs)
        if node.op == "*":
            return lambda xs: f(xs) * g(xs)
        text = to_source(node)
        return lambda xs: _checked_div(f(xs), g(xs), text)
    if isinstance(node, Pow):
        f, k = compile_node(node.base), node.exponent
        text = to_source(node)
        if k == 0:
            return lambda xs: 1.0
        if k == 1:
            return f
        if k == 2:
            def square(xs):
                v = f(xs)
                return v * v
            return square
        return lambda xs: _checked_pow(f(xs), k, text)
    if isinstance(node, Call):
        f = compile_node(node.arg)
        if node.func == "sqrt":
            text = to_source(node)
            return lambda xs: _checked_sqrt(f(xs), text)
        u = _UNARY[node.func]
        return lambda xs: u(f(xs))
    raise TypeError(node)


def evaluate(node: Node, coords: Sequence[float]) -> float:
    """Reference tree-walking evaluator (used to cross-check compiled closures)."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return coords[node.index]
    if isinstance(node, Neg):
        return -evaluate(node.arg, coords)
    if isinstance(node, BinOp):
        a, b = evaluate(node.left, coords), evaluate(node.right, coords)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if b == 0:
            raise DomainError("division by zero", to_source(node))
        return a / b
    if isinstance(node, Pow):
        a = evaluate(node.base, coords)
        if node.exponent < 0 and a == 0:
            raise DomainError("negative power of zero", to_source(node))
        return a**node.exponent
    if isinstance(node, Call):
        a = evaluate(node.arg, coords)
        if node.func == "sqrt":
            if a < 0:
                raise DomainError("square root of a negative number", to_source(node))
            return math.sqrt(a)
        return getattr(math, node.func)(a)
    raise TypeError(node)
