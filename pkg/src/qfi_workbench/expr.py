"""Coefficient expressions c(g) with exact symbolic derivatives.

Grammar (conventional precedence, ``^`` binds tightest)::

    expr    := term (("+" | "-") term)*
    term    := unary ("*" unary)*
    unary   := "-" unary | power
    power   := atom ("^" INTEGER)?
    atom    := NUMBER | "g" | "pi" | ("sin" | "cos") "(" expr ")" | "(" expr ")"

``-g^2`` therefore parses as ``-(g^2)``. Exponents are non-negative integer
literals. The grammar is closed under differentiation.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import ModelSyntaxError


class Expr:
    def __call__(self, g):
        return self.evaluate(g)

    def evaluate(self, g):
        raise NotImplementedError

    def derivative(self) -> "Expr":
        raise NotImplementedError

    def is_const(self, value=None) -> bool:
        return False


@dataclass(frozen=True)
class Const(Expr):
    value: float

    def evaluate(self, g):
        if np.ndim(g):
            return np.full(np.shape(g), self.value)
        return self.value

    def derivative(self):
        return ZERO

    def is_const(self, value=None):
        return value is None or self.value == value

    def __str__(self):
        return repr(float(self.value)) if self.value >= 0 else f"({self.value!r})"


@dataclass(frozen=True)
class Var(Expr):
    def evaluate(self, g):
        return g

    def derivative(self):
        return ONE

    def __str__(self):
        return "g"


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr

    def evaluate(self, g):
        return self.left.evaluate(g) + self.right.evaluate(g)

    def derivative(self):
        return add(self.left.derivative(), self.right.derivative())

    def __str__(self):
        return f"{self.left} + {self.right}"


@dataclass(frozen=True)
class Sub(Expr):
    left: Expr
    right: Expr

    def evaluate(self, g):
        return self.left.evaluate(g) - self.right.evaluate(g)

    def derivative(self):
        return sub(self.left.derivative(), self.right.derivative())

    def __str__(self):
        right = f"({self.right})" if isinstance(self.right, (Add, Sub)) else str(self.right)
        return f"{self.left} - {right}"


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr

    def evaluate(self, g):
        return self.left.evaluate(g) * self.right.evaluate(g)

    def derivative(self):
        return add(mul(self.left.derivative(), self.right), mul(self.left, self.right.derivative()))

    def __str__(self):
        return f"{_wrap(self.left, (Add, Sub))} * {_wrap(self.right, (Add, Sub, Neg, Mul))}"


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr

    def evaluate(self, g):
        return -self.arg.evaluate(g)

    def derivative(self):
        return neg(self.arg.derivative())

    def __str__(self):
        return f"-{_wrap(self.arg, (Add, Sub, Neg))}"


@dataclass(frozen=True)
class Sin(Expr):
    arg: Expr

    def evaluate(self, g):
        return np.sin(self.arg.evaluate(g))

    def derivative(self):
        return mul(Cos(self.arg), self.arg.derivative())

    def __str__(self):
        return f"sin({self.arg})"


@dataclass(frozen=True)
class Cos(Expr):
    arg: Expr

    def evaluate(self, g):
        return np.cos(self.arg.evaluate(g))

    def derivative(self):
        return neg(mul(Sin(self.arg), self.arg.derivative()))

    def __str__(self):
        return f"cos({self.arg})"


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int

    def evaluate(self, g):
        return self.base.evaluate(g) ** self.exponent

    def derivative(self):
        return mul(mul(Const(float(self.exponent)), power(self.base, self.exponent - 1)),
                   self.base.derivative())

    def __str__(self):
        return f"{_wrap(self.base, (Add, Sub, Mul, Neg, Pow))}^{self.exponent}"


def _wrap(e, kinds):
    if isinstance(e, kinds) or (isinstance(e, Const) and e.value < 0):
        return f"({e})" if not isinstance(e, Const) else str(e)
    return str(e)


ZERO = Const(0.0)
ONE = Const(1.0)


# Constructors fold literal zeros and ones so derivatives stay readable; no
# further simplification is attempted.
def add(a, b):
    if a.is_const(0.0):
        return b
    if b.is_const(0.0):
        return a
    if a.is_const() and b.is_const():
        return Const(a.value + b.value)
    return Add(a, b)


def sub(a, b):
    if b.is_const(0.0):
        return a
    if a.is_const(0.0):
        return neg(b)
    if a.is_const() and b.is_const():
        return Const(a.value - b.value)
    return Sub(a, b)


def mul(a, b):
    if a.is_const(0.0) or b.is_const(0.0):
        return ZERO
    if a.is_const(1.0):
        return b
    if b.is_const(1.0):
        return a
    if a.is_const() and b.is_const():
        return Const(a.value * b.value)
    if a.is_const(-1.0):
        return neg(b)
    if b.is_const(-1.0):
        return neg(a)
    return Mul(a, b)


def neg(a):
    if a.is_const():
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def power(base, n):
    if n == 0:
        return ONE
    if n == 1:
        return base
    if base.is_const():
        return Const(base.value ** n)
    return Pow(base, n)


_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>\*\*|[-+*^()]))"
)


def _tokenize(text):
    pos = 0
    tokens = []
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ModelSyntaxError(f"unexpected character {text[pos]!r}", position=pos)
        kind = m.lastgroup
        value = m.group(kind)
        start = m.start(kind)
        if kind == "op" and value == "**":
            value = "^"
        tokens.append((kind, value, start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, tok, what):
        kind, value, pos = tok
        found = "end of expression" if kind == "end" else repr(value)
        raise ModelSyntaxError(f"expected {what}, found {found}", position=pos)

    def expect(self, value):
        tok = self.next()
        if tok[0] != "op" or tok[1] != value:
            self.error(tok, repr(value))

    def parse(self):
        e = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            self.error(tok, "operator or end of expression")
        return e

    def expr(self):
        e = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.next()[1]
            rhs = self.term()
            e = Add(e, rhs) if op == "+" else Sub(e, rhs)
        return e

    def term(self):
        e = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] == "*":
            self.next()
            e = Mul(e, self.unary())
        return e

    def unary(self):
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.next()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.next()
            tok = self.next()
            if tok[0] != "num" or not tok[1].isdigit():
                self.error(tok, "non-negative integer exponent")
            return Pow(base, int(tok[1]))
        return base

    def atom(self):
        tok = self.next()
        kind, value, _ = tok
        if kind == "num":
            return Const(float(value))
        if kind == "name":
            if value == "g":
                return Var()
            if value == "pi":
                return Const(math.pi)
            if value in ("sin", "cos"):
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Sin(arg) if value == "sin" else Cos(arg)
            raise ModelSyntaxError(f"unknown name {value!r}", position=tok[2])
        if kind == "op" and value == "(":
            e = self.expr()
            self.expect(")")
            return e
        self.error(tok, "number, 'g', function or '('")


def parse_expr(text: str) -> Expr:
    """Parse a coefficient expression; errors carry the 0-based ``position``."""
    if not isinstance(text, str):
        if isinstance(text, (int, float)) and not isinstance(text, bool):
            return Const(float(text))
        raise ModelSyntaxError(f"coefficient must be a string or number, got {type(text).__name__}")
    return _Parser(text).parse()


def as_expr(value) -> Expr:
    return value if isinstance(value, Expr) else parse_expr(value)
