"""Tiny arithmetic expression language for descriptor definition files.

Grammar (usual precedence, ^ binds tightest and right-associatively):

    expr    := term  (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := ('+' | '-') unary | power
    power   := postfix ('^' unary)?
    postfix := atom '!'*
    atom    := NUMBER | IDENT | '(' expr ')'

Identifiers are free variables supplied at evaluation time (numpy arrays
broadcast through).  '!' is the factorial of a *constant* nonnegative
integer subexpression (e.g. ``t^2/(2!*xi1)``); it is folded at parse time
and rejected on anything non-constant.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

__all__ = ["Expression", "ExprError", "parse_expression"]


class ExprError(ValueError):
    """Syntax or evaluation error, carrying the offending position."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^!()]))"
)


def _tokenize(src: str):
    tokens = []
    pos = 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            rest = src[pos:]
            if rest.strip() == "":
                break
            bad = pos + len(rest) - len(rest.lstrip())
            raise ExprError(f"unexpected character {src[bad]!r}", bad)
        if m.group("num") is not None:
            tokens.append(("num", float(m.group("num")), m.start("num")))
        elif m.group("ident") is not None:
            tokens.append(("ident", m.group("ident"), m.start("ident")))
        else:
            tokens.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    tokens.append(("end", None, len(src)))
    return tokens


@dataclass(frozen=True)
class _Const:
    value: float

    def eval(self, env):
        return self.value

    def variables(self, out):
        pass


@dataclass(frozen=True)
class _Var:
    name: str
    pos: int

    def eval(self, env):
        try:
            return env[self.name]
        except KeyError:
            raise ExprError(f"unknown variable {self.name!r}", self.pos) from None

    def variables(self, out):
        out.add(self.name)


@dataclass(frozen=True)
class _Neg:
    child: object

    def eval(self, env):
        return -self.child.eval(env)

    def variables(self, out):
        self.child.variables(out)


@dataclass(frozen=True)
class _BinOp:
    op: str
    left: object
    right: object

    def eval(self, env):
        a = self.left.eval(env)
        b = self.right.eval(env)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        if self.op == "/":
            return a / b
        return a**b

    def variables(self, out):
        self.left.variables(out)
        self.right.variables(out)


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.tokens = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str):
        kind, val, pos = self.next()
        if kind != "op" or val != op:
            raise ExprError(f"expected {op!r}", pos)

    def parse(self):
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExprError(f"unexpected trailing {val!r}", pos)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            op = self.next()[1]
            node = _BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[:2] in (("op", "*"), ("op", "/")):
            op = self.next()[1]
            node = _BinOp(op, node, self.unary())
        return node

    def unary(self):
        kind, val, _ = self.peek()
        if kind == "op" and val in "+-":
            self.next()
            child = self.unary()
            return child if val == "+" else _Neg(child)
        return self.power()

    def power(self):
        base = self.postfix()
        if self.peek()[:2] == ("op", "^"):
            self.next()
            return _BinOp("^", base, self.unary())  # right-associative
        return base

    def postfix(self):
        node = self.atom()
        while self.peek()[:2] == ("op", "!"):
            _, _, pos = self.next()
            value = _fold_constant(node)
            if value is None:
                raise ExprError("'!' applies only to constant expressions", pos)
            if value < 0 or value != int(value):
                raise ExprError(f"'!' needs a nonnegative integer, got {value}", pos)
            node = _Const(float(math.factorial(int(value))))
        return node

    def atom(self):
        kind, val, pos = self.next()
        if kind == "num":
            return _Const(val)
        if kind == "ident":
            return _Var(val, pos)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ExprError(f"expected a number, variable or '(', got {val!r}", pos)


def _fold_constant(node):
    """Value of a variable-free subtree, or None."""
    names = set()
    node.variables(names)
    if names:
        return None
    return node.eval({})


@dataclass(frozen=True)
class Expression:
    """A parsed expression; call it with keyword or dict arguments."""

    source: str
    root: object

    def __call__(self, env=None, **kws):
        merged = dict(env or {})
        merged.update(kws)
        return self.root.eval(merged)

    @property
    def variable_names(self) -> frozenset[str]:
        names = set()
        self.root.variables(names)
        return frozenset(names)


def parse_expression(src: str) -> Expression:
    return Expression(src, _Parser(src).parse())
