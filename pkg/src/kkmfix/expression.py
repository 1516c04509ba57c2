"""A tiny arithmetic language for kernels K(x, y) and source terms f(x).

Grammar, loosest binding first::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?          # right-associative
    atom   := NUMBER | 'x' | 'y' | FUNC '(' expr ')' | '(' expr ')'

so ``-x^2`` is ``-(x^2)`` and ``2^-1`` is ``0.5``. Evaluation is vectorized
over numpy arrays.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import EvaluationError, ExpressionSyntaxError, UnknownIdentifierError

VARIABLES = ("x", "y")
FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "abs": np.abs,
    "sqrt": np.sqrt,
}

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


@dataclass(frozen=True)
class Token:
    kind: str  # "num", "name", "op" or "end"
    text: str
    pos: int


def tokenize(source: str) -> list[Token]:
    tokens = []
    pos = 0
    while True:
        while pos < len(source) and source[pos].isspace():
            pos += 1
        if pos == len(source):
            break
        m = _TOKEN.match(source, pos)
        if m is None or m.end() == pos:
            raise ExpressionSyntaxError(f"unexpected character {source[pos]!r}", pos)
        kind = m.lastgroup
        tokens.append(Token(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(Token("end", "", len(source)))
    return tokens


@dataclass(frozen=True)
class Num:
    value: float

    def evaluate(self, env):
        return self.value


@dataclass(frozen=True)
class Var:
    name: str

    def evaluate(self, env):
        try:
            return env[self.name]
        except KeyError:
            raise EvaluationError(f"variable {self.name!r} has no value") from None


@dataclass(frozen=True)
class Neg:
    operand: "Node"

    def evaluate(self, env):
        return -self.operand.evaluate(env)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"

    def evaluate(self, env):
        a = self.left.evaluate(env)
        b = self.right.evaluate(env)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        if self.op == "/":
            if np.any(np.asarray(b) == 0):
                raise EvaluationError("division by zero")
            return a / b
        with np.errstate(all="ignore"):
            out = np.power(np.asarray(a, dtype=float), b)
        if not np.all(np.isfinite(out)):
            raise EvaluationError("power produced a non-finite value")
        return out


@dataclass(frozen=True)
class Call:
    name: str
    arg: "Node"

    def evaluate(self, env):
        v = self.arg.evaluate(env)
        if self.name == "sqrt" and np.any(np.asarray(v) < 0):
            raise EvaluationError("sqrt of a negative number")
        with np.errstate(all="ignore"):
            out = FUNCTIONS[self.name](v)
        if not np.all(np.isfinite(out)):
            raise EvaluationError(f"{self.name} produced a non-finite value")
        return out


Node = Union[Num, Var, Neg, BinOp, Call]


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = tokenize(source)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> None:
        if self.tok.text != text or self.tok.kind != "op":
            raise ExpressionSyntaxError(
                f"unexpected {self._describe(self.tok)}", self.tok.pos, (repr(text),)
            )
        self.advance()

    @staticmethod
    def _describe(t: Token) -> str:
        return "end of input" if t.kind == "end" else repr(t.text)

    def parse(self) -> Node:
        node = self.expr()
        if self.tok.kind != "end":
            raise ExpressionSyntaxError(
                f"unexpected {self._describe(self.tok)}", self.tok.pos, ("operator", "end of input")
            )
        return node

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
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Node:
        t = self.tok
        if t.kind == "num":
            self.advance()
            return Num(float(t.text))
        if t.kind == "name":
            self.advance()
            if t.text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(t.text, arg)
            if t.text in VARIABLES:
                return Var(t.text)
            raise UnknownIdentifierError(
                f"unknown identifier {t.text!r}", t.pos, VARIABLES + tuple(FUNCTIONS)
            )
        if t.kind == "op" and t.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        raise ExpressionSyntaxError(
            f"unexpected {self._describe(t)}", t.pos, ("number", "variable", "function", "'('")
        )


class Expression:
    """A parsed expression; call it with keyword values for ``x`` and ``y``."""

    def __init__(self, source: str, tree: Node):
        self.source = source
        self.tree = tree

    def __call__(self, x=0.0, y=0.0):
        return self.tree.evaluate({"x": x, "y": y})

    def variables(self) -> set[str]:
        found = set()

        def walk(node):
            if isinstance(node, Var):
                found.add(node.name)
            elif isinstance(node, Neg):
                walk(node.operand)
            elif isinstance(node, BinOp):
                walk(node.left)
                walk(node.right)
            elif isinstance(node, Call):
                walk(node.arg)

        walk(self.tree)
        return found

    def __repr__(self):
        return f"Expression({self.source!r})"


def parse_expression(source: str) -> Expression:
    if not source or not source.strip():
        raise ExpressionSyntaxError("empty expression", 0, ("expression",))
    return Expression(source, _Parser(source).parse())
