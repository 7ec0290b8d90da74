"""Recursive-descent parser for scalar field expressions.

Grammar (standard precedence, ^ right-associative and tighter than unary minus):

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | power
    power  := atom ('^' factor)?
    atom   := NUMBER | 'x' | 'pi' | FUNC '(' expr ')' | '(' expr ')'
    FUNC   := sin | cos | exp | abs

compile_expression returns a vectorized evaluator (numpy in, numpy out).
All failures raise ParseError carrying the byte offset of the offending token.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ParseError

_FUNCS = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "abs": np.abs}
_OPS = "+-*/^()"


def _tokenize(text):
    toks = []
    i, m = 0, len(text)
    while i < m:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in _OPS:
            toks.append((c, c, i))
            i += 1
            continue
        if c.isdigit() or c == ".":
            j = i
            while j < m and (text[j].isdigit() or text[j] == "."):
                j += 1
            if j < m and text[j] in "eE":
                k = j + 1
                if k < m and text[k] in "+-":
                    k += 1
                if k < m and text[k].isdigit():
                    j = k
                    while j < m and text[j].isdigit():
                        j += 1
            try:
                value = float(text[i:j])
            except ValueError:
                raise ParseError(f"bad number {text[i:j]!r}", i) from None
            toks.append(("num", value, i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < m and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(("name", text[i:j], i))
            i = j
            continue
        raise ParseError(f"unknown character {c!r}", i)
    toks.append(("end", None, m))
    return toks


def _shown(tok):
    return "end of input" if tok[0] == "end" else repr(tok[1])


class _Parser:
    def __init__(self, text):
        self.text = text
        self.toks = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.toks[self.pos]

    def take(self, kind=None):
        tok = self.toks[self.pos]
        if kind is not None and tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {_shown(tok)}", tok[2])
        self.pos += 1
        return tok

    def parse(self):
        fn = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError(f"unexpected {_shown(tok)}", tok[2])
        return fn

    def expr(self):
        fn = self.term()
        while self.peek()[0] in "+-":
            op = self.take()[0]
            rhs = self.term()
            if op == "+":
                fn = (lambda a, b: lambda x: a(x) + b(x))(fn, rhs)
            else:
                fn = (lambda a, b: lambda x: a(x) - b(x))(fn, rhs)
        return fn

    def term(self):
        fn = self.factor()
        while self.peek()[0] in "*/":
            op = self.take()[0]
            rhs = self.factor()
            if op == "*":
                fn = (lambda a, b: lambda x: a(x) * b(x))(fn, rhs)
            else:
                fn = (lambda a, b: lambda x: a(x) / b(x))(fn, rhs)
        return fn

    def factor(self):
        if self.peek()[0] == "-":
            self.take()
            inner = self.factor()
            return (lambda a: lambda x: -a(x))(inner)
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "^":
            self.take()
            exponent = self.factor()
            return (lambda a, b: lambda x: a(x) ** b(x))(base, exponent)
        return base

    def atom(self):
        tok = self.peek()
        if tok[0] == "num":
            self.take()
            return (lambda v: lambda x: v)(tok[1])
        if tok[0] == "name":
            self.take()
            name = tok[1]
            if name == "x":
                return lambda x: x
            if name == "pi":
                return lambda x: math.pi
            if name in _FUNCS:
                self.take("(")
                inner = self.expr()
                self.take(")")
                return (lambda f, a: lambda x: f(a(x)))(_FUNCS[name], inner)
            raise ParseError(f"unknown identifier {name!r}", tok[2])
        if tok[0] == "(":
            self.take()
            inner = self.expr()
            self.take(")")
            return inner
        raise ParseError(f"expected a value, found {_shown(tok)}", tok[2])


def compile_expression(text):
    """Compile expression text into a pure vectorized evaluator."""
    if not isinstance(text, str) or not text.strip():
        raise ParseError("empty expression", 0)
    return _Parser(text).parse()
