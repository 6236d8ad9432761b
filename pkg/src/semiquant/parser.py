"""Recursive-descent parser for the expression grammar.

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := atom ('^' signed_rational)? | '-' factor
    atom   := integer | ident | ident '(' expr ')' | '(' expr ')'
    signed_rational := '-'? digits ('/' digits)?

An exponent is read greedily, so ``y^1/2`` is the square root of ``y``.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Optional

from .expr import (
    COORDINATES,
    FUNCTIONS,
    INTERNAL_FUNCTIONS,
    Expr,
    Func,
    Pow,
    Product,
    Rat,
    Sum,
    Sym,
    normalize,
)

DEFAULT_PARAMETERS = ("t", "c", "A", "alpha", "c1", "c2")


class ParseError(ValueError):
    """Syntax or name error; ``offset`` is a byte offset into the UTF-8 input."""

    def __init__(self, message: str, offset: int, text: str = "") -> None:
        self.offset = offset
        self.text = text
        super().__init__(f"{message} at byte {offset}")


class _Parser:
    def __init__(self, text: str, strict: bool, declared: frozenset[str]) -> None:
        self.text = text
        self.pos = 0
        self.strict = strict
        self.declared = declared

    def error(self, message: str, pos: Optional[int] = None) -> ParseError:
        at = self.pos if pos is None else pos
        return ParseError(message, len(self.text[:at].encode("utf-8")), self.text)

    def skip(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str) -> None:
        if self.peek() != ch:
            found = self.peek() or "end of input"
            raise self.error(f"expected {ch!r}, found {found!r}")
        self.pos += 1

    def digits(self) -> int:
        self.skip()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            raise self.error("expected digits")
        return int(self.text[start:self.pos])

    def parse(self) -> Expr:
        e = self.expr()
        if self.peek():
            raise self.error(f"unexpected {self.peek()!r}")
        return e

    def expr(self) -> Expr:
        terms = [self.term()]
        while self.peek() in ("+", "-"):
            op = self.text[self.pos]
            self.pos += 1
            t = self.term()
            terms.append(t if op == "+" else Product((Rat(-1), t)))
        return terms[0] if len(terms) == 1 else Sum(terms)

    def term(self) -> Expr:
        factors = [self.factor()]
        while self.peek() in ("*", "/"):
            op = self.text[self.pos]
            self.pos += 1
            f = self.factor()
            factors.append(f if op == "*" else Pow(f, -1))
        return factors[0] if len(factors) == 1 else Product(factors)

    def factor(self) -> Expr:
        if self.peek() == "-":
            self.pos += 1
            return Product((Rat(-1), self.factor()))
        base = self.atom()
        if self.peek() == "^":
            self.pos += 1
            return Pow(base, self.signed_rational())
        return base

    def signed_rational(self) -> Fraction:
        sign = 1
        if self.peek() == "-":
            self.pos += 1
            sign = -1
        num = self.digits()
        den = 1
        if self.peek() == "/":
            self.pos += 1
            den = self.digits()
            if den == 0:
                raise self.error("zero denominator in exponent")
        return sign * Fraction(num, den)

    def atom(self) -> Expr:
        ch = self.peek()
        if not ch:
            raise self.error("unexpected end of input")
        if ch.isdigit():
            return Rat(self.digits())
        if ch == "(":
            self.pos += 1
            inner = self.expr()
            self.expect(")")
            return inner
        if ch.isalpha() or ch == "_":
            start = self.pos
            while self.pos < len(self.text) and (self.text[self.pos].isalnum() or self.text[self.pos] == "_"):
                self.pos += 1
            name = self.text[start:self.pos]
            if self.peek() == "(":
                if name not in FUNCTIONS and name not in INTERNAL_FUNCTIONS:
                    raise self.error(f"unknown function {name!r}", start)
                self.pos += 1
                arg = self.expr()
                self.expect(")")
                return Func(name, arg)
            if self.strict and name not in self.declared:
                raise self.error(f"undeclared symbol {name!r}", start)
            return Sym(name)
        raise self.error(f"unexpected {ch!r}")


def parse(
    text: str,
    *,
    strict: bool = False,
    declared: Iterable[str] = (),
    raw: bool = False,
) -> Expr:
    """Parse ``text``; the result is normalized unless ``raw`` is set.

    In strict mode every symbol must be a coordinate, a default parameter or
    listed in ``declared``.
    """
    names = frozenset(COORDINATES) | frozenset(DEFAULT_PARAMETERS) | frozenset(declared)
    tree = _Parser(text, strict, names).parse()
    return tree if raw else normalize(tree)
