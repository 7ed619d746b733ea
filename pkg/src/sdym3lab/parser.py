"""Parser for the expression DSL.

Grammar (tokens are bit-exact):

    sum      := ['+'|'-'] product (('+'|'-') product)*
    product  := power ('*' power)*
    power    := primary ('^' INTEGER)*
    primary  := NUMBER | 'i' | 'lam' | 'y' | 'z' | 'yb' | 'Id'
              | ATOM | '(' sum ')' | '[' sum ',' sum ']' | 'Int_z' '(' sum ')'
    ATOM     := ('X' | 'J' | 'Jinv' | CONSTANT) ['_' (y|z|yb)+]
    NUMBER   := INTEGER ['/' INTEGER]          (an exact rational literal)
    CONSTANT := uppercase letter followed by letters or digits (M, H, M1, ...)

'i' is the imaginary unit, 'lam' the spectral parameter, 'Id' the identity
matrix and '[a,b]' the commutator a*b - b*a.  A derivative suffix counts
total derivatives, e.g. X_yyb is the second derivative of X along y and yb.
Parsing always returns the canonical form, so parse/print/parse is a fixed
point.
"""

from __future__ import annotations

import re
from fractions import Fraction

from . import calculus
from .expr import (
    Expr,
    atom_expr,
    commutator,
    coord_expr,
    identity,
    lam_expr,
    scalar_expr,
    Scalar,
)

__all__ = ["parse", "ParseError", "UnknownSymbolError"]


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnknownSymbolError(ParseError):
    pass


_TOKEN_RE = re.compile(
    r"""
    (?P<number>\d+(?:/\d+)?)
  | (?P<ident>[A-Za-z][A-Za-z0-9_]*)
  | (?P<op>[-+*^(),\[\]])
  | (?P<ws>\s+)
""",
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


_SUFFIX_COORDS = {"y", "z", "yb"}


def _split_suffix(suffix: str, pos: int) -> list[str]:
    coords = []
    i = 0
    while i < len(suffix):
        if suffix.startswith("yb", i):
            coords.append("yb")
            i += 2
        elif suffix[i] in ("y", "z"):
            coords.append(suffix[i])
            i += 1
        else:
            raise ParseError(f"invalid derivative suffix {suffix!r}", pos)
    return coords


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.index = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.index]

    def advance(self) -> tuple[str, str, int]:
        tok = self.tokens[self.index]
        self.index += 1
        return tok

    def expect(self, value: str) -> None:
        kind, text, pos = self.peek()
        if text != value:
            raise ParseError(f"expected {value!r}, found {text or 'end of input'!r}", pos)
        self.advance()

    def parse(self) -> Expr:
        e = self.sum()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected trailing input {text!r}", pos)
        return e

    def sum(self) -> Expr:
        sign = 1
        kind, text, _ = self.peek()
        if text in ("+", "-"):
            self.advance()
            sign = -1 if text == "-" else 1
        e = self.product().scale(sign)
        while True:
            kind, text, _ = self.peek()
            if text == "+":
                self.advance()
                e = e + self.product()
            elif text == "-":
                self.advance()
                e = e - self.product()
            else:
                return e

    def product(self) -> Expr:
        e = self.power()
        while self.peek()[1] == "*":
            self.advance()
            e = e * self.power()
        return e

    def power(self) -> Expr:
        e = self.primary()
        while self.peek()[1] == "^":
            self.advance()
            kind, text, pos = self.advance()
            if kind != "number" or "/" in text:
                raise ParseError("exponent must be a nonnegative integer", pos)
            n = int(text)
            out = identity()
            for _ in range(n):
                out = out * e
            e = out
        return e

    def primary(self) -> Expr:
        kind, text, pos = self.advance()
        if kind == "number":
            if "/" in text:
                p, q = text.split("/")
                return scalar_expr(Fraction(int(p), int(q)))
            return scalar_expr(int(text))
        if text == "(":
            e = self.sum()
            self.expect(")")
            return e
        if text == "[":
            a = self.sum()
            self.expect(",")
            b = self.sum()
            self.expect("]")
            return commutator(a, b)
        if kind == "ident":
            return self.identifier(text, pos)
        raise ParseError(f"unexpected token {text or 'end of input'!r}", pos)

    def identifier(self, name: str, pos: int) -> Expr:
        if name == "Int_z":
            self.expect("(")
            inner = self.sum()
            self.expect(")")
            return calculus.formal_z_integral(inner)
        if name == "Id":
            return identity()
        if name == "lam":
            return lam_expr()
        if name == "i":
            return scalar_expr(Scalar(Fraction(0), Fraction(1)))
        if name in ("y", "z", "yb"):
            return coord_expr(name)

        base, underscore, suffix = name.partition("_")
        if underscore and not suffix:
            raise ParseError(f"dangling derivative suffix in {name!r}", pos)
        if base not in ("X", "J", "Jinv") and not base[0].isupper():
            raise UnknownSymbolError(f"unknown symbol {name!r}", pos)
        e = atom_expr(base)
        if suffix:
            for coord in _split_suffix(suffix, pos):
                e = calculus.total_derivative(e, coord)
        return e


def parse(text: str) -> Expr:
    """Parse a DSL string into its canonical expression."""
    return _Parser(text).parse()
