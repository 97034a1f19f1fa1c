"""Plain-text polynomial systems.

A document starts with a header ``vars: x y z`` followed by one polynomial
per line.  Terms use ``*`` for products, ``^`` for non-negative integer
powers, ``+``/``-`` and decimal or scientific coefficients; parentheses are
accepted.  Blank lines and ``#`` comments are ignored.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass

from .polycore import Polynomial, PolySystem, default_varnames, format_polynomial

log = logging.getLogger(__name__)

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*^()]))"
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column
        self.reason = message


@dataclass(frozen=True)
class Document:
    varnames: tuple[str, ...]
    system: PolySystem


def _tokens(text: str, lineno: int):
    pos = 0
    out = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            col = pos + len(text[pos:]) - len(text[pos:].lstrip()) + 1
            raise ParseError(f"unexpected character {text[col - 1]!r}", lineno, col)
        kind = m.lastgroup
        start = m.start(kind) + 1
        out.append((kind, m.group(kind), start))
        pos = m.end()
    out.append(("end", "", len(text) + 1))
    return out


class _Parser:
    def __init__(self, text: str, lineno: int, names: dict[str, int]):
        self.toks = _tokens(text, lineno)
        self.i = 0
        self.lineno = lineno
        self.names = names
        self.n = len(names)

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, self.lineno, tok[2])

    def parse(self) -> Polynomial:
        p = self.expr()
        if self.peek()[0] != "end":
            self.error(f"unexpected {self.peek()[1]!r}")
        return p

    def expr(self) -> Polynomial:
        p = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            q = self.term()
            p = p + q if op == "+" else p - q
        return p

    def term(self) -> Polynomial:
        p = self.unary()
        while self.peek() == ("op", "*", self.peek()[2]):
            self.take()
            p = p * self.unary()
        return p

    def unary(self) -> Polynomial:
        tok = self.peek()
        if tok[0] == "op" and tok[1] in ("+", "-"):
            self.take()
            p = self.unary()
            return -p if tok[1] == "-" else p
        return self.power()

    def power(self) -> Polynomial:
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            tok = self.take()
            if tok[0] != "num" or not tok[1].isdigit():
                self.error("exponent must be a non-negative integer", tok)
            out = Polynomial.constant(self.n, 1.0)
            for _ in range(int(tok[1])):
                out = out * base
            return out
        return base

    def atom(self) -> Polynomial:
        tok = self.take()
        kind, val, _ = tok
        if kind == "num":
            return Polynomial.constant(self.n, float(val))
        if kind == "name":
            if val not in self.names:
                self.error(f"unknown variable {val!r}", tok)
            return Polynomial.variable(self.n, self.names[val])
        if kind == "op" and val == "(":
            p = self.expr()
            close = self.take()
            if close[1] != ")":
                self.error("expected ')'", close)
            return p
        self.error("expected a number, variable or '('" if kind != "end" else "unexpected end of line", tok)


def parse_document(text: str) -> Document:
    """Parse a ``vars:`` header and the polynomials that follow it."""
    names: list[str] | None = None
    polys = []
    last_line = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        last_line = lineno
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        if names is None:
            head = line.strip()
            if not head.startswith("vars:"):
                raise ParseError("expected a 'vars:' header", lineno, 1)
            names = head[5:].split()
            if not names:
                raise ParseError("no variables declared", lineno, 1)
            for nm in names:
                if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", nm):
                    raise ParseError(f"bad variable name {nm!r}", lineno, line.index(nm) + 1)
            if len(set(names)) != len(names):
                raise ParseError("duplicate variable name", lineno, 1)
            index = {nm: i for i, nm in enumerate(names)}
            continue
        p = _Parser(line, lineno, index).parse()
        if p.is_zero():
            log.warning("line %d: polynomial is zero and was dropped", lineno)
            continue
        polys.append(p)
    if names is None:
        raise ParseError("empty input: expected a 'vars:' header", max(last_line, 1), 1)
    if not polys:
        raise ParseError("empty system: no nonzero polynomial", max(last_line, 1), 1)
    return Document(tuple(names), PolySystem(len(names), polys))


def parse_system(text: str) -> PolySystem:
    return parse_document(text).system


def format_system(P: PolySystem, varnames=None, digits: int = 17) -> str:
    """Inverse of :func:`parse_document`; the default precision round-trips doubles."""
    names = list(varnames) if varnames is not None else default_varnames(P.nvars)
    lines = ["vars: " + " ".join(names)]
    lines += [format_polynomial(p, names, digits) for p in P]
    return "\n".join(lines) + "\n"
