"""Recursive-descent parser for the concrete formula grammar.

Precedence, loosest first: ``<->``, ``->`` (both right-associative), ``|``,
``&`` (left-associative), prefix ``!``.  A quantifier ``E x.`` / ``A x.``
takes the longest formula to its right.
"""

from __future__ import annotations

import re
from typing import NamedTuple

from ..errors import ArityMismatch, ParseError, UndeclaredSymbol
from .syntax import (
    Atom, Const, Eq, Exists, Formula, Not, And, Or, Param, Signature, Var,
    forall, iff, implies, is_identifier, RESERVED_WORDS, SYMBOL_CHARS,
)

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_PARAM_RE = re.compile(r"#([A-Za-z0-9_]+)")
_PUNCT = {"(", ")", ",", ".", "&", "|", "!"}


class Token(NamedTuple):
    kind: str   # ident | param | sym | punct | end
    text: str
    pos: int


def tokenize(text: str, sig: Signature) -> list[Token]:
    symbols = sorted({"=", "->", "<->"} | {n for n, _ in sig.relations
                                           if not is_identifier(n)},
                     key=len, reverse=True)
    out = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c == "#":
            m = _PARAM_RE.match(text, i)
            if not m:
                raise ParseError("malformed parameter", i)
            out.append(Token("param", m.group(1), i))
            i = m.end()
            continue
        m = _IDENT_RE.match(text, i)
        if m:
            out.append(Token("ident", m.group(0), i))
            i = m.end()
            continue
        for s in symbols:
            if text.startswith(s, i):
                out.append(Token("sym", s, i))
                i += len(s)
                break
        else:
            if c in _PUNCT:
                out.append(Token("punct", c, i))
                i += 1
            elif c in SYMBOL_CHARS:
                j = i
                while j < n and text[j] in SYMBOL_CHARS:
                    j += 1
                raise UndeclaredSymbol(f"undeclared symbol {text[i:j]!r}", i)
            else:
                raise ParseError(f"unexpected character {c!r}", i)
    out.append(Token("end", "", n))
    return out


class _Parser:
    def __init__(self, text: str, sig: Signature):
        self.sig = sig
        self.toks = tokenize(text, sig)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def advance(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def accept(self, text: str) -> bool:
        if self.tok.kind in ("punct", "sym") and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> None:
        if not self.accept(text):
            raise ParseError(f"expected {text!r}, found {self.tok.text or 'end of input'!r}",
                             self.tok.pos)

    def parse(self) -> Formula:
        f = self.iff()
        if self.tok.kind != "end":
            raise ParseError(f"unexpected {self.tok.text!r}", self.tok.pos)
        return f

    def iff(self) -> Formula:
        left = self.imp()
        if self.accept("<->"):
            return iff(left, self.iff())
        return left

    def imp(self) -> Formula:
        left = self.disj()
        if self.accept("->"):
            return implies(left, self.imp())
        return left

    def disj(self) -> Formula:
        f = self.conj()
        while self.accept("|"):
            f = Or(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.unary()
        while self.accept("&"):
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        t = self.tok
        if self.accept("!"):
            return Not(self.unary())
        if self.accept("("):
            f = self.iff()
            self.expect(")")
            return f
        if t.kind == "ident" and t.text in RESERVED_WORDS:
            self.advance()
            v = self.tok
            if v.kind != "ident" or v.text in RESERVED_WORDS:
                raise ParseError("expected a variable after quantifier", v.pos)
            if v.text in self.sig.arities or v.text in self.sig.constant_index:
                raise ParseError(f"cannot quantify over declared symbol {v.text!r}", v.pos)
            self.advance()
            self.expect(".")
            body = self.iff()
            return Exists(v.text, body) if t.text == "E" else forall(v.text, body)
        return self.atom()

    def atom(self) -> Formula:
        t = self.tok
        if t.kind == "ident" and self.toks[self.i + 1].text == "(" \
                and self.toks[self.i + 1].kind == "punct":
            if t.text not in self.sig.arities:
                raise UndeclaredSymbol(f"undeclared relation {t.text!r}", t.pos)
            self.advance()
            self.advance()
            args = [self.term()]
            while self.accept(","):
                args.append(self.term())
            self.expect(")")
            arity = self.sig.arities[t.text]
            if len(args) != arity:
                raise ArityMismatch(f"{t.text} expects {arity} arguments, got {len(args)}",
                                    t.pos)
            return Atom(t.text, tuple(args))
        left = self.term()
        op = self.tok
        if op.kind == "sym" and op.text == "=":
            self.advance()
            return Eq(left, self.term())
        if op.kind in ("sym", "ident") and op.text in self.sig.arities:
            self.advance()
            if self.sig.arities[op.text] != 2:
                raise ArityMismatch(f"{op.text} is not binary and cannot be used infix",
                                    op.pos)
            return Atom(op.text, (left, self.term()))
        raise ParseError(f"expected a relation after term, found {op.text or 'end of input'!r}",
                         op.pos)

    def term(self):
        t = self.tok
        if t.kind == "param":
            self.advance()
            return Param(t.text)
        if t.kind == "ident" and t.text not in RESERVED_WORDS:
            if t.text in self.sig.arities:
                raise ParseError(f"relation {t.text!r} used as a term", t.pos)
            self.advance()
            return Const(t.text) if t.text in self.sig.constant_index else Var(t.text)
        raise ParseError(f"expected a term, found {t.text or 'end of input'!r}", t.pos)


def parse_formula(text: str, sig: Signature) -> Formula:
    """Parse ``text`` into an abbreviation-free formula over ``sig``."""
    return _Parser(text, sig).parse()
