"""Exhaustive, deterministic enumeration of sentences up to a size budget.

Bound variables are named canonically (``x<d>`` for the binder at depth
``d``), so each sentence is produced once up to renaming of bound variables.
Vacuous quantifiers are included: they are sentences like any other.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Sequence

from .syntax import (
    And, Atom, Const, Eq, Exists, Formula, Not, Or, Param, Signature, Slot, Var,
    canonical_var, sentence_key,
)


class _Generator:
    """Bottom-up generation keyed on (size, depth, slots used so far).

    ``fixed`` terms (constants and, for sentence enumeration, parameters) are
    always available; in template mode up to ``max_slots`` slots may be
    introduced, numbered in order of first occurrence, so every template is
    in restricted-growth form.
    """

    def __init__(self, sig: Signature, fixed: Sequence, max_slots: int):
        self.sig = sig
        self.fixed = tuple(fixed)
        self.max_slots = max_slots
        self.memo: dict = {}

    def terms(self, depth: int, k: int):
        for d in range(depth):
            yield Var(canonical_var(d)), k
        yield from ((t, k) for t in self.fixed)
        for i in range(k):
            yield Slot(i), k
        if k < self.max_slots:
            yield Slot(k), k + 1

    def arg_lists(self, arity: int, depth: int, k: int):
        if arity == 0:
            yield (), k
            return
        for t, k1 in self.terms(depth, k):
            for rest, k2 in self.arg_lists(arity - 1, depth, k1):
                yield (t,) + rest, k2

    def gen(self, size: int, depth: int, k: int) -> list:
        key = (size, depth, k)
        if key in self.memo:
            return self.memo[key]
        out = []
        if size >= 2:
            for name, arity in self.sig.relations:
                if arity + 1 == size:
                    out.extend((Atom(name, args), k2)
                               for args, k2 in self.arg_lists(arity, depth, k))
            if size == 3:
                out.extend((Eq(a, b), k2) for (a, b), k2 in self.arg_lists(2, depth, k))
            out.extend((Not(f), k1) for f, k1 in self.gen(size - 1, depth, k))
            for i in range(2, size - 2):
                j = size - 1 - i
                for left, k1 in self.gen(i, depth, k):
                    rights = self.gen(j, depth, k1)
                    out.extend((And(left, r), k2) for r, k2 in rights)
                    out.extend((Or(left, r), k2) for r, k2 in rights)
            var = canonical_var(depth)
            out.extend((Exists(var, f), k1) for f, k1 in self.gen(size - 1, depth + 1, k))
        self.memo[key] = out
        return out


def enumerate_sentences(sig: Signature, params: Sequence[str], budget: int) -> list[Formula]:
    """All sentences of size <= ``budget`` whose parameters come from ``params``,
    ordered by :func:`sentence_key`.  Budget 0 yields an empty list."""
    if budget < 1:
        return []
    fixed = [Const(c) for c in sig.constants] + [Param(p) for p in params]
    g = _Generator(sig, fixed, 0)
    out = [f for s in range(1, budget + 1) for f, _ in g.gen(s, 0, 0)]
    out.sort(key=lambda f: sentence_key(f, sig, params))
    return out


@lru_cache(maxsize=32)
def enumerate_templates(sig: Signature, max_slots: int, budget: int) -> tuple:
    """Sentence templates (parameters replaced by restricted-growth slots).

    Returns ``(template, slot_count)`` pairs in canonical order.  Instantiating
    every template with every injective tuple of distinct elements yields each
    sentence over those elements exactly once.
    """
    if budget < 1:
        return ()
    fixed = [Const(c) for c in sig.constants]
    g = _Generator(sig, fixed, max_slots)
    out = [(f, k) for s in range(1, budget + 1) for f, k in g.gen(s, 0, 0)]
    out.sort(key=lambda fk: sentence_key(fk[0], sig))
    return tuple(out)
