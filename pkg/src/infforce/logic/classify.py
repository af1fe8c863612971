"""Quantifier-prefix classification of sentences."""

from __future__ import annotations

import enum
from functools import lru_cache

from ..errors import FreeVariableError
from .syntax import And, Atom, Eq, Formula, Not, Or, free_vars


class QuantifierClass(str, enum.Enum):
    DELTA0 = "Delta0"
    SIGMA1 = "Sigma1"
    PI2 = "Pi2"
    OTHER = "Other"

    def __str__(self) -> str:
        return self.value


def levels(f: Formula) -> tuple[int, int]:
    """Least ``(n, m)`` such that ``f`` has a prenex form with a Sigma_n
    prefix and one with a Pi_m prefix (0 means quantifier-free).

    Prefixes of independent conjuncts/disjuncts interleave freely when
    pulled out, so binary connectives take the componentwise maximum; a
    negation swaps the two; an existential either opens a new leading block
    or joins an existing leading existential block.
    """
    t = type(f)
    if t is Atom or t is Eq:
        return 0, 0
    if t is Not:
        s, p = levels(f.body)
        return p, s
    if t is And or t is Or:
        s1, p1 = levels(f.left)
        s2, p2 = levels(f.right)
        return max(s1, s2), max(p1, p2)
    s, p = levels(f.body)
    sigma = max(1, min(s, p + 1))
    return sigma, sigma + 1


def classify(phi: Formula) -> QuantifierClass:
    if free_vars(phi):
        raise FreeVariableError(f"not a sentence; free variables {sorted(free_vars(phi))}")
    return classify_template(phi)


@lru_cache(maxsize=1 << 16)
def classify_template(phi: Formula) -> QuantifierClass:
    """Like :func:`classify` but skips the sentence check (slots count as closed)."""
    s, p = levels(phi)
    if s == 0:
        return QuantifierClass.DELTA0
    if s <= 1:
        return QuantifierClass.SIGMA1
    if p <= 2:
        return QuantifierClass.PI2
    return QuantifierClass.OTHER


# Transfer checks use the usual cumulative hierarchy: a Sigma_1 check also
# covers quantifier-free sentences, a Pi_2 check covers both lower classes.
SIGMA1_OR_LOWER = frozenset({QuantifierClass.DELTA0, QuantifierClass.SIGMA1})
PI2_OR_LOWER = SIGMA1_OR_LOWER | {QuantifierClass.PI2}
