"""First-order language: signatures, formulas, parsing, satisfaction, classification."""

from .classify import QuantifierClass, classify, classify_template
from .enumerate import enumerate_sentences, enumerate_templates
from .parser import parse_formula
from .semantics import satisfies
from .structure import Structure
from .syntax import (
    And, Atom, Const, Eq, Exists, Formula, Not, Or, Param, Signature, Slot, Var,
    forall, free_vars, implies, instantiate, is_sentence, normalize, params_of,
    render, sentence_key, size, substitute, transport,
)

__all__ = [
    "And", "Atom", "Const", "Eq", "Exists", "Formula", "Not", "Or", "Param",
    "QuantifierClass", "Signature", "Slot", "Structure", "Var", "classify",
    "classify_template", "enumerate_sentences", "enumerate_templates", "forall",
    "free_vars", "implies", "instantiate", "is_sentence", "normalize", "params_of",
    "parse_formula", "render", "satisfies", "sentence_key", "size", "substitute",
    "transport",
]
