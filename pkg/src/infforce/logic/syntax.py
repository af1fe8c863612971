"""First-order syntax: signatures, terms, formula ASTs and their canonical text.

Formulas only use the connectives the forcing recursion is defined on
(atoms, equality, negation, conjunction, disjunction, existential
quantification); universal quantifiers and implications are expanded by the
parser.  Every AST node is immutable and hashable, so formulas can be used
directly as memo keys.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence, Union

from ..errors import SignatureError

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_CANONICAL_VAR = re.compile(r"x(\d+)\Z")
SYMBOL_CHARS = frozenset("<>~^*+/%@$?:-=")
RESERVED_WORDS = frozenset({"E", "A"})
RESERVED_SYMBOLS = frozenset({"=", "->", "<->"})


def is_identifier(name: str) -> bool:
    return bool(_IDENT.match(name))


def is_symbolic(name: str) -> bool:
    return bool(name) and set(name) <= SYMBOL_CHARS


def canonical_var(depth: int) -> str:
    return f"x{depth}"


def var_rank(name: str) -> tuple:
    m = _CANONICAL_VAR.match(name)
    return (0, int(m.group(1)), "") if m else (1, 0, name)


@dataclass(frozen=True)
class Signature:
    """A finite relational signature with constants.

    Declaration order is significant: it fixes the canonical symbol order
    used when sentences are enumerated.
    """

    relations: tuple[tuple[str, int], ...] = ()
    constants: tuple[str, ...] = ()

    def __post_init__(self):
        rels = tuple((str(n), int(a)) for n, a in self.relations)
        consts = tuple(str(c) for c in self.constants)
        object.__setattr__(self, "relations", rels)
        object.__setattr__(self, "constants", consts)
        seen = set()
        for name, arity in rels:
            if arity < 1:
                raise SignatureError(f"relation {name!r} must have arity >= 1")
            if is_symbolic(name):
                if name in RESERVED_SYMBOLS:
                    raise SignatureError(f"{name!r} is reserved")
            elif not is_identifier(name) or name in RESERVED_WORDS:
                raise SignatureError(f"bad relation name {name!r}")
            if name in seen:
                raise SignatureError(f"duplicate symbol {name!r}")
            seen.add(name)
        for name in consts:
            if not is_identifier(name) or name in RESERVED_WORDS:
                raise SignatureError(f"bad constant name {name!r}")
            if name in seen:
                raise SignatureError(f"duplicate symbol {name!r}")
            seen.add(name)

    @cached_property
    def arities(self) -> dict[str, int]:
        return dict(self.relations)

    @cached_property
    def relation_index(self) -> dict[str, int]:
        return {name: i for i, (name, _) in enumerate(self.relations)}

    @cached_property
    def constant_index(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.constants)}

    @classmethod
    def from_json(cls, data: Mapping) -> "Signature":
        rels = [(r["name"], r["arity"]) for r in data.get("relations", [])]
        return cls(tuple(rels), tuple(data.get("constants", [])))

    @classmethod
    def from_spec(cls, text: str) -> "Signature":
        """Parse the compact form ``"<:2,P:1,c:0"`` (arity 0 declares a constant)."""
        rels, consts = [], []
        for item in filter(None, (s.strip() for s in text.split(","))):
            name, _, arity = item.rpartition(":")
            if not name:
                raise SignatureError(f"bad signature item {item!r}")
            if int(arity) == 0:
                consts.append(name)
            else:
                rels.append((name, int(arity)))
        return cls(tuple(rels), tuple(consts))

    def to_json(self) -> dict:
        return {
            "relations": [{"name": n, "arity": a} for n, a in self.relations],
            "constants": list(self.constants),
        }


# -- terms -------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Var:
    name: str


@dataclass(frozen=True, slots=True)
class Const:
    name: str


@dataclass(frozen=True, slots=True)
class Param:
    """``#name``: a constant pinned to an element of a specific structure."""

    name: str


@dataclass(frozen=True, slots=True)
class Slot:
    """Placeholder for the i-th parameter of a normalized sentence template."""

    index: int


Term = Union[Var, Const, Param, Slot]


# -- formulas ----------------------------------------------------------------

class Formula:
    __slots__ = ()

    def __str__(self) -> str:
        return render(self)


@dataclass(frozen=True, slots=True)
class Atom(Formula):
    rel: str
    args: tuple
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash((1, self.rel, self.args)))

    def __hash__(self):
        return self._hash


@dataclass(frozen=True, slots=True)
class Eq(Formula):
    left: Term
    right: Term
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash((2, self.left, self.right)))

    def __hash__(self):
        return self._hash


@dataclass(frozen=True, slots=True)
class Not(Formula):
    body: Formula
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash((3, self.body)))

    def __hash__(self):
        return self._hash


@dataclass(frozen=True, slots=True)
class And(Formula):
    left: Formula
    right: Formula
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash((4, self.left, self.right)))

    def __hash__(self):
        return self._hash


@dataclass(frozen=True, slots=True)
class Or(Formula):
    left: Formula
    right: Formula
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash((5, self.left, self.right)))

    def __hash__(self):
        return self._hash


@dataclass(frozen=True, slots=True)
class Exists(Formula):
    var: str
    body: Formula
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash((6, self.var, self.body)))

    def __hash__(self):
        return self._hash


# surface abbreviations, expanded at construction time

def forall(var: str, body: Formula) -> Formula:
    return Not(Exists(var, Not(body)))


def implies(a: Formula, b: Formula) -> Formula:
    return Or(Not(a), b)


def iff(a: Formula, b: Formula) -> Formula:
    return And(implies(a, b), implies(b, a))


# -- structural queries ------------------------------------------------------

def size(f: Formula) -> int:
    """AST node count; every term occurrence is a node of its own."""
    t = type(f)
    if t is Atom:
        return 1 + len(f.args)
    if t is Eq:
        return 3
    if t is Not or t is Exists:
        return 1 + size(f.body)
    return 1 + size(f.left) + size(f.right)


def terms_of(f: Formula):
    """Yield term occurrences in preorder."""
    stack = [f]
    while stack:
        g = stack.pop()
        t = type(g)
        if t is Atom:
            yield from g.args
        elif t is Eq:
            yield g.left
            yield g.right
        elif t is Not or t is Exists:
            stack.append(g.body)
        else:
            stack.append(g.right)
            stack.append(g.left)


def free_vars(f: Formula) -> frozenset[str]:
    t = type(f)
    if t is Atom:
        return frozenset(a.name for a in f.args if type(a) is Var)
    if t is Eq:
        return frozenset(a.name for a in (f.left, f.right) if type(a) is Var)
    if t is Not:
        return free_vars(f.body)
    if t is Exists:
        return free_vars(f.body) - {f.var}
    return free_vars(f.left) | free_vars(f.right)


def is_sentence(f: Formula) -> bool:
    return not free_vars(f)


def params_of(f: Formula) -> tuple[str, ...]:
    """Parameter names in order of first occurrence."""
    out: dict[str, None] = {}
    for t in terms_of(f):
        if type(t) is Param:
            out.setdefault(t.name)
    return tuple(out)


def slot_count(f: Formula) -> int:
    return max((t.index + 1 for t in terms_of(f) if type(t) is Slot), default=0)


def map_terms(f: Formula, fn) -> Formula:
    """Rebuild ``f`` applying ``fn`` to every term (bound or not)."""
    t = type(f)
    if t is Atom:
        return Atom(f.rel, tuple(fn(a) for a in f.args))
    if t is Eq:
        return Eq(fn(f.left), fn(f.right))
    if t is Not:
        return Not(map_terms(f.body, fn))
    if t is Exists:
        return Exists(f.var, map_terms(f.body, fn))
    return t(map_terms(f.left, fn), map_terms(f.right, fn))


def substitute(f: Formula, var: str, term: Term) -> Formula:
    """Replace free occurrences of ``var`` by a closed term."""
    t = type(f)
    if t is Atom:
        if any(type(a) is Var and a.name == var for a in f.args):
            return Atom(f.rel, tuple(term if type(a) is Var and a.name == var else a
                                     for a in f.args))
        return f
    if t is Eq:
        l = term if type(f.left) is Var and f.left.name == var else f.left
        r = term if type(f.right) is Var and f.right.name == var else f.right
        return f if (l is f.left and r is f.right) else Eq(l, r)
    if t is Not:
        return Not(substitute(f.body, var, term))
    if t is Exists:
        if f.var == var:
            return f
        return Exists(f.var, substitute(f.body, var, term))
    return t(substitute(f.left, var, term), substitute(f.right, var, term))


def transport(f: Formula, mapping: Mapping[str, str]) -> Formula:
    """Rename parameters along an embedding (element -> element)."""
    return map_terms(f, lambda a: Param(mapping[a.name]) if type(a) is Param else a)


def instantiate(template: Formula, params: Sequence[str]) -> Formula:
    return map_terms(template, lambda a: Param(params[a.index]) if type(a) is Slot else a)


def normalize(f: Formula) -> tuple[Formula, tuple[str, ...]]:
    """Split a sentence into a parameter-free template and its parameters.

    Bound variables are renamed ``x0, x1, ...`` by binding depth and
    parameters become slots numbered by first occurrence, so alphabetic
    variants and sentences that differ only in their parameters share a
    template.
    """
    order: dict[str, int] = {}

    def term(a, env):
        ta = type(a)
        if ta is Var:
            return Var(env.get(a.name, a.name))
        if ta is Param:
            if a.name not in order:
                order[a.name] = len(order)
            return Slot(order[a.name])
        return a

    def go(g, env, depth):
        t = type(g)
        if t is Atom:
            return Atom(g.rel, tuple(term(a, env) for a in g.args))
        if t is Eq:
            return Eq(term(g.left, env), term(g.right, env))
        if t is Not:
            return Not(go(g.body, env, depth))
        if t is Exists:
            name = canonical_var(depth)
            return Exists(name, go(g.body, {**env, g.var: name}, depth + 1))
        left = go(g.left, env, depth)
        return t(left, go(g.right, env, depth))

    template = go(f, {}, 0)
    return template, tuple(order)


# -- canonical ordering ------------------------------------------------------

def sentence_key(f: Formula, sig: Signature, params: Sequence[str] = ()) -> tuple:
    """Total order used everywhere a canonical "first" sentence is needed:
    size first, then the preorder token sequence under declaration order."""
    rel_idx = sig.relation_index
    const_idx = sig.constant_index
    nrel = len(sig.relations)
    par_idx = {p: i for i, p in enumerate(params)}
    tokens: list = []

    def term(a):
        ta = type(a)
        if ta is Var:
            tokens.append((5, var_rank(a.name)))
        elif ta is Const:
            tokens.append((6, (const_idx.get(a.name, len(const_idx)), 0, a.name)))
        elif ta is Param:
            tokens.append((7, (par_idx.get(a.name, len(par_idx)), 0, a.name)))
        else:
            tokens.append((8, (a.index, 0, "")))

    def go(g):
        t = type(g)
        if t is Atom:
            tokens.append((0, (rel_idx.get(g.rel, nrel + 1), 0, g.rel)))
            for a in g.args:
                term(a)
        elif t is Eq:
            tokens.append((0, (nrel, 0, "=")))
            term(g.left)
            term(g.right)
        elif t is Not:
            tokens.append((1, ()))
            go(g.body)
        elif t is And or t is Or:
            tokens.append((2 if t is And else 3, ()))
            go(g.left)
            go(g.right)
        else:
            tokens.append((4, var_rank(g.var)))
            go(g.body)

    go(f)
    return (size(f), tuple(tokens))


# -- rendering ---------------------------------------------------------------

def render_term(a: Term) -> str:
    ta = type(a)
    if ta is Param:
        return "#" + a.name
    if ta is Slot:
        return f"${a.index}"
    return a.name


def _is_prefix_atom(f: Formula) -> bool:
    return type(f) is Atom and not (len(f.args) == 2 and is_symbolic(f.rel))


def render(f: Formula) -> str:
    """Canonical text; ``parse(render(f)) == f`` for every formula."""
    t = type(f)
    if t is Atom:
        if len(f.args) == 2 and is_symbolic(f.rel):
            return f"{render_term(f.args[0])} {f.rel} {render_term(f.args[1])}"
        return f"{f.rel}({','.join(render_term(a) for a in f.args)})"
    if t is Eq:
        return f"{render_term(f.left)} = {render_term(f.right)}"
    if t is Not:
        b = f.body
        inner = render(b)
        if type(b) is Not or _is_prefix_atom(b):
            return "!" + inner
        return f"!({inner})"
    if t is Exists:
        return f"E {f.var}. {render(f.body)}"
    if t is And:
        left = _paren(f.left, (Or, Exists))
        right = _paren(f.right, (And, Or, Exists))
        return f"{left} & {right}"
    left = _paren(f.left, (Exists,))
    right = _paren(f.right, (Or, Exists))
    return f"{left} | {right}"


def _paren(f: Formula, kinds) -> str:
    s = render(f)
    return f"({s})" if type(f) in kinds else s
