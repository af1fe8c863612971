"""Tarski satisfaction on finite structures."""

from __future__ import annotations

from typing import Mapping

from ..errors import DanglingParameter, FreeVariableError
from .structure import Structure
from .syntax import And, Atom, Const, Eq, Exists, Formula, Not, Or, Param, Var, params_of


def satisfies(s: Structure, phi: Formula, assignment: Mapping[str, str] | None = None) -> bool:
    """Return whether ``s`` satisfies ``phi`` under ``assignment``.

    ``assignment`` maps free variable names to elements of ``s``.  Parameters
    must name elements of ``s``; a dangling one raises
    :class:`DanglingParameter`.
    """
    env = dict(assignment or {})
    index = s.index
    for p in params_of(phi):
        if p not in index:
            raise DanglingParameter(f"#{p} is not an element of {s.id!r}")

    def value(t):
        tt = type(t)
        if tt is Var:
            try:
                return env[t.name]
            except KeyError:
                raise FreeVariableError(f"variable {t.name!r} is not assigned") from None
        if tt is Param:
            return t.name
        if tt is Const:
            return s.constants[t.name]
        raise TypeError(f"cannot evaluate term {t!r}")

    def go(f) -> bool:
        t = type(f)
        if t is Atom:
            return tuple(value(a) for a in f.args) in s.relations[f.rel]
        if t is Eq:
            return value(f.left) == value(f.right)
        if t is Not:
            return not go(f.body)
        if t is And:
            return go(f.left) and go(f.right)
        if t is Or:
            return go(f.left) or go(f.right)
        if t is Exists:
            saved = env.get(f.var, _MISSING)
            try:
                for e in s.universe:
                    env[f.var] = e
                    if go(f.body):
                        return True
                return False
            finally:
                if saved is _MISSING:
                    env.pop(f.var, None)
                else:
                    env[f.var] = saved
        raise TypeError(f"not a formula: {f!r}")

    return go(phi)


_MISSING = object()
