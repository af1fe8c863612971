from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping

from ..errors import ClassValidationError
from .syntax import Signature


@dataclass(frozen=True, eq=False)
class Structure:
    """A finite structure: universe, relation tables and constant assignments.

    Elements are kept as strings so that ``#name`` parameters refer to them
    unambiguously.
    """

    id: str
    universe: tuple[str, ...]
    relations: Mapping[str, frozenset] = field(default_factory=dict)
    constants: Mapping[str, str] = field(default_factory=dict)

    @cached_property
    def index(self) -> dict[str, int]:
        return {e: i for i, e in enumerate(self.universe)}

    def __len__(self) -> int:
        return len(self.universe)

    def __eq__(self, other):
        if not isinstance(other, Structure):
            return NotImplemented
        return (self.id, self.universe, dict(self.relations), dict(self.constants)) == \
            (other.id, other.universe, dict(other.relations), dict(other.constants))

    __hash__ = None

    def holds(self, rel: str, elems: tuple) -> bool:
        return elems in self.relations[rel]

    def validate(self, sig: Signature) -> None:
        if not self.universe:
            raise ClassValidationError(f"structure {self.id!r}: empty universe")
        if len(set(self.universe)) != len(self.universe):
            raise ClassValidationError(f"structure {self.id!r}: repeated element")
        elems = set(self.universe)
        for name in self.relations:
            if name not in sig.arities:
                raise ClassValidationError(f"structure {self.id!r}: unknown relation {name!r}")
        for name, arity in sig.relations:
            for tup in self.relations.get(name, ()):
                if len(tup) != arity or not set(tup) <= elems:
                    raise ClassValidationError(
                        f"structure {self.id!r}: bad tuple {list(tup)} for {name}")
        for c in sig.constants:
            if self.constants.get(c) not in elems:
                raise ClassValidationError(f"structure {self.id!r}: constant {c!r} unassigned")
        for c in self.constants:
            if c not in sig.constant_index:
                raise ClassValidationError(f"structure {self.id!r}: unknown constant {c!r}")

    @classmethod
    def build(cls, id, universe, relations=None, constants=None, sig: Signature | None = None):
        """Normalize plain Python/JSON data into a structure (elements -> str)."""
        universe = tuple(str(e) for e in universe)
        rels = {str(k): frozenset(tuple(str(e) for e in t) for t in v)
                for k, v in (relations or {}).items()}
        if sig is not None:
            for name, _ in sig.relations:
                rels.setdefault(name, frozenset())
        consts = {str(k): str(v) for k, v in (constants or {}).items()}
        s = cls(str(id), universe, rels, consts)
        if sig is not None:
            s.validate(sig)
        return s

    @classmethod
    def from_json(cls, data: Mapping, sig: Signature) -> "Structure":
        return cls.build(data["id"], data["universe"], data.get("relations"),
                         data.get("constants"), sig)

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "universe": list(self.universe),
            "relations": {k: sorted([list(t) for t in v], key=self._tuple_key)
                          for k, v in self.relations.items()},
            "constants": dict(self.constants),
        }

    def _tuple_key(self, t):
        return [self.index[e] for e in t]
