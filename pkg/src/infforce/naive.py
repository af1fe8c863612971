"""Direct recursive forcing evaluator, used as an oracle for the table engine.

It follows the five clauses literally on concrete sentences: substitution
for the existential witness, parameter transport for each extension edge.
With ``cache=None`` nothing is remembered between calls, so cost grows like
(edge count) ** (negation depth); corpus-wide comparisons pass a plain dict
keyed by (node, sentence), which changes nothing but speed.
"""

from __future__ import annotations

from .logic import And, Atom, Eq, Exists, Formula, Not, Or, Param, satisfies, substitute, transport
from .system import ExtensionSystem


class NaiveForcing:
    def __init__(self, system: ExtensionSystem, cache: dict | None = None):
        self.system = system
        self.cache = cache
        self._maps = {e.index: e.mapping(system.node(e.source)) for e in system.edges}

    def forces(self, node: str, phi: Formula) -> bool:
        if self.cache is not None:
            key = (node, phi)
            got = self.cache.get(key)
            if got is None:
                got = self.cache[key] = self._forces(node, phi)
            return got
        return self._forces(node, phi)

    def _forces(self, node: str, phi: Formula) -> bool:
        t = type(phi)
        if t is Atom or t is Eq:
            return satisfies(self.system.node(node), phi)
        if t is And:
            return self.forces(node, phi.left) and self.forces(node, phi.right)
        if t is Or:
            return self.forces(node, phi.left) or self.forces(node, phi.right)
        if t is Exists:
            return any(self.forces(node, substitute(phi.body, phi.var, Param(e)))
                       for e in self.system.node(node).universe)
        if t is Not:
            return not any(self.forces(e.target, transport(phi.body, self._maps[e.index]))
                           for e in self.system.edges_from(node))
        raise TypeError(f"not a formula: {phi!r}")
