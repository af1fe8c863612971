"""An extension system read as a Kripke frame.

Accessibility is the (reflexive) edge relation, and a box quantifies over
every edge leaving a node, carrying parameters along.  Modal operators sit
outside the first-order core and never under a quantifier.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError
from .forcing import _instances, _sorted, templates, transfer_failures_many
from .logic import Formula, Signature, parse_formula, render, satisfies, transport
from .logic.classify import SIGMA1_OR_LOWER
from .system import ExtensionSystem

RA_NOTE = ("desk-scale reading: resurrection compares parameter-free budget theories "
           "of whole nodes")


@dataclass(frozen=True)
class Core:
    sentence: Formula


@dataclass(frozen=True)
class Box:
    body: "ModalFormula"


@dataclass(frozen=True)
class Diamond:
    body: "ModalFormula"


@dataclass(frozen=True)
class MNot:
    body: "ModalFormula"


ModalFormula = Core | Box | Diamond | MNot

_PREFIX = {"[]": Box, "<>": Diamond, "~": MNot}


def parse_modal(text: str, sig: Signature) -> ModalFormula:
    """Parse ``[]``, ``<>`` and ``~`` prefixes followed by a first-order sentence."""
    ops, i = [], 0
    while True:
        while i < len(text) and text[i].isspace():
            i += 1
        op = next((p for p in _PREFIX if text.startswith(p, i)), None)
        if op is None:
            break
        ops.append(_PREFIX[op])
        i += len(op)
    rest = text[i:]
    for op in ("[]", "<>", "~"):
        j = rest.find(op)
        if j >= 0:
            raise ParseError("modal operator below a connective or quantifier", i + j)
    out: ModalFormula = Core(parse_formula(rest, sig))
    for op in reversed(ops):
        out = op(out)
    return out


def render_modal(m: ModalFormula) -> str:
    if type(m) is Core:
        return render(m.sentence)
    prefix = {Box: "[]", Diamond: "<>", MNot: "~"}[type(m)]
    return prefix + render_modal(m.body)


def _move(m: ModalFormula, mapping) -> ModalFormula:
    if type(m) is Core:
        return Core(transport(m.sentence, mapping))
    return type(m)(_move(m.body, mapping))


def modal_eval(system: ExtensionSystem, node: str, m: ModalFormula) -> bool:
    """Truth of ``m`` at ``node``; parameters of the core name elements of ``node``."""
    src = system.node(node)
    t = type(m)
    if t is Core:
        return satisfies(src, m.sentence)
    if t is MNot:
        return not modal_eval(system, node, m.body)
    results = (modal_eval(system, e.target, _move(m.body, e.mapping(src)))
               for e in system.edges_from(node))
    return all(results) if t is Box else any(results)


# -- vectorized modal tables ------------------------------------------------

def _over_edges(eng, table: np.ndarray, reduce) -> np.ndarray:
    m = table.ndim - 1
    empty = reduce is np.logical_and
    out = np.full((eng.n,) + (eng.U,) * m, empty, dtype=bool)
    if eng.E:
        out[eng.has_edges] = reduce.reduceat(eng.transported(table), eng.starts, axis=0)
    return out


def box_table(eng, table):
    return _over_edges(eng, table, np.logical_and)


def diamond_table(eng, table):
    return _over_edges(eng, table, np.logical_or)


@dataclass
class PrincipleReport:
    node: str
    principle: str
    budget: int
    holds: bool
    sentence: Formula | None = None
    path: list[int] = field(default_factory=list)
    note: str | None = None

    def to_json(self) -> dict:
        out = {"node": self.node, "principle": self.principle, "budget": self.budget,
               "holds": self.holds,
               "sentence": None if self.sentence is None else render(self.sentence),
               "path": self.path}
        if self.note:
            out["note"] = self.note
        return out


def _mp_scan(system, budget, at):
    eng = system.engine
    out = {p: [] for p in at}
    for t, j in templates(system, budget):
        truth = eng.truth(t)
        bad = diamond_table(eng, box_table(eng, truth))[at] & ~truth[at]
        bad &= eng.node_injective(j)[at]
        for r in np.flatnonzero(bad.reshape(len(at), -1).any(axis=1)):
            node = system.nodes[at[r]].id
            out[at[r]].extend(_instances(system, node, t, bad[r]))
    return {system.nodes[p].id: _sorted(system, system.nodes[p].id, fs)
            for p, fs in out.items()}


def mp_violations(system: ExtensionSystem, node: str, budget: int) -> list[Formula]:
    """Sentences with parameters from ``node`` where <>[]phi holds but phi fails."""
    system.node(node)
    p = system.engine.pos[node]
    return _mp_scan(system, budget, np.array([p], dtype=np.intp))[node]


def mp_violations_all(system: ExtensionSystem, budget: int) -> dict[str, list[Formula]]:
    """:func:`mp_violations` for every node in one pass."""
    return _mp_scan(system, budget, np.arange(system.engine.n, dtype=np.intp))


def _mp(system, node, budget):
    bad = mp_violations(system, node, budget)
    if not bad:
        return PrincipleReport(node, "MP", budget, True)
    phi = bad[0]
    src = system.node(node)
    witness = next(e for e in system.edges_from(node)
                   if modal_eval(system, e.target, Box(Core(transport(phi, e.mapping(src))))))
    return PrincipleReport(node, "MP", budget, False, phi, [witness.index])


def budget_theory(system: ExtensionSystem, budget: int) -> tuple[list[Formula], np.ndarray]:
    """Parameter-free sentences of size <= budget and their truth at every node."""
    eng = system.engine
    sentences = [t for t, j in templates(system, budget) if j == 0]
    table = np.array([eng.truth(t) for t in sentences], dtype=bool).reshape(
        len(sentences), eng.n)
    return sentences, table


def _ra(system, node, budget):
    eng = system.engine
    sentences, table = budget_theory(system, budget)
    home = table[:, eng.pos[node]]
    for e1 in system.edges_from(node):
        if any((table[:, eng.pos[e2.target]] == home).all()
               for e2 in system.edges_from(e1.target)):
            continue
        first = system.edges_from(e1.target)[0]
        diff = np.flatnonzero(table[:, eng.pos[first.target]] != home)
        return PrincipleReport(node, "RA", budget, False, sentences[diff[0]],
                               [e1.index, first.index], RA_NOTE)
    return PrincipleReport(node, "RA", budget, True, note=RA_NOTE)


def check_modal_principle(system: ExtensionSystem, node: str, principle: str,
                          budget: int) -> PrincipleReport:
    system.node(node)
    principle = principle.upper()
    if principle == "MP":
        return _mp(system, node, budget)
    if principle == "RA":
        return _ra(system, node, budget)
    raise ValueError(f"unknown principle {principle!r}")


def bfa_sigma1_report(system: ExtensionSystem, node: str, budget: int
                      ) -> list[tuple[str, Formula]]:
    """Sigma_1 sentences over ``node`` that become true in a descendant."""
    system.node(node)
    # validated systems list every composite, so direct edges cover the cone
    edges = system.edges_from(node)
    found = transfer_failures_many(system, edges, budget, SIGMA1_OR_LOWER, both_ways=False)
    out, seen = [], set()
    for e in edges:
        for phi in found[e.index]:
            if (e.target, phi) not in seen:
                seen.add((e.target, phi))
                out.append((e.target, phi))
    return out
