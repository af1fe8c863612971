"""Named property suites run over one extension system at a fixed budget.

Each suite returns a :class:`SuiteReport`; ``passes`` is true iff no
violation was found.  Suites: facts, infgen, geneq, excomp, pi2, mp, ra,
oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .forcing import (
    KINDS, _instances, generic_nodes, templates, transfer_failures_many,
)
from .logic import Not, enumerate_sentences, normalize, render
from .modal import check_modal_principle, mp_violations_all
from .naive import NaiveForcing
from .system import ExtensionSystem


@dataclass
class SuiteReport:
    suite: str
    budget: int
    checked: int = 0
    violations: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def passes(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {"suite": self.suite, "budget": self.budget, "passes": self.passes,
                "checked": self.checked, "violations": self.violations, "notes": self.notes}


def _rows(table, mask):
    """Positions (first axis) where ``table & mask`` has a true entry."""
    hit = table & mask
    return hit, np.flatnonzero(hit.reshape(len(hit), -1).any(axis=1))


def _facts(system, budget, report):
    eng = system.engine
    for t, j in templates(system, budget):
        f, g = eng.forcing(t), eng.forcing(Not(t))
        inj = eng.node_injective(j)
        report.checked += int(inj.sum())
        both, rows = _rows(f & g, inj)
        for p in rows:
            s = system.nodes[p].id
            report.violations += [f"{s}: both {render(x)} and its negation forced"
                                  for x in _instances(system, s, t, both[p])]
        if not eng.E:
            continue
        lost, rows = _rows(f[eng.e_src] & ~eng.transported(f), eng.edge_injective(j))
        for k in rows:
            e = eng.edge_order[k]
            report.violations += [f"edge {e.index}: {render(x)} forced at {e.source} "
                                  f"but not after moving to {e.target}"
                                  for x in _instances(system, e.source, t, lost[k])]


def _infgen(system, budget, report):
    eng = system.engine
    gens = generic_nodes(system, budget)
    report.notes.append(f"generic nodes: {gens}")
    if not gens:
        return
    at = np.array([eng.pos[g] for g in gens], dtype=np.intp)
    for t, j in templates(system, budget):
        inj = eng.node_injective(j)[at]
        report.checked += int(inj.sum())
        bad, rows = _rows(eng.forcing(t)[at] != eng.truth(t)[at], inj)
        for r in rows:
            report.violations += [f"{gens[r]}: forcing and truth differ on {render(x)}"
                                  for x in _instances(system, gens[r], t, bad[r])]


def _generic_edges(system, budget):
    gens = set(generic_nodes(system, budget))
    return gens, [e for e in system.edges if e.source in gens]


def _report_edges(report, edges, found):
    for e in edges:
        report.checked += 1
        report.violations += [f"edge {e.index} {e.source}->{e.target}: {render(x)}"
                              for x in found[e.index]]


def _geneq(system, budget, report):
    gens, edges = _generic_edges(system, budget)
    edges = [e for e in edges if e.target in gens]
    _report_edges(report, edges, transfer_failures_many(system, edges, budget))


def _transfer(kind):
    # the test check_transfer runs, batched over every edge out of a generic node
    def run(system, budget, report):
        _, edges = _generic_edges(system, budget)
        found = transfer_failures_many(system, edges, budget, KINDS[kind], both_ways=False)
        _report_edges(report, edges, found)
    return run


def _mp(system, budget, report):
    gens = set(generic_nodes(system, budget))
    failing = {s for s, bad in mp_violations_all(system, budget).items() if bad}
    for s in system.nodes:
        report.checked += 1
        if s.id not in failing:
            continue
        rep = check_modal_principle(system, s.id, "MP", budget)
        if s.id in gens:
            report.violations.append(f"generic {s.id} fails MP at {render(rep.sentence)}")
        else:
            report.notes.append(f"non-generic {s.id} fails MP at {render(rep.sentence)}")


def _ra(system, budget, report):
    gens = set(generic_nodes(system, budget))
    for s in system.nodes:
        rep = check_modal_principle(system, s.id, "RA", budget)
        report.checked += 1
        if s.id in gens and not rep.holds:
            report.violations.append(f"generic {s.id} fails RA at {render(rep.sentence)}")
        elif not rep.holds:
            report.notes.append(f"non-generic {s.id} fails RA")
    report.notes.append("RA uses the desk-scale reading (parameter-free budget theories)")


def _oracle(system, budget, report):
    eng = system.engine
    naive = NaiveForcing(system, cache={})
    for s in system.nodes:
        for phi in enumerate_sentences(system.signature, s.universe, budget):
            report.checked += 1
            t, params = normalize(phi)
            fast = eng.lookup(eng.forcing(t), s.id, params)
            if fast != naive.forces(s.id, phi):
                report.violations.append(f"{s.id}: engine and naive disagree on {render(phi)}")


SUITES = {
    "facts": _facts,
    "infgen": _infgen,
    "geneq": _geneq,
    "excomp": _transfer("sigma1"),
    "pi2": _transfer("pi2"),
    "mp": _mp,
    "ra": _ra,
    "oracle": _oracle,
}


def run_suite(system: ExtensionSystem, name: str, budget: int) -> SuiteReport:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    report = SuiteReport(name, budget)
    SUITES[name](system, budget, report)
    return report
