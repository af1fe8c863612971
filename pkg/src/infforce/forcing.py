"""Robinson infinite forcing over an extension system.

Clauses: an atom is forced iff it holds; a conjunction iff both parts are; a
disjunction iff one part is; ``E x. phi`` iff ``phi`` is forced for some
element; ``!phi`` iff no edge ``node -> Q`` (carrying parameters along the
embedding) reaches a ``Q`` that forces ``phi``.

Verdicts come from :mod:`infforce.tables`, which computes each sentence
template for every node and every parameter choice at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .errors import (
    DanglingParameter, FreeVariableError, InternalConsistencyError, NoPathError,
    PreconditionViolated, ResourceExhausted,
)
from .logic import (
    And, Atom, Eq, Exists, Formula, Not, Or, Param, classify_template,
    enumerate_templates, free_vars, instantiate, normalize, params_of, parse_formula, render,
    satisfies, sentence_key, substitute, transport,
)
from .logic.classify import PI2_OR_LOWER, SIGMA1_OR_LOWER
from .system import Embedding, ExtensionSystem
from .tables import injective_mask

FORCED = "forced"
NOT_FORCED = "not-forced"
DEFAULT_TRACE_DEPTH = 3


def _check_sentence(system: ExtensionSystem, node: str, phi: Formula):
    s = system.node(node)
    if free_vars(phi):
        raise FreeVariableError(f"not a sentence; free variables {sorted(free_vars(phi))}")
    for p in params_of(phi):
        if p not in s.index:
            raise DanglingParameter(f"#{p} is not an element of {node!r}")
    return s


def _forced(system: ExtensionSystem, node: str, phi: Formula) -> bool:
    template, params = normalize(phi)
    eng = system.engine
    return eng.lookup(eng.forcing(template), node, params)


def _true(system: ExtensionSystem, node: str, phi: Formula) -> bool:
    template, params = normalize(phi)
    eng = system.engine
    return eng.lookup(eng.truth(template), node, params)


# -- verdicts and traces -----------------------------------------------------

@dataclass
class ForcingVerdict:
    node: str
    sentence: Formula
    forced: bool
    trace: dict | None = None

    @property
    def verdict(self) -> str:
        return FORCED if self.forced else NOT_FORCED

    def to_json(self) -> dict:
        return {"node": self.node, "sentence": render(self.sentence),
                "verdict": self.verdict, "trace": self.trace}


def forces(system: ExtensionSystem, node: str, phi: Formula, trace: bool = False,
           trace_depth: int = DEFAULT_TRACE_DEPTH) -> ForcingVerdict:
    _check_sentence(system, node, phi)
    forced = _forced(system, node, phi)
    tr = _trace(system, node, phi, trace_depth) if trace else None
    return ForcingVerdict(node, phi, forced, tr)


def _trace(system: ExtensionSystem, node: str, phi: Formula, depth: int) -> dict:
    verdict = _forced(system, node, phi)
    out = {"node": node, "sentence": render(phi),
           "verdict": FORCED if verdict else NOT_FORCED}
    t = type(phi)
    if t is Atom or t is Eq:
        out["clause"] = "atomic"
        return out
    if depth <= 0:
        out["clause"] = "truncated"
        return out
    if t is And or t is Or:
        out["clause"] = "and" if t is And else "or"
        out["children"] = [_trace(system, node, g, depth - 1) for g in (phi.left, phi.right)]
        return out
    if t is Exists:
        out["clause"] = "exists"
        children = []
        for e in system.node(node).universe:
            child = _trace(system, node, substitute(phi.body, phi.var, Param(e)), depth - 1)
            child["witness"] = e
            children.append(child)
            if child["verdict"] == FORCED:
                break
        out["children"] = children
        return out
    out["clause"] = "not"
    src = system.node(node)
    edges = system.edges_from(node)
    out["edge_count"] = len(edges)
    examined = []
    for e in edges:
        moved = transport(phi.body, e.mapping(src))
        child = _trace(system, e.target, moved, depth - 1)
        examined.append({"edge": e.index, "target": e.target, "result": child})
        if child["verdict"] == FORCED:
            break
    out["edges"] = examined
    return out


def replay_trace(system: ExtensionSystem, tr: dict) -> bool:
    """Recompute a trace's verdict bottom-up from its recorded sub-verdicts.

    Raises :class:`InternalConsistencyError` when a recorded step does not
    justify the verdict stored with it.  Truncated steps are recomputed.
    """
    sig = system.signature
    phi = parse_formula(tr["sentence"], sig)
    clause = tr["clause"]
    if clause == "atomic":
        got = satisfies(system.node(tr["node"]), phi)
    elif clause == "truncated":
        got = _forced(system, tr["node"], phi)
    elif clause in ("and", "or"):
        kids = [replay_trace(system, c) for c in tr["children"]]
        got = all(kids) if clause == "and" else any(kids)
    elif clause == "exists":
        kids = [replay_trace(system, c) for c in tr["children"]]
        universe = system.node(tr["node"]).universe
        if not any(kids) and [c["witness"] for c in tr["children"]] != list(universe):
            raise InternalConsistencyError("exists step does not examine every element")
        got = any(kids)
    elif clause == "not":
        kids = [replay_trace(system, c["result"]) for c in tr["edges"]]
        if any(kids):
            got = False
        else:
            if len(tr["edges"]) != tr["edge_count"] or \
                    tr["edge_count"] != len(system.edges_from(tr["node"])):
                raise InternalConsistencyError("negation step skips extension edges")
            got = True
    else:
        raise InternalConsistencyError(f"unknown clause {clause!r}")
    if got != (tr["verdict"] == FORCED):
        raise InternalConsistencyError(f"step for {tr['sentence']!r} at {tr['node']} "
                                       f"does not replay")
    return got


# -- sentence pools ----------------------------------------------------------

def templates(system: ExtensionSystem, budget: int) -> tuple:
    return enumerate_templates(system.signature, system.engine.U, budget)


def _injective(system, node: str, j: int) -> np.ndarray:
    eng = system.engine
    return injective_mask(eng.sizes[eng.pos[node]], j, eng.U)


def _instances(system, node: str, template, mask: np.ndarray) -> Iterator[Formula]:
    universe = system.node(node).universe
    for idx in np.argwhere(mask):
        yield instantiate(template, [universe[i] for i in idx])


def pool_size(system: ExtensionSystem, node: str, budget: int) -> int:
    """Number of sentences of size <= budget with parameters from ``node``."""
    u = len(system.node(node).universe)
    total = 0
    for _, j in templates(system, budget):
        if j <= u:
            count = 1
            for i in range(j):
                count *= u - i
            total += count
    return total


def _sorted(system, node, sentences):
    params = system.node(node).universe
    return sorted(sentences, key=lambda f: sentence_key(f, system.signature, params))


@dataclass
class GenericityReport:
    node: str
    budget: int
    undecided: list[Formula]

    @property
    def generic(self) -> bool:
        return not self.undecided

    def to_json(self) -> dict:
        return {"node": self.node, "budget": self.budget, "generic": self.generic,
                "undecided": [render(f) for f in self.undecided]}


def _undecided(system, node, budget, first_only=False):
    eng = system.engine
    p = eng.pos[node]
    u = eng.sizes[p]
    out = []
    for t, j in templates(system, budget):
        if j > u:
            continue
        und = ~(eng.forcing(t)[p] | eng.forcing(Not(t))[p]) & _injective(system, node, j)
        if und.any():
            found = list(_instances(system, node, t, und))
            if first_only:
                return [min(found, key=lambda f: sentence_key(
                    f, system.signature, system.node(node).universe))]
            out.extend(found)
    return _sorted(system, node, out)


def is_generic(system: ExtensionSystem, node: str, budget: int) -> GenericityReport:
    system.node(node)
    return GenericityReport(node, budget, _undecided(system, node, budget))


def generic_nodes(system: ExtensionSystem, budget: int) -> list[str]:
    """Ids of the budget-generic nodes, in node order."""
    eng = system.engine
    got = eng.generic_cache.get(budget)
    if got is None:
        open_ = np.ones(eng.n, dtype=bool)
        for t, j in templates(system, budget):
            und = ~(eng.forcing(t) | eng.forcing(Not(t))) & eng.node_injective(j)
            open_ &= ~und.reshape(eng.n, -1).any(axis=1)
            if not open_.any():
                break
        got = eng.generic_cache[budget] = [s.id for s, ok in zip(system.nodes, open_) if ok]
    return list(got)


@dataclass
class GenericPath:
    start: str
    steps: list[tuple[Embedding, Formula]]
    budget: int

    @property
    def final(self) -> str:
        return self.steps[-1][0].target if self.steps else self.start

    def to_json(self) -> dict:
        return {"start": self.start, "final": self.final, "budget": self.budget,
                "steps": [{"edge": e.index, "from": e.source, "to": e.target,
                           "decided": render(f)} for e, f in self.steps]}


def build_generic(system: ExtensionSystem, start: str, budget: int,
                  max_moves: int | None = None) -> GenericPath:
    """Walk edges until a budget-generic node is reached.

    At each step the canonically first undecided sentence is picked and the
    first edge (file order, then target id) whose target forces it is taken.
    ``max_moves`` defaults to the size of the largest sentence pool.
    """
    system.node(start)
    if max_moves is None:
        max_moves = max(pool_size(system, s.id, budget) for s in system.nodes)
    current, steps = start, []
    while True:
        pending = _undecided(system, current, budget, first_only=True)
        if not pending:
            return GenericPath(start, steps, budget)
        if len(steps) >= max_moves:
            raise ResourceExhausted(f"no generic node within {max_moves} moves of {start}")
        phi = pending[0]
        src = system.node(current)
        for e in system.edges_from(current):
            if _forced(system, e.target, transport(phi, e.mapping(src))):
                steps.append((e, phi))
                current = e.target
                break
        else:
            raise InternalConsistencyError(
                f"{render(phi)} is undecided at {current} but no extension forces it")


# -- transfer ----------------------------------------------------------------

KINDS = {"elementary": None, "sigma1": SIGMA1_OR_LOWER, "pi2": PI2_OR_LOWER}


@dataclass
class TransferReport:
    kind: str
    lower: str
    upper: str
    budget: int
    counterexamples: list[tuple[int, Formula]] = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return not self.counterexamples

    def to_json(self) -> dict:
        return {"kind": self.kind, "lower": self.lower, "upper": self.upper,
                "budget": self.budget, "holds": self.holds,
                "counterexamples": [{"edge": i, "sentence": render(f)}
                                    for i, f in self.counterexamples]}


def reachable(system: ExtensionSystem, node: str) -> list[str]:
    """Nodes reachable from ``node`` by edge paths (including ``node``), in node order."""
    seen = {node}
    stack = [node]
    while stack:
        for e in system.edges_from(stack.pop()):
            if e.target not in seen:
                seen.add(e.target)
                stack.append(e.target)
    return [s.id for s in system.nodes if s.id in seen]


def transfer_failures(system: ExtensionSystem, edge: Embedding, budget: int,
                      allowed=None, both_ways: bool = True) -> list[Formula]:
    """Sentences over the edge's source whose truth the edge does not carry down.

    With ``both_ways`` any disagreement counts; otherwise only sentences true
    after transport but false at the source.  ``allowed`` filters templates by
    quantifier class.
    """
    return transfer_failures_many(system, [edge], budget, allowed, both_ways)[edge.index]


def transfer_failures_many(system: ExtensionSystem, edges: Sequence[Embedding], budget: int,
                           allowed=None, both_ways: bool = True) -> dict[int, list[Formula]]:
    """:func:`transfer_failures` for several edges in one pass, keyed by edge index."""
    eng = system.engine
    out: dict[int, list[Formula]] = {e.index: [] for e in edges}
    if not edges:
        return out
    where = {e.key(): k for k, e in enumerate(eng.edge_order)}
    rows = np.array([where[e.key()] for e in edges], dtype=np.intp)
    for t, j in templates(system, budget):
        if allowed is not None and classify_template(t) not in allowed:
            continue
        tab = eng.truth(t)
        here = tab[eng.e_src[rows]]
        there = eng.transported(tab)[rows]
        bad = (here != there) if both_ways else (there & ~here)
        bad &= eng.edge_injective(j)[rows]
        for r in np.flatnonzero(bad.reshape(len(rows), -1).any(axis=1)):
            e = edges[r]
            out[e.index].extend(_instances(system, e.source, t, bad[r]))
    source = {e.index: e.source for e in edges}
    return {i: _sorted(system, source[i], fs) for i, fs in out.items()}


def elementarity_counterexamples(system, edge, budget):
    return transfer_failures(system, edge, budget)


def _edges_into(system, lower, upper):
    """Direct edges; composites of listed edges are listed in validated systems."""
    system.node(upper)
    edges = system.edges_between(lower, upper)
    if not edges:
        raise NoPathError(f"no edge from {lower} to {upper}")
    return edges


def check_transfer(system: ExtensionSystem, kind: str, lower: str, upper: str,
                   budget: int) -> TransferReport:
    if kind not in KINDS:
        raise ValueError(f"unknown transfer kind {kind!r}")
    report = TransferReport(kind, lower, upper, budget)
    edges = _edges_into(system, lower, upper)
    found = transfer_failures_many(system, edges, budget, KINDS[kind], kind == "elementary")
    for e in edges:
        report.counterexamples.extend((e.index, f) for f in found[e.index])
    return report


@dataclass
class PersistenceReport:
    holds: bool
    counterexample: Embedding | None = None

    def to_json(self) -> dict:
        e = self.counterexample
        return {"persistent": self.holds,
                "counterexample": None if e is None else
                {"edge": e.index, "from": e.source, "to": e.target}}


def is_persistent(system: ExtensionSystem, phi: Formula, budget: int | None = None
                  ) -> PersistenceReport:
    """Whether ``phi`` stays true along every edge leaving a node where it holds."""
    if params_of(phi):
        raise PreconditionViolated("persistence is checked for parameter-free sentences")
    if free_vars(phi):
        raise FreeVariableError(f"not a sentence; free variables {sorted(free_vars(phi))}")
    truth = {s.id: satisfies(s, phi) for s in system.nodes}
    for e in system.edges:
        if truth[e.source] and not truth[e.target]:
            return PersistenceReport(False, e)
    return PersistenceReport(True)


def forced_sentences(system, node, budget):
    """Every pool sentence forced at ``node`` (used by suites and tests)."""
    eng = system.engine
    p = eng.pos[node]
    out = []
    for t, j in templates(system, budget):
        if j <= eng.sizes[p]:
            out.extend(_instances(system, node, t,
                                  eng.forcing(t)[p] & _injective(system, node, j)))
    return out
