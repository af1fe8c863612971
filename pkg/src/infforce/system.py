"""Extension systems: finite classes of finite structures joined by embeddings.

A system is either ``auto`` (edges are every strong embedding between listed
nodes) or ``explicit`` (edges are listed, e.g. a hand-drawn multiverse, and
must already be reflexive and closed under composition).
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import jsonschema

from .errors import ClassValidationError, SignatureError, UnknownNode
from .logic import Signature, Structure

_ELEM = {"type": ["string", "integer"]}

CLASS_SCHEMA = {
    "type": "object",
    "required": ["signature", "structures", "extensions"],
    "properties": {
        "signature": {
            "type": "object",
            "required": ["relations"],
            "properties": {
                "relations": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["name", "arity"],
                        "properties": {
                            "name": {"type": "string"},
                            "arity": {"type": "integer", "minimum": 1},
                        },
                        "additionalProperties": False,
                    },
                },
                "constants": {"type": "array", "items": {"type": "string"}},
            },
            "additionalProperties": False,
        },
        "structures": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "universe"],
                "properties": {
                    "id": {"type": "string"},
                    "universe": {"type": "array", "minItems": 1, "items": _ELEM},
                    "relations": {
                        "type": "object",
                        "additionalProperties": {
                            "type": "array", "items": {"type": "array", "items": _ELEM}},
                    },
                    "constants": {"type": "object", "additionalProperties": _ELEM},
                },
                "additionalProperties": False,
            },
        },
        "extensions": {
            "oneOf": [
                {"const": "auto"},
                {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["from", "to", "map"],
                        "properties": {
                            "from": {"type": "string"},
                            "to": {"type": "string"},
                            "map": {"type": "object", "additionalProperties": _ELEM},
                            "forcing": {"type": "string"},
                            "size": {"type": "integer", "minimum": 1},
                        },
                        "additionalProperties": False,
                    },
                },
            ]
        },
    },
}


@dataclass(frozen=True)
class Embedding:
    """An edge of a system: ``source`` embeds into ``target`` via ``images``.

    ``images[i]`` is the image of the i-th element of the source universe.
    """

    source: str
    target: str
    images: tuple[str, ...]
    index: int = -1
    forcing: str | None = None
    size: int | None = None

    def mapping(self, source: Structure) -> dict[str, str]:
        return dict(zip(source.universe, self.images))

    def key(self) -> tuple:
        return (self.source, self.target, self.images)

    def to_json(self, source: Structure) -> dict:
        out = {"from": self.source, "to": self.target, "map": self.mapping(source)}
        if self.forcing is not None:
            out["forcing"] = self.forcing
        if self.size is not None:
            out["size"] = self.size
        return out


def strong_embedding_failure(a: Structure, b: Structure, images: Sequence[str],
                             sig: Signature) -> str | None:
    """Return why ``images`` is not a strong embedding a -> b, or None if it is."""
    if len(images) != len(a.universe):
        return "map is not total on the source universe"
    if len(set(images)) != len(images):
        return "map is not injective"
    if not set(images) <= set(b.universe):
        return "map leaves the target universe"
    f = dict(zip(a.universe, images))
    for c in sig.constants:
        if f[a.constants[c]] != b.constants[c]:
            return f"constant {c} not preserved"
    for name, arity in sig.relations:
        ra, rb = a.relations[name], b.relations[name]
        for tup in itertools.product(a.universe, repeat=arity):
            if (tup in ra) != (tuple(f[x] for x in tup) in rb):
                verb = "preserve" if tup in ra else "reflect"
                return f"does not {verb} {name}{tup}"
    return None


def compute_embeddings(a: Structure, b: Structure, sig: Signature) -> list[Embedding]:
    """All strong embeddings a -> b, in lexicographic order of the image tuple.

    Backtracking assigns source elements in universe order and checks each
    relation on the tuples completed by the newest assignment.
    """
    n, m = len(a.universe), len(b.universe)
    if n > m:
        return []
    forced: dict[int, int] = {}
    for c in sig.constants:
        i, j = a.index[a.constants[c]], b.index[b.constants[c]]
        if forced.get(i, j) != j:
            return []
        forced[i] = j
    rels = [(name, arity,
             {tuple(a.index[x] for x in t) for t in a.relations[name]},
             {tuple(b.index[x] for x in t) for t in b.relations[name]})
            for name, arity in sig.relations]
    out: list[Embedding] = []
    image: list[int] = []
    used = [False] * m

    def consistent(k: int) -> bool:
        # every tuple over {0..k} that mentions k
        for _, arity, ra, rb in rels:
            for tup in itertools.product(range(k + 1), repeat=arity):
                if k not in tup:
                    continue
                if (tup in ra) != (tuple(image[i] for i in tup) in rb):
                    return False
        return True

    def extend(k: int) -> None:
        if k == n:
            out.append(Embedding(a.id, b.id, tuple(b.universe[j] for j in image)))
            return
        choices = [forced[k]] if k in forced else range(m)
        for j in choices:
            if used[j]:
                continue
            used[j] = True
            image.append(j)
            if consistent(k):
                extend(k + 1)
            image.pop()
            used[j] = False

    extend(0)
    return out


@dataclass(frozen=True)
class ExtensionSystem:
    signature: Signature
    nodes: tuple[Structure, ...]
    edges: tuple[Embedding, ...]
    mode: str = "explicit"

    @cached_property
    def by_id(self) -> dict[str, Structure]:
        return {s.id: s for s in self.nodes}

    @cached_property
    def _out(self) -> dict[str, list[Embedding]]:
        out: dict[str, list[Embedding]] = {s.id: [] for s in self.nodes}
        for e in self.edges:
            out[e.source].append(e)
        for lst in out.values():
            lst.sort(key=lambda e: (e.index, e.target))
        return out

    @cached_property
    def edge_keys(self) -> dict[tuple, Embedding]:
        return {e.key(): e for e in self.edges}

    @cached_property
    def engine(self):
        from .tables import TableEngine
        return TableEngine(self)

    def node(self, node_id: str) -> Structure:
        try:
            return self.by_id[node_id]
        except KeyError:
            raise UnknownNode(f"no node {node_id!r}") from None

    def edges_from(self, node_id: str) -> list[Embedding]:
        self.node(node_id)
        return self._out[node_id]

    def edges_between(self, a: str, b: str) -> list[Embedding]:
        return [e for e in self.edges_from(a) if e.target == b]

    def compose(self, first: Embedding, second: Embedding) -> tuple[str, ...]:
        """Images of ``second . first`` (first applied first)."""
        mid = self.node(first.target)
        f2 = second.mapping(mid)
        return tuple(f2[x] for x in first.images)

    def to_json(self) -> dict:
        ext = "auto" if self.mode == "auto" else [
            e.to_json(self.node(e.source)) for e in self.edges]
        return {
            "signature": self.signature.to_json(),
            "structures": [s.to_json() for s in self.nodes],
            "extensions": ext,
        }


def build_system(sig: Signature, nodes: Sequence[Structure],
                 edges: Iterable[Embedding] | str = "auto", strict: bool = True) -> ExtensionSystem:
    """Assemble a system from structures; ``edges="auto"`` computes all embeddings."""
    ids = [s.id for s in nodes]
    dup = {i for i in ids if ids.count(i) > 1}
    if dup:
        raise ClassValidationError(f"duplicate node id(s) {sorted(dup)}")
    for s in nodes:
        s.validate(sig)
    if edges == "auto":
        found = []
        for a in nodes:
            for b in nodes:
                found.extend(compute_embeddings(a, b, sig))
        edges = [Embedding(e.source, e.target, e.images, i) for i, e in enumerate(found)]
        return ExtensionSystem(sig, tuple(nodes), tuple(edges), "auto")
    edges = [Embedding(e.source, e.target, e.images, i, e.forcing, e.size)
             for i, e in enumerate(edges)]
    system = ExtensionSystem(sig, tuple(nodes), tuple(edges), "explicit")
    if strict:
        report = check_extension_system(system)
        if not report.passes:
            raise ClassValidationError("; ".join(report.problems()))
    return system


def load_class(document: str | bytes | Mapping, strict: bool = True) -> ExtensionSystem:
    """Parse and validate a class/multiverse JSON document."""
    data = json.loads(document) if isinstance(document, (str, bytes)) else document
    try:
        jsonschema.validate(data, CLASS_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ClassValidationError(f"schema violation at {where}: {exc.message}") from None
    try:
        sig = Signature.from_json(data["signature"])
    except SignatureError as exc:
        raise ClassValidationError(str(exc)) from None
    nodes = [Structure.from_json(s, sig) for s in data["structures"]]
    ext = data["extensions"]
    if ext == "auto":
        return build_system(sig, nodes, "auto")
    by_id = {s.id: s for s in nodes}
    edges = []
    for i, item in enumerate(ext):
        src, tgt = by_id.get(item["from"]), by_id.get(item["to"])
        if src is None or tgt is None:
            raise ClassValidationError(f"edge {i}: unknown node")
        m = {str(k): str(v) for k, v in item["map"].items()}
        if set(m) != set(src.universe):
            raise ClassValidationError(f"edge {i}: map is not total on {src.id}")
        edges.append(Embedding(src.id, tgt.id, tuple(m[x] for x in src.universe), i,
                               item.get("forcing"), item.get("size")))
    return build_system(sig, nodes, edges, strict=strict)


def load_class_file(path: str | Path, strict: bool = True) -> ExtensionSystem:
    return load_class(Path(path).read_text(), strict=strict)


@dataclass
class ValidationReport:
    missing_identities: list[str] = field(default_factory=list)
    missing_composites: list[tuple[int, int]] = field(default_factory=list)
    bad_edges: list[tuple[int, str]] = field(default_factory=list)

    @property
    def reflexive(self) -> bool:
        return not self.missing_identities

    @property
    def closed(self) -> bool:
        return not self.missing_composites

    @property
    def strong(self) -> bool:
        return not self.bad_edges

    @property
    def passes(self) -> bool:
        return self.reflexive and self.closed and self.strong

    def problems(self) -> list[str]:
        out = [f"edge {i}: {why}" for i, why in self.bad_edges]
        out += [f"missing identity edge on {n}" for n in self.missing_identities]
        out += [f"composite of edges {i} and {j} is not listed"
                for i, j in self.missing_composites]
        return out

    def to_json(self) -> dict:
        return {"passes": self.passes, "reflexive": self.reflexive, "closed": self.closed,
                "strong": self.strong, "problems": self.problems()}


def check_extension_system(system: ExtensionSystem) -> ValidationReport:
    """Check reflexivity, closure under composition, and strong-embedding laws."""
    report = ValidationReport()
    sig = system.signature
    for e in system.edges:
        why = strong_embedding_failure(system.node(e.source), system.node(e.target),
                                       e.images, sig)
        if why:
            report.bad_edges.append((e.index, why))
    keys = system.edge_keys
    for s in system.nodes:
        if (s.id, s.id, s.universe) not in keys:
            report.missing_identities.append(s.id)
    for e in system.edges:
        for f in system.edges_from(e.target):
            if (e.source, f.target, system.compose(e, f)) not in keys:
                report.missing_composites.append((e.index, f.index))
    return report


@dataclass
class CofinalityReport:
    holds: bool
    witnesses: dict[str, Embedding]
    missing: list[str]

    def to_json(self) -> dict:
        return {"holds": self.holds, "missing": self.missing,
                "witnesses": {k: [e.source, e.target, list(e.images)]
                              for k, e in self.witnesses.items()}}


def mutually_cofinal(s: ExtensionSystem, t: ExtensionSystem) -> CofinalityReport:
    """Every node of each system embeds into some node of the other."""
    if s.signature != t.signature:
        raise SignatureError("systems have different signatures")
    sig = s.signature
    witnesses: dict[str, Embedding] = {}
    missing: list[str] = []
    for here, there, tag in ((s, t, "s"), (t, s, "t")):
        for a in here.nodes:
            for b in there.nodes:
                embs = compute_embeddings(a, b, sig)
                if embs:
                    witnesses[f"{tag}:{a.id}"] = embs[0]
                    break
            else:
                missing.append(f"{tag}:{a.id}")
    return CofinalityReport(not missing, witnesses, missing)


# -- chain probe -------------------------------------------------------------

EXHAUSTIVE_LIMIT = 10_000


@dataclass
class ChainResult:
    edges: list[int]
    bound: str | None
    bound_edges: list[int] | None

    def to_json(self) -> dict:
        return {"edges": self.edges, "bound": self.bound, "bound_edges": self.bound_edges}


@dataclass
class ChainProbeReport:
    chains: list[ChainResult]
    exhaustive: bool
    kappa: int | None

    @property
    def directed(self) -> bool:
        return all(c.bound is not None for c in self.chains)

    @property
    def verdict(self) -> str:
        return "directed" if self.directed else "not directed"

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "exhaustive": self.exhaustive, "kappa": self.kappa,
                "chains": [c.to_json() for c in self.chains]}


def _chain_edges(system: ExtensionSystem, kappa: int | None) -> dict[str, list[Embedding]]:
    out = {}
    for s in system.nodes:
        out[s.id] = [e for e in system.edges_from(s.id)
                     if e.source != e.target and (kappa is None or e.size is None
                                                  or e.size <= kappa)]
    return out


def _count_paths(step: dict[str, list[Embedding]], length: int) -> int:
    # ways[n] = number of paths of exactly k edges starting at n
    ways = {n: 1 for n in step}
    total = 0
    for _ in range(length):
        ways = {n: sum(ways[e.target] for e in step[n]) for n in step}
        total += sum(ways.values())
    return total


def _all_paths(step, length):
    frontier = [[e] for lst in step.values() for e in lst]
    while frontier:
        nxt = []
        for path in frontier:
            yield path
            if len(path) < length:
                nxt.extend(path + [e] for e in step[path[-1].target])
        frontier = nxt


def _upper_bound(system: ExtensionSystem, chain: list[Embedding]):
    """Find a node B with edges g_i from every chain node that commute with the chain."""
    keys = system.edge_keys
    nodes = [chain[0].source] + [e.target for e in chain]
    for b in system.nodes:
        for last in system.edges_between(nodes[-1], b.id):
            gs = [last]
            ok = True
            for e in reversed(chain):
                images = system.compose(e, gs[0])
                g = keys.get((e.source, b.id, images))
                if g is None:
                    ok = False
                    break
                gs.insert(0, g)
            if ok:
                return b.id, [g.index for g in gs]
    return None, None


def sigma_closed_probe(system: ExtensionSystem, chain_length: int, sample_count: int,
                       seed: int, kappa: int | None = None) -> ChainProbeReport:
    """Check that chains of non-identity edges have a common compatible extension.

    Paths of 1..``chain_length`` edges are enumerated exhaustively when there
    are at most 10^4 of them; otherwise ``sample_count`` random walks are
    drawn with ``seed``.  Edges labelled with a size above ``kappa`` are
    excluded from chains.
    """
    step = _chain_edges(system, kappa)
    exhaustive = _count_paths(step, chain_length) <= EXHAUSTIVE_LIMIT
    if exhaustive:
        paths = list(_all_paths(step, chain_length))
    else:
        rng = random.Random(seed)
        starts = [e for lst in step.values() for e in lst]
        paths = []
        for _ in range(sample_count):
            path = [rng.choice(starts)]
            while len(path) < chain_length and step[path[-1].target]:
                path.append(rng.choice(step[path[-1].target]))
            paths.append(path)
    results = []
    for path in paths:
        bound, gs = _upper_bound(system, path)
        results.append(ChainResult([e.index for e in path], bound, gs))
    return ChainProbeReport(results, exhaustive, kappa)


def check_model_complete(system: ExtensionSystem, budget: int):
    """Whether every edge is budget-elementary; counterexamples are (edge, sentence)."""
    from .forcing import elementarity_counterexamples
    cex = []
    for e in system.edges:
        cex.extend((e.index, s) for s in elementarity_counterexamples(system, e, budget))
    return not cex, cex
