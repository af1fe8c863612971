"""Small extension systems used as the test corpus and as CLI examples.

Every document here is plain JSON in the class-file format; ``write_corpus``
dumps them into a directory (the repository ships them under ``classes/``).
"""

from __future__ import annotations

import itertools
import json
from pathlib import Path


def _sig(relations, constants=()):
    return {"relations": [{"name": n, "arity": a} for n, a in relations],
            "constants": list(constants)}


def _s(id, universe, relations=None, constants=None):
    out = {"id": id, "universe": [str(x) for x in universe],
           "relations": {k: [[str(x) for x in t] for t in v] for k, v in (relations or {}).items()}}
    if constants:
        out["constants"] = {k: str(v) for k, v in constants.items()}
    return out


def linear_order(n: int, name: str = "<", id: str | None = None) -> dict:
    return _s(id or f"L{n}", range(n), {name: [(i, j) for i in range(n) for j in range(i + 1, n)]})


def graph(id: str, n: int, edges, name: str = "G") -> dict:
    """Undirected loopless graph on ``0..n-1``."""
    sym = sorted({(a, b) for a, b in edges} | {(b, a) for a, b in edges})
    return _s(id, range(n), {name: sym})


def complete_graph(n: int) -> dict:
    return graph(f"K{n}", n, itertools.combinations(range(n), 2))


def directed_path(n: int) -> dict:
    return _s(f"D{n}", range(n), {"S": [(i, i + 1) for i in range(n - 1)]})


def auto(sig, structures) -> dict:
    return {"signature": sig, "structures": structures, "extensions": "auto"}


def _identity(s, size=None):
    e = {"from": s["id"], "to": s["id"], "map": {x: x for x in s["universe"]}}
    if size is not None:
        e["size"] = size
    return e


def _edge(a, b, pairs, forcing=None, size=None):
    e = {"from": a, "to": b, "map": {str(k): str(v) for k, v in pairs.items()}}
    if forcing:
        e["forcing"] = forcing
    if size is not None:
        e["size"] = size
    return e


def diamond_multiverse() -> dict:
    """A ground model with two incompatible one-step extensions and a common top."""
    sig = _sig([("P", 1), ("Q", 1)])
    m = _s("M", ["0"])
    a = _s("A", ["0", "1"], {"P": [("1",)]})
    b = _s("B", ["0", "2"], {"Q": [("2",)]})
    t = _s("T", ["0", "1", "2"], {"P": [("1",)], "Q": [("2",)]})
    edges = [_identity(x, 1) for x in (m, a, b, t)] + [
        _edge("M", "A", {0: 0}, "AddP", 1),
        _edge("M", "B", {0: 0}, "AddQ", 2),
        _edge("A", "T", {0: 0, 1: 1}, "AddQ", 2),
        _edge("B", "T", {0: 0, 2: 2}, "AddP", 1),
        _edge("M", "T", {0: 0}, "AddPQ", 3),
    ]
    return {"signature": sig, "structures": [m, a, b, t], "extensions": edges}


def fork_multiverse() -> dict:
    """Two maximal nodes over a common minimum; no common extension."""
    doc = diamond_multiverse()
    doc["structures"] = doc["structures"][:3]
    doc["extensions"] = [e for e in doc["extensions"] if "T" not in (e["from"], e["to"])]
    return doc


def chain_multiverse() -> dict:
    """Explicit chain M0 -> M1 -> M2 with size labels growing along the chain."""
    sig = _sig([("<", 2)])
    nodes = [linear_order(n, id=f"M{n - 1}") for n in (1, 2, 3)]
    edges = [_identity(s, 1) for s in nodes] + [
        _edge("M0", "M1", {0: 0}, "C", 1),
        _edge("M1", "M2", {0: 0, 1: 1}, "C", 2),
        _edge("M0", "M2", {0: 0}, "C*C", 3),
    ]
    return {"signature": sig, "structures": nodes, "extensions": edges}


def corpus() -> dict[str, dict]:
    """The fixture corpus, keyed by file stem.  Each entry is a class document."""
    lt = _sig([("<", 2)])
    e = _sig([("G", 2)])
    c = {}
    c["lo12"] = auto(lt, [linear_order(n) for n in (1, 2)])
    c["lo3"] = auto(lt, [linear_order(n) for n in (1, 2, 3)])
    c["lo4"] = auto(lt, [linear_order(n) for n in (1, 2, 3, 4)])
    c["lo23"] = auto(lt, [linear_order(n) for n in (2, 3)])
    c["lo13"] = auto(lt, [linear_order(n) for n in (1, 3)])
    c["lo3only"] = auto(lt, [linear_order(3)])
    c["lo24"] = auto(lt, [linear_order(n) for n in (2, 4)])
    c["antichain"] = auto(e, [graph(f"A{n}", n, []) for n in (1, 2, 3, 4)])
    c["complete"] = auto(e, [complete_graph(n) for n in (1, 2, 3, 4)])
    c["graphs3"] = auto(e, [
        graph("G1", 1, []), graph("G2e", 2, []), graph("G2k", 2, [(0, 1)]),
        graph("G3e", 3, []), graph("G3p", 3, [(0, 1), (1, 2)]), complete_graph(3)])
    c["graphs4"] = auto(e, [
        graph("G2k", 2, [(0, 1)]), graph("G3p", 3, [(0, 1), (1, 2)]),
        graph("C4", 4, [(0, 1), (1, 2), (2, 3), (3, 0)]),
        graph("P4", 4, [(0, 1), (1, 2), (2, 3)])])
    c["equivalence"] = auto(_sig([("R", 2)]), [
        _s("Q1", [0], {"R": [(0, 0)]}),
        _s("Q11", [0, 1], {"R": [(0, 0), (1, 1)]}),
        _s("Q2", [0, 1], {"R": [(0, 0), (1, 1), (0, 1), (1, 0)]}),
        _s("Q21", [0, 1, 2], {"R": [(0, 0), (1, 1), (2, 2), (0, 1), (1, 0)]}),
        _s("Q111", [0, 1, 2], {"R": [(0, 0), (1, 1), (2, 2)]}),
        _s("Q3", [0, 1, 2], {"R": [(a, b) for a in range(3) for b in range(3)]})])
    c["unary"] = auto(_sig([("P", 1)]), [
        _s("U0", [0]), _s("U1", [0], {"P": [(0,)]}), _s("U01", [0, 1], {"P": [(1,)]}),
        _s("U011", [0, 1, 2], {"P": [(1,), (2,)]}), _s("U001", [0, 1, 2], {"P": [(2,)]})])
    c["paths"] = auto(_sig([("S", 2)]), [directed_path(n) for n in (1, 2, 3, 4)])
    c["posets"] = auto(lt, [
        _s("P1", [0]), _s("P2a", [0, 1]), linear_order(2, id="P2c"),
        _s("V", [0, 1, 2], {"<": [(0, 1), (0, 2)]}),
        _s("W", [0, 1, 2], {"<": [(1, 0), (2, 0)]}),
        linear_order(3, id="P3c")])
    c["pointed"] = auto(_sig([("<", 2)], ["c"]), [
        _s(f"C{n}", range(n), {"<": [(i, j) for i in range(n) for j in range(i + 1, n)]},
           {"c": 0}) for n in (1, 2, 3)])
    c["colored_lo"] = auto(_sig([("<", 2), ("P", 1)]), [
        linear_order(1, id="O1"),
        _s("O2", [0, 1], {"<": [(0, 1)], "P": [(1,)]}),
        _s("O2b", [0, 1], {"<": [(0, 1)], "P": [(0,)]}),
        _s("O3", [0, 1, 2], {"<": [(0, 1), (0, 2), (1, 2)], "P": [(0,), (2,)]})])
    c["tournaments"] = auto(_sig([("T", 2)]), [
        _s("T1", [0]), _s("T2", [0, 1], {"T": [(0, 1)]}),
        _s("T3t", [0, 1, 2], {"T": [(0, 1), (0, 2), (1, 2)]}),
        _s("T3c", [0, 1, 2], {"T": [(0, 1), (1, 2), (2, 0)]})])
    c["two_rel"] = auto(_sig([("H", 2), ("F", 2)]), [
        _s("B1", [0]), _s("B2", [0, 1], {"H": [(0, 1), (1, 0)]}),
        _s("B2f", [0, 1], {"F": [(0, 1)]}),
        _s("B3", [0, 1, 2], {"H": [(0, 1), (1, 0)], "F": [(0, 2)]})])
    c["cycles"] = auto(_sig([("S", 2)]), [
        _s("Z1", [0], {"S": [(0, 0)]}), _s("Z2", [0, 1], {"S": [(0, 1), (1, 0)]}),
        _s("Z3", [0, 1, 2], {"S": [(0, 1), (1, 2), (2, 0)]})])
    c["diamond"] = diamond_multiverse()
    c["fork"] = fork_multiverse()
    c["chain"] = chain_multiverse()
    return c


def write_corpus(directory: str | Path) -> list[Path]:
    out = []
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for name, doc in corpus().items():
        path = directory / f"{name}.json"
        path.write_text(json.dumps(doc, indent=1) + "\n")
        out.append(path)
    return out
