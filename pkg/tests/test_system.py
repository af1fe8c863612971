import itertools
import json

import pytest

from infforce.errors import ClassValidationError, SignatureError, UnknownNode
from infforce.fixtures import auto, corpus, graph, linear_order
from infforce.logic import Signature, Structure, render
from infforce.system import (
    build_system, check_extension_system, check_model_complete, compute_embeddings,
    load_class, mutually_cofinal, sigma_closed_probe,
)
from oracles import brute_embeddings

LT = {"relations": [{"name": "<", "arity": 2}], "constants": []}
G = {"relations": [{"name": "G", "arity": 2}], "constants": []}


def los(*sizes):
    return load_class(auto(LT, [linear_order(n) for n in sizes]))


def test_embeddings_match_brute_force(systems):
    for name, system in systems.items():
        sig = system.signature
        for a, b in itertools.product(system.nodes, repeat=2):
            got = sorted(e.images for e in compute_embeddings(a, b, sig))
            assert got == brute_embeddings(a, b, sig), (name, a.id, b.id)


def test_small_embedding_counts(lo12):
    l1, l2 = lo12.node("L1"), lo12.node("L2")
    assert [e.images for e in compute_embeddings(l1, l2, lo12.signature)] == [("0",), ("1",)]
    assert compute_embeddings(l2, l1, lo12.signature) == []
    assert ("0",) in [e.images for e in compute_embeddings(l1, l1, lo12.signature)]


def test_auto_mode_edge_count(lo12):
    # identities plus one L1 -> L2 edge per element of L2
    assert len(lo12.edges) == 1 + 1 + 2


def test_every_fixture_validates(systems):
    for name, system in systems.items():
        assert check_extension_system(system).passes, name


def test_missing_identity_rejected():
    doc = corpus()["chain"]
    doc["extensions"] = [e for e in doc["extensions"] if not (e["from"] == e["to"] == "M1")]
    with pytest.raises(ClassValidationError, match="identity"):
        load_class(doc)


def test_missing_composite_rejected():
    doc = corpus()["chain"]
    doc["extensions"] = [e for e in doc["extensions"] if (e["from"], e["to"]) != ("M0", "M2")]
    with pytest.raises(ClassValidationError, match="composite"):
        load_class(doc)
    report = check_extension_system(load_class(doc, strict=False))
    assert not report.closed and report.reflexive


def test_duplicate_node_rejected():
    doc = auto(LT, [linear_order(1), linear_order(1)])
    with pytest.raises(ClassValidationError, match="duplicate"):
        load_class(doc)


def test_non_embedding_edge_rejected():
    doc = corpus()["chain"]
    doc["extensions"].append({"from": "M1", "to": "M2", "map": {"0": 1, "1": 0}})
    with pytest.raises(ClassValidationError):
        load_class(doc)


def test_schema_errors_are_reported():
    with pytest.raises(ClassValidationError, match="schema"):
        load_class({"signature": LT, "structures": "nope", "extensions": "auto"})
    with pytest.raises(ClassValidationError):
        load_class("{\"signature\": 3}")


def test_single_node_system():
    s = los(3)
    assert check_extension_system(s).passes
    assert [e.images for e in s.edges] == [("0", "1", "2")]


def test_unknown_node(lo12):
    with pytest.raises(UnknownNode):
        lo12.node("L7")


def test_json_round_trip(systems):
    for name, system in systems.items():
        again = load_class(json.dumps(system.to_json()))
        assert [s.id for s in again.nodes] == [s.id for s in system.nodes]
        assert {e.key() for e in again.edges} == {e.key() for e in system.edges}, name


class TestCofinality:
    def test_orders(self):
        assert mutually_cofinal(los(1, 2), los(2)).holds

    def test_larger_order_has_no_home(self):
        rep = mutually_cofinal(los(1, 2), los(2, 3))
        assert not rep.holds and rep.missing == ["t:L3"]
        assert rep.witnesses["s:L1"].target == "L2"

    def test_antichain_does_not_reach_an_order(self):
        s = load_class(auto(LT, [{"id": "D2", "universe": [0, 1], "relations": {"<": []}}]))
        rep = mutually_cofinal(s, los(2))
        assert not rep.holds and rep.missing == ["s:D2", "t:L2"]

    def test_reflexive(self, systems):
        for system in systems.values():
            assert mutually_cofinal(system, system).holds

    def test_signature_mismatch(self, lo12):
        with pytest.raises(SignatureError):
            mutually_cofinal(lo12, load_class(auto(G, [graph("G1", 1, [])])))


class TestModelComplete:
    def test_orders_fail(self, lo3):
        ok, cex = check_model_complete(lo3, 7)
        assert not ok
        edge = lo3.edges[cex[0][0]]
        assert (edge.source, edge.target) == ("L1", "L2")
        assert "E x0. E x1. x0 < x1" in [render(f) for i, f in cex
                                         if lo3.edges[i].target == "L2"]

    def test_single_node_holds(self):
        assert check_model_complete(los(3), 9) == (True, [])

    def test_no_edges_vacuous(self):
        sig = Signature.from_spec("<:2")
        s = build_system(sig, [], "auto")
        assert check_model_complete(s, 5) == (True, [])


class TestProbe:
    def test_single_node(self):
        rep = sigma_closed_probe(los(2), 3, 10, seed=0)
        assert rep.directed and rep.chains == []

    def test_orders_up_to_four(self):
        rep = sigma_closed_probe(los(1, 2, 3, 4), 3, 50, seed=1)
        assert rep.exhaustive and rep.directed
        assert {c.bound for c in rep.chains} <= {"L2", "L3", "L4"}
        assert any(c.bound == "L4" for c in rep.chains)

    def test_fork_chains_are_bounded(self, systems):
        # the two maximal nodes never form a chain together
        assert sigma_closed_probe(systems["fork"], 3, 10, seed=0).directed

    def test_bounds_commute(self, systems):
        s = systems["diamond"]
        for c in sigma_closed_probe(s, 3, 10, seed=0).chains:
            edges = [s.edges[i] for i in c.edges]
            gs = [s.edges[i] for i in c.bound_edges]
            for e, g_src, g_tgt in zip(edges, gs, gs[1:]):
                assert s.compose(e, g_tgt) == g_src.images

    def test_kappa_excludes_large_edges(self, systems):
        rep = sigma_closed_probe(systems["diamond"], 2, 10, seed=0, kappa=1)
        used = {i for c in rep.chains for i in c.edges}
        assert all((systems["diamond"].edges[i].size or 0) <= 1 for i in used)

    def test_sampling_is_seeded(self, systems, monkeypatch):
        monkeypatch.setattr("infforce.system.EXHAUSTIVE_LIMIT", 5)
        s = systems["graphs3"]
        a = sigma_closed_probe(s, 6, 20, seed=5)
        assert not a.exhaustive
        assert len(a.chains) == 20 and a.directed
        assert a.to_json() == sigma_closed_probe(s, 6, 20, seed=5).to_json()

    def test_unbounded_chain_detected(self):
        # M0 -> M1 -> M2 with the composite left out: nothing commutes above it
        doc = corpus()["chain"]
        doc["extensions"] = [e for e in doc["extensions"] if (e["from"], e["to"]) != ("M0", "M2")]
        rep = sigma_closed_probe(load_class(doc, strict=False), 2, 10, seed=0)
        assert rep.verdict == "not directed"
        assert [c.edges for c in rep.chains if c.bound is None] == [[3, 4]]


def test_structure_validation():
    sig = Signature.from_spec("<:2")
    with pytest.raises(ClassValidationError):
        Structure.build("X", [0], {"<": [(0, 5)]}, sig=sig).validate(sig)
