"""Acceptance checks, one test per criterion.

Each test prints a single ``criterion N: PASS|FAIL ...`` line.  Run the file
directly (``python3 tests/test_acceptance.py``) for the summary alone.
"""

from __future__ import annotations

import itertools
import random
import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from infforce.cohen import (  # noqa: E402
    Decide, Pattern, ProductCondition, amalgamate, build_mutual_tower, flat_extends,
    from_single, iterate_amalgamation, to_single, verify_amalgamation,
)
from infforce.fixtures import corpus  # noqa: E402
from infforce.forcing import (  # noqa: E402
    build_generic, check_transfer, generic_nodes, is_generic, pool_size, reachable,
)
from infforce.logic import Signature, classify, parse_formula, render  # noqa: E402
from infforce.modal import bfa_sigma1_report, check_modal_principle, mp_violations  # noqa: E402
from infforce.suites import run_suite  # noqa: E402
from infforce.system import load_class  # noqa: E402
from oracles import prenex_class, random_formula  # noqa: E402

BUDGET = 9
_SYSTEMS: dict = {}


def corpus_systems() -> dict:
    if not _SYSTEMS:
        _SYSTEMS.update((name, load_class(doc)) for name, doc in corpus().items())
    return _SYSTEMS


def _line(n: int, ok: bool, detail: str) -> str:
    return f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"


def _suite_everywhere(name: str) -> tuple[int, list[str]]:
    checked, bad = 0, []
    for sys_name, system in corpus_systems().items():
        rep = run_suite(system, name, BUDGET)
        checked += rep.checked
        bad += [f"{sys_name}: {v}" for v in rep.violations]
    return checked, bad


# -- criteria -----------------------------------------------------------------

def criterion_1():
    systems = corpus_systems()
    shape_ok = len(systems) >= 20 and all(
        len(s.nodes) <= 6 and max(len(n.universe) for n in s.nodes) <= 4
        and 1 <= len(s.signature.relations) <= 2 for s in systems.values())
    start = time.perf_counter()
    checked, bad = _suite_everywhere("infgen")
    took = time.perf_counter() - start
    ok = shape_ok and not bad and took < 60
    return ok, (f"{len(systems)} systems, {checked} generic (node, sentence) pairs, "
                f"{len(bad)} mismatches, {took:.1f}s")


def criterion_2():
    checked, bad = _suite_everywhere("facts")
    return not bad, f"{checked} (node, sentence) pairs, {len(bad)} violations"


def _directed(system) -> bool:
    up = {s.id: set(reachable(system, s.id)) for s in system.nodes}
    return all(up[a] & up[b] for a, b in itertools.combinations(up, 2))


def criterion_3():
    runs, bad, skipped = 0, [], []
    for name, system in corpus_systems().items():
        if not _directed(system):
            skipped.append(name)
            continue
        for s in system.nodes:
            runs += 1
            path = build_generic(system, s.id, BUDGET)
            if len(path.steps) > pool_size(system, s.id, BUDGET) or \
                    not is_generic(system, path.final, BUDGET).generic:
                bad.append(f"{name}:{s.id}")
    return not bad, (f"{runs} starts reach a generic node; undirected systems skipped: "
                     f"{skipped}; failures {bad}")


def criterion_4():
    checked, bad = _suite_everywhere("geneq")
    return not bad, f"{checked} generic-to-generic edges, {len(bad)} failures"


def criterion_5():
    pairs, bad = 0, []
    for name, system in corpus_systems().items():
        for g in generic_nodes(system, BUDGET):
            if bfa_sigma1_report(system, g, BUDGET):
                bad.append(f"{name}:{g} bfa")
            for d in reachable(system, g):
                pairs += 1
                if not check_transfer(system, "pi2", g, d, BUDGET).holds:
                    bad.append(f"{name}:{g}->{d} pi2")
    return not bad, f"{pairs} (generic, descendant) pairs, failures {bad}"


def criterion_6():
    bad = []
    for name, system in corpus_systems().items():
        for g in generic_nodes(system, BUDGET):
            if not check_modal_principle(system, g, "MP", BUDGET).holds:
                bad.append(f"{name}:{g}")
    lo12 = corpus_systems()["lo12"]
    rep = check_modal_principle(lo12, "L1", "MP", BUDGET)
    target = parse_formula("E x0. E x1. x0 < x1", lo12.signature)
    witnessed = not rep.holds and target in mp_violations(lo12, "L1", BUDGET)
    return not bad and witnessed, (
        f"generic failures {bad}; lo12 L1 fails MP: {not rep.holds}, "
        f"first counterexample {render(rep.sentence) if rep.sentence else None}, "
        f"E x0. E x1. x0 < x1 among violations: {witnessed}")


def criterion_7():
    start = time.perf_counter()
    checked, bad = _suite_everywhere("oracle")
    took = time.perf_counter() - start
    return not bad, f"{checked} (node, sentence) pairs, {len(bad)} disagreements, {took:.0f}s"


def _random_families(rng: random.Random, k: int, count: int, depth: int) -> list:
    out = []
    for _ in range(count):
        n = rng.randrange(k + 2)
        if rng.random() < 0.5:
            out.append(Decide(rng.randrange(depth // 4), n))
        else:
            word = "".join(rng.choice("01") for _ in range(rng.randint(1, 3)))
            out.append(Pattern(word, rng.randrange(depth // 4), n))
    return out


def criterion_8():
    bad, worst, configs = [], 0.0, 0
    for k, K, D in itertools.product(range(1, 6), range(1, 33), (64, 256)):
        configs += 1
        rng = random.Random(f"{k}/{K}/{D}")
        fams = _random_families(rng, k, K, D)
        start = time.perf_counter()
        tower = build_mutual_tower(k, fams, D, seed=rng.randrange(1 << 30))
        cert = amalgamate(tower, fams, D, seed=rng.randrange(1 << 30))
        ok = verify_amalgamation(cert).ok
        final = cert.stages[-1].p
        for n in range(k):
            fixed = sum(1 for (m, _) in final.cells if m == n)
            ok = ok and len(cert.diffs[n]) <= fixed
        took = time.perf_counter() - start
        worst = max(worst, took)
        if not ok or took >= 10:
            bad.append((k, K, D))
    return not bad, f"{configs} (k, K, D) configurations, worst {worst:.2f}s, failures {bad}"


def criterion_9():
    towers = 0
    for seed in range(4):
        rng = random.Random(seed)
        fams = _random_families(rng, 8, 12, 512)
        certs = iterate_amalgamation(8, fams, 512, seed)
        towers += len(certs)
    # order isomorphism: every pair of conditions on a 2x3 box, then random deep ones
    cells = [(n, i) for n in range(2) for i in range(3)]
    box = [ProductCondition({c: v for c, v in zip(cells, vals) if v})
           for vals in itertools.product((None, "0", "1"), repeat=len(cells))]
    pairs = 0
    for p, q in itertools.product(box, repeat=2):
        pairs += 1
        if q.extends(p) != flat_extends(to_single(q), to_single(p)):
            return False, f"pairing breaks the order on {p} / {q}"
    rng = random.Random(64)
    for _ in range(3000):
        p = ProductCondition({(rng.randrange(8), rng.randrange(64)): rng.choice("01")
                              for _ in range(rng.randrange(12))})
        if rng.random() < 0.5:
            q = p.with_cells({(rng.randrange(8), rng.randrange(64)): rng.choice("01")
                              for _ in range(rng.randrange(4))})
        else:
            q = ProductCondition({(rng.randrange(8), rng.randrange(64)): rng.choice("01")
                                  for _ in range(rng.randrange(12))})
        pairs += 1
        if q.extends(p) != flat_extends(to_single(q), to_single(p)) or \
                from_single(to_single(q)) != q:
            return False, f"pairing breaks the order on {p} / {q}"
    return True, f"{towers} iterated amalgamations at D=512 verified; {pairs} condition pairs"


def criterion_10():
    sig = Signature.from_spec("<:2,R:2,P:1,c:0")
    rng = random.Random(1000)
    trips = agree = 0
    for _ in range(1000):
        f = random_formula(rng, sig, depth=6)
        trips += parse_formula(render(f), sig) == f
        g = random_formula(rng, sig, depth=6, closed=True)
        agree += str(classify(g)) == prenex_class(g)
    return trips == agree == 1000, f"round trips {trips}/1000, prenex agreement {agree}/1000"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


@pytest.mark.parametrize("n", range(1, 11))
def test_criterion(n, capsys):
    ok, detail = CRITERIA[n - 1]()
    with capsys.disabled():
        print("\n" + _line(n, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    results = []
    for n, check in enumerate(CRITERIA, 1):
        ok, detail = check()
        results.append(ok)
        print(_line(n, ok, detail), flush=True)
    sys.exit(0 if all(results) else 1)
