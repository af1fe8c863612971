import itertools
import json
import random

import pytest

from infforce import cohen
from infforce.cohen import (
    Decide, ExplicitList, Pattern, ProductCondition, amalgamate, build_generic_real,
    build_mutual_tower, extend_to_meet, flat_extends, from_single, iterate_amalgamation,
    pairing, parse_families, to_single, unpairing, verify_amalgamation,
)
from infforce.errors import DepthExhausted, ParseError, PreconditionViolated
from oracles import pair_by_walk

MIXED = "decide:0,0;pattern:1,11@0"


class TestSingleConditions:
    def test_decide_zero_fills(self):
        assert extend_to_meet("01", Decide(4)) == "01000"

    def test_pattern_least_start(self):
        # "0" then the word as early as it fits from position 3
        assert extend_to_meet("0", Pattern("11", 3)) == "00011"

    def test_pattern_respects_existing_bits(self):
        assert extend_to_meet("0001", Pattern("11", 2)) == "00011"
        assert extend_to_meet("00010", Pattern("11", 2)) == "0001011"

    def test_member_unchanged(self):
        assert extend_to_meet("0110", Pattern("11", 1)) == "0110"
        assert extend_to_meet("0110", Decide(2)) == "0110"

    def test_generic_reals(self):
        assert build_generic_real([Decide(i) for i in range(8)], 8).bits == "00000000"
        assert build_generic_real([Pattern("1", 0)], 4).bits == "1000"
        assert build_generic_real([], 3).bits == "000"

    def test_real_replays(self):
        fams = parse_families("decide:5;pattern:101@2;pattern:11@0")
        real = build_generic_real(fams, 16)
        assert real.replay(fams)
        assert all(f.witness(real.bits) is not None for f in fams)

    def test_depth_exhausted(self):
        with pytest.raises(DepthExhausted):
            build_generic_real([Decide(9)], 4)

    def test_explicit_list(self, tmp_path):
        path = tmp_path / "l.json"
        path.write_text(json.dumps(["0", "10", "11"]))
        fam = cohen.parse_family(f"list:{path}")
        assert extend_to_meet("1", fam) == "10"
        assert extend_to_meet("011", fam) == "011"
        path.write_text(json.dumps(["00", "11"]))
        with pytest.raises(PreconditionViolated):
            cohen.parse_family(f"list:{path}")

    def test_bad_spec(self):
        with pytest.raises(ParseError):
            cohen.parse_family("decide:x")


class TestProductConditions:
    def test_rows_and_order(self):
        p = ProductCondition({(0, 2): "1", (1, 0): 0})
        assert p.row(0) == "..1" and p.row(1) == "0" and p.row(5) == ""
        q = p.with_cells({(0, 0): "0"})
        assert q.extends(p) and not p.extends(q)
        assert not p.compatible(ProductCondition({(0, 2): "0"}))

    def test_json_round_trip(self):
        p = ProductCondition({(0, 2): "1", (3, 0): "0"})
        assert ProductCondition.from_json(p.to_json()) == p


class TestTower:
    def test_two_decided_reals(self):
        tower = build_mutual_tower(2, parse_families("decide:0,0;decide:1,0"), 8, seed=3)
        assert len(tower) == 2 and all(len(r.bits) == 8 for r in tower)
        assert tower[0].bits[0] == "0" and tower[1].bits[0] == "0"

    def test_pattern_in_slice(self):
        (real,) = build_mutual_tower(1, parse_families("pattern:0,11@0"), 8, seed=0)
        assert "11" in real.bits

    def test_seeded(self):
        fams = parse_families(MIXED)
        a = [r.bits for r in build_mutual_tower(3, fams, 32, seed=9)]
        assert a == [r.bits for r in build_mutual_tower(3, fams, 32, seed=9)]
        assert a != [r.bits for r in build_mutual_tower(3, fams, 32, seed=10)]


class TestAmalgamation:
    def test_hand_example(self):
        fams = parse_families("decide:0,0;pattern:1,11@0")
        cert = amalgamate(["00000000"], fams, 8, seed=0)
        assert cert.diffs == {0: []}
        assert "11" in cert.d[1]
        assert fams[1].witness(cert.stages[1].p) is not None
        assert verify_amalgamation(cert).ok

    def test_no_inputs(self):
        fams = parse_families("decide:0,3;pattern:1,11@0")
        cert = amalgamate([], fams, 8, seed=0)
        assert verify_amalgamation(cert).ok and cert.diffs == {}

    def test_tower_round_trip(self):
        fams = parse_families("decide:0,1;pattern:1,10@2;decide:2,0;pattern:0,11@1")
        tower = build_mutual_tower(2, fams, 16, seed=4)
        cert = amalgamate(tower, fams, 16, seed=4)
        again = cohen.AmalgamationCertificate.from_json(json.loads(json.dumps(cert.to_json())))
        assert verify_amalgamation(again).ok
        assert again.to_json() == cert.to_json()

    def test_fresh_policy(self):
        rng = random.Random(0)
        for _ in range(20):
            k = rng.randint(1, 3)
            fams = [Decide(rng.randrange(8), rng.randrange(k + 2)) for _ in range(5)]
            tower = build_mutual_tower(k, fams, 16, rng.randrange(100))
            cert = amalgamate(tower, fams, 16, rng.randrange(100), policy="fresh")
            assert verify_amalgamation(cert).ok

    def test_rejects_non_generic_inputs(self):
        with pytest.raises(PreconditionViolated):
            amalgamate(["1" * 8], parse_families("decide:0,0;pattern:0,00@0"), 8, seed=0)

    def _cert(self):
        fams = parse_families(MIXED)
        return amalgamate(build_mutual_tower(2, fams, 16, seed=1), fams, 16, seed=1)

    def test_flipped_bit_detected(self):
        cert = self._cert()
        stage = next(s for s in cert.stages if s.p.cells)
        (n, i), b = min(stage.p.cells.items())
        row = cert.d[n]
        cert.d[n] = row[:i] + ("1" if b == "0" else "0") + row[i + 1:]
        res = verify_amalgamation(cert)
        assert not res.ok and f"p_{stage.n}" in res.failure

    def test_understated_diff_detected(self):
        cert = self._cert()
        assert cert.diffs[0] == []
        fixed = {i for s in cert.stages for (n, i) in s.p.cells if n == 0}
        i = min(set(range(cert.depth)) - fixed)
        row = cert.d[0]
        cert.d[0] = row[:i] + ("1" if row[i] == "0" else "0") + row[i + 1:]
        res = verify_amalgamation(cert)
        assert not res.ok and "diff_0" in res.failure

    def test_wrong_family_detected(self):
        cert = self._cert()
        res = verify_amalgamation(cert, parse_families("pattern:1,111111@0;decide:0,0"))
        assert not res.ok

    def test_iterated(self):
        certs = iterate_amalgamation(4, parse_families(MIXED + ";decide:3,2"), 64, seed=2)
        assert [c.k for c in certs] == [1, 2, 3, 4]


class TestPairing:
    def test_matches_diagonal_walk(self):
        for (n, i), z in pair_by_walk(5000).items():
            assert pairing(n, i) == z
            assert unpairing(z) == (n, i)

    def test_order_isomorphism_exhaustive(self):
        cells = [(0, 0), (0, 1), (1, 0)]
        conds = []
        for vals in itertools.product([None, "0", "1"], repeat=len(cells)):
            conds.append(ProductCondition({c: v for c, v in zip(cells, vals) if v}))
        for p, q in itertools.product(conds, repeat=2):
            assert q.extends(p) == flat_extends(to_single(q), to_single(p))
            assert from_single(to_single(p)) == p


def test_explicit_product_list():
    a = ProductCondition({(0, 0): "0"})
    b = ProductCondition({(0, 0): "1", (1, 0): "1"})
    c = ProductCondition({(0, 0): "1", (1, 0): "0"})
    fam = ExplicitList((a, b, c), product_kind=True)
    fam.check_dense(4)
    assert fam.meet(ProductCondition({(1, 0): "1"})).extends(b) or \
        fam.meet(ProductCondition({(1, 0): "1"})).extends(a)
