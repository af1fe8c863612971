import random

import pytest
from hypothesis import given, settings, strategies as st

from infforce.errors import ArityMismatch, FreeVariableError, ParseError, UndeclaredSymbol
from infforce.logic import (
    And, Atom, Const, Eq, Exists, Not, Param, Signature, Structure, Var, classify,
    enumerate_sentences, enumerate_templates, instantiate, normalize, parse_formula,
    render, satisfies, size, transport,
)
from oracles import prenex_class, random_formula

LT = Signature.from_spec("<:2")
RICH = Signature.from_spec("<:2,R:2,P:1,c:0")


def lo(n):
    return Structure.build(f"L{n}", range(n), {"<": [(i, j) for i in range(n) for j in range(i + 1, n)]},
                           sig=LT)


class TestParser:
    def test_nested_exists(self):
        x, y = Var("x"), Var("y")
        assert parse_formula("E x. E y. x < y", LT) == Exists("x", Exists("y", Atom("<", (x, y))))

    def test_forall_is_sugar(self):
        sig = Signature.from_spec("R:2")
        x = Var("x")
        assert parse_formula("A x. R(x,x)", sig) == Not(Exists("x", Not(Atom("R", (x, x)))))

    def test_canonical_text_round_trips(self):
        text = "!(E x. x = #a)"
        assert render(parse_formula(text, LT)) == text

    def test_implication_expands(self):
        f = parse_formula("#a < #b -> #b < #a", LT)
        assert render(f) == "!(#a < #b) | #b < #a"

    def test_undeclared_symbol_position(self):
        with pytest.raises(UndeclaredSymbol) as info:
            parse_formula("E x. x ~ x", LT)
        assert info.value.position == 7

    def test_arity_checked(self):
        with pytest.raises(ArityMismatch):
            parse_formula("P(#a, #b)", RICH)

    @pytest.mark.parametrize("text", ["", "E x.", "(#a < #b", "#a < #b )", "E . x < x"])
    def test_malformed(self, text):
        with pytest.raises(ParseError):
            parse_formula(text, LT)

    @settings(max_examples=300, deadline=None)
    @given(st.integers(min_value=0, max_value=2**32 - 1))
    def test_round_trip_random(self, seed):
        f = random_formula(random.Random(seed), RICH, depth=5)
        assert parse_formula(render(f), RICH) == f


class TestSatisfaction:
    def test_small_orders(self):
        phi = parse_formula("E x. E y. x < y", LT)
        assert satisfies(lo(2), phi)
        assert not satisfies(lo(1), phi)

    def test_forall_exists_inequality(self):
        assert satisfies(lo(3), parse_formula("A x. E y. !(x = y)", LT))

    def test_parameters_and_constants(self):
        s = Structure.build("S", range(3), {"<": [(0, 1)], "R": [], "P": [(2,)]}, {"c": 2},
                            sig=RICH)
        assert satisfies(s, parse_formula("P(c) & #0 < #1", RICH))
        assert not satisfies(s, parse_formula("E x. x < c", RICH))


class TestClassify:
    @pytest.mark.parametrize("text, cls", [
        ("E x. P(x)", "Sigma1"),
        ("A x. E y. x < y", "Pi2"),
        ("#a < #b", "Delta0"),
        ("(E x. P(x)) & (A y. P(y))", "Pi2"),
        ("A x. E y. A z. x < z", "Other"),
        ("!(A x. P(x))", "Sigma1"),
    ])
    def test_examples(self, text, cls):
        assert str(classify(parse_formula(text, RICH))) == cls

    def test_open_formula_rejected(self):
        with pytest.raises(FreeVariableError):
            classify(Atom("<", (Var("x"), Var("y"))))

    def test_agrees_with_prenex_oracle(self):
        rng = random.Random(11)
        for _ in range(400):
            f = random_formula(rng, RICH, depth=6, closed=True)
            assert str(classify(f)) == prenex_class(f), render(f)


class TestEnumeration:
    def test_budget_zero_is_empty(self):
        assert enumerate_sentences(LT, (), 0) == []

    def test_small_budget(self):
        # atoms cost one node per symbol occurrence, so a quantified atom needs 4
        assert enumerate_sentences(LT, (), 3) == []
        first = enumerate_sentences(LT, (), 4)
        assert [render(f) for f in first] == ["E x0. x0 < x0", "E x0. x0 = x0"]

    def test_deterministic_and_sized(self):
        a = enumerate_sentences(LT, ("0", "1"), 6)
        assert a == enumerate_sentences(LT, ("0", "1"), 6)
        assert len(set(a)) == len(a)
        assert all(size(f) <= 6 for f in a)

    def test_templates_cover_sentences_once(self):
        elems = ("0", "1", "2")
        direct = set(enumerate_sentences(LT, elems, 6))
        via = []
        import itertools
        for t, j in enumerate_templates(LT, 3, 6):
            for tup in itertools.permutations(elems, j):
                via.append(instantiate(t, tup))
        assert len(via) == len(set(via))
        assert set(via) == direct

    def test_normalize_inverts_instantiate(self):
        f = parse_formula("E y. #b < y & !(#a = #b)", LT)
        t, params = normalize(f)
        assert params == ("b", "a")
        assert normalize(instantiate(t, params))[0] == t


def test_transport_renames_parameters():
    f = And(Eq(Param("0"), Const("c")), Atom("<", (Param("0"), Param("1"))))
    g = transport(f, {"0": "5", "1": "6"})
    assert render(g) == "#5 = c & #5 < #6"
