import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypme.errors import BudgetError, ParseError
from hypme.groups import (
    ball,
    bfs_growth_table,
    entropy_estimate,
    parse_group,
)


class TestParseGroup:
    def test_free_group(self):
        g = parse_group("F2")
        assert g.num_generators == 2
        assert len(g.symmetric_generators()) == 4

    def test_free_abelian(self):
        g = parse_group("Z^2")
        w = g.parse_word("abA")
        assert w == (0, 1)
        assert g.word_length(g.parse_word("aab")) == 3

    def test_cyclic(self):
        g = parse_group("C4")
        assert g.word_length(g.parse_word("aaa")) == 1
        assert g.to_word(g.parse_word("aaa")) == "A"

    def test_products(self):
        fp = parse_group("C2*C3")
        dp = parse_group("F2xC2")
        assert fp.num_generators == 2 and dp.num_generators == 3
        assert dp.describe(dp.parse_word("ac")) == "(a,a)"

    def test_precedence_star_over_x(self):
        g = parse_group("C2*C2xZ")
        # (C2*C2) x Z: infinite dihedral times Z has polynomial growth
        assert g.growth_class() == ("polynomial", 2)

    def test_errors(self):
        for bad in ("", "F0", "C1", "Q3", "F2*", "Z^0"):
            with pytest.raises(ParseError):
                parse_group(bad)

    def test_letter_cap(self):
        with pytest.raises(ParseError):
            parse_group("F27")


class TestNormalForms:
    @pytest.mark.parametrize("spec", ["F2", "Z^2", "C2*C3"])
    def test_multiplication_agrees_with_letter_folding(self, spec):
        g = parse_group(spec)
        letters = [lab for lab, _ in g.symmetric_generators()]
        words = [""]
        for _ in range(4):
            words += [w + ch for w in words[-len(letters) ** 3 :] for ch in letters]
        words = sorted(set(words))[:400]
        parsed = {w: g.parse_word(w) for w in words}
        for u, v in itertools.product(words[:80], words[:80]):
            assert g.multiply(parsed[u], parsed[v]) == g.parse_word(u + v)

    @pytest.mark.parametrize("spec", ["F2", "Z^2", "C2*C3", "F2xC2"])
    @settings(max_examples=60, deadline=None)
    @given(data=st.data())
    def test_group_axioms_on_random_words(self, spec, data):
        g = parse_group(spec)
        letters = [lab for lab, _ in g.symmetric_generators()]
        mk = lambda: g.parse_word(
            "".join(data.draw(st.sampled_from(letters)) for _ in range(data.draw(st.integers(0, 8))))
        )
        x, y, z = mk(), mk(), mk()
        assert g.multiply(g.multiply(x, y), z) == g.multiply(x, g.multiply(y, z))
        assert g.multiply(x, g.inverse(x)) == g.identity()
        assert g.word_length(g.inverse(x)) == g.word_length(x)

    @pytest.mark.parametrize("spec", ["F2", "Z^2", "C2*C3"])
    def test_word_round_trip(self, spec):
        g = parse_group(spec)
        letters = [lab for lab, _ in g.symmetric_generators()]
        rng = random.Random(4)
        for _ in range(50):
            w = "".join(rng.choice(letters) for _ in range(rng.randrange(0, 10)))
            e = g.parse_word(w)
            assert g.parse_word(g.to_word(e)) == e


class TestBalls:
    def test_f2_growth(self):
        b = ball(parse_group("F2"), 2)
        assert list(b.growth.values) == [1, 5, 17]
        g = parse_group("F2")
        assert all(g.volume(n) == 2 * 3**n - 1 for n in range(8))

    def test_z2_growth(self):
        b = ball(parse_group("Z^2"), 3)
        assert list(b.growth.values) == [1, 5, 13, 25]
        g = parse_group("Z^2")
        assert all(g.volume(n) == 2 * n * n + 2 * n + 1 for n in range(8))

    def test_c3_saturates(self):
        t = bfs_growth_table(parse_group("C3"), 5)
        assert list(t.values) == [1, 3, 3, 3, 3, 3]

    @pytest.mark.parametrize("spec", ["F2", "Z^2", "C2*C3", "F2xC2", "C2*C2"])
    def test_bfs_matches_closed_form(self, spec):
        g = parse_group(spec)
        t = bfs_growth_table(g, 6)
        assert list(t.values) == [g.volume(n) for n in range(7)]

    @pytest.mark.parametrize("spec", ["F2", "Z^2", "C2*C3", "F2xC2"])
    def test_word_length_equals_bfs_depth(self, spec):
        g = parse_group(spec)
        b = ball(g, 5)
        for elem, depth in zip(b.elements, b.word_lengths):
            assert g.word_length(elem) == depth

    @pytest.mark.parametrize("spec", ["F2", "Z^2", "C2*C3"])
    def test_interior_degree_is_generator_count(self, spec):
        g = parse_group(spec)
        b = ball(g, 4)
        adj = b.graph.adjacency()
        k = len(g.symmetric_generators())
        for i, depth in enumerate(b.word_lengths):
            if depth <= 3:
                assert len(adj[i]) == k

    @pytest.mark.parametrize("spec", ["F2", "Z^2", "C2*C3", "F2xC2"])
    def test_growth_submultiplicative(self, spec):
        g = parse_group(spec)
        vols = [g.volume(n) for n in range(11)]
        for m in range(11):
            for n in range(11 - m):
                assert vols[m + n] <= vols[m] * vols[n]

    def test_budget_names_radius(self):
        with pytest.raises(BudgetError, match="radius 3"):
            bfs_growth_table(parse_group("F2"), 8, max_elements=40)

    def test_ball_deterministic(self):
        b1 = ball(parse_group("C2*C3"), 5)
        b2 = ball(parse_group("C2*C3"), 5)
        assert b1.elements == b2.elements
        assert b1.graph.edges == b2.graph.edges


class TestEntropy:
    def test_f2_estimates(self):
        g = parse_group("F2")
        est = entropy_estimate(g.growth_table(12))
        assert est.declared is not None and est.declared.log_arg == 3
        assert abs(est.ratio_estimates[-1] - math.log(3)) < 0.02
        assert est.lower <= Fraction(109862, 100000)
        assert est.lower > Fraction(109860, 100000)

    def test_z2_declared_zero(self):
        est = entropy_estimate(parse_group("Z^2").growth_table(10))
        assert est.declared.is_zero()
        assert est.lower == 0
        assert est.point_estimates[-1] < 0.6

    def test_c3_zero(self):
        est = entropy_estimate(parse_group("C3").growth_table(6))
        assert est.declared.is_zero()
        assert est.ratio_estimates[-1] == 0

    def test_free_product_has_no_declared_value(self):
        est = entropy_estimate(parse_group("C2*C3").growth_table(8))
        assert est.declared is None
        assert est.lower == 0  # no positive certificate from finite data

    def test_lower_below_declared(self):
        for spec in ("F2", "F3", "Z^2"):
            g = parse_group(spec)
            est = entropy_estimate(g.growth_table(8))
            if est.declared is not None and not est.declared.is_zero():
                assert est.lower <= est.declared.upper()


class TestGrowthClasses:
    def test_families(self):
        assert parse_group("F2").growth_class() == ("exponential", parse_group("F2").growth_class()[1])
        assert parse_group("F2").growth_class()[1].log_arg == 3
        assert parse_group("Z^3").growth_class() == ("polynomial", 3)
        assert parse_group("C6").growth_class() == ("bounded", 6)
        assert parse_group("C2*C2").growth_class() == ("polynomial", 1)
        assert parse_group("C2*C3").growth_class() == ("exponential", None)
        assert parse_group("Z^2xC3").growth_class() == ("polynomial", 2)
        cls, ent = parse_group("F2xZ^2").growth_class()
        assert cls == "exponential" and ent.log_arg == 3
