import json
from collections import deque
from fractions import Fraction

import pytest

from hypme.coupling import (
    check_actions_commute,
    check_b_identity,
    check_cocycle_identity,
    check_fundamental_domains,
    check_growth_comparison,
    check_inverse_relation,
    check_step_bound,
    claim_bound_check,
    claim_bound_sweep,
    coboundedness_witness,
    cocycle,
    coupling_from_spec,
    integrability_report,
    projection_and_similarity,
    strengthen_coboundedness,
    subgroup_coupling,
    validate_strengthened,
)
from hypme.errors import BudgetError, PreconditionError
from hypme.groups import parse_group
from hypme.integrability import exp_power, power

F2_GENS = ["aa", "b", "abA"]


@pytest.fixture(scope="module")
def f2():
    return parse_group("F2")


@pytest.fixture(scope="module")
def f2_coupling(f2):
    return subgroup_coupling(f2, F2_GENS)


@pytest.fixture(scope="module")
def z2_coupling():
    return subgroup_coupling(parse_group("Z^2"), ["aa", "b"])


def independent_word_lengths(group, gens, targets, max_radius=12):
    """BFS over `gens` written from scratch, for cross-checking lengths."""
    sym = set(gens) | {group.inverse(s) for s in gens}
    lengths = {group.identity(): 0}
    queue = deque([group.identity()])
    pending = set(targets) - {group.identity()}
    while queue and pending:
        g = queue.popleft()
        if lengths[g] >= max_radius:
            break
        for s in sym:
            h = group.multiply(g, s)
            if h not in lengths:
                lengths[h] = lengths[g] + 1
                queue.append(h)
                pending.discard(h)
    return lengths


class TestSubgroupCoupling:
    def test_f2_index_and_transversal(self, f2, f2_coupling):
        c = f2_coupling
        assert c.index == 2
        assert [f2.describe(t) for t in c.sub.transversal] == ["e", "a"]
        assert c.mu_x_gamma() == 1 and c.mu_x_lambda() == 2

    def test_index_agrees_with_parity_homomorphism(self, f2, f2_coupling):
        # the subgroup is the kernel of a |-> 1, b |-> 0 into C2: check that
        # membership matches word parity on a ball (independent of the tables)
        c = f2_coupling
        from hypme.groups import ball

        for g in ball(f2, 5).elements:
            parity = sum(1 for ch in f2.to_word(g) if ch in "aA") % 2
            assert c.sub.contains(g) == (parity == 0)

    def test_z2_coupling(self, z2_coupling):
        c = z2_coupling
        assert c.index == 2
        z2 = c.group
        assert [z2.describe(t) for t in c.sub.transversal] == ["e", "a"]

    def test_infinite_index_rejected(self, f2):
        with pytest.raises(PreconditionError, match="infinite index"):
            subgroup_coupling(f2, ["a"])

    def test_undetectable_infinite_index_hits_budget(self):
        # <a, bab^-1> in C2*C3 has infinite index but full abelian rank (0)
        g = parse_group("C2*C3")
        with pytest.raises(BudgetError):
            subgroup_coupling(g, ["a"], max_cosets=300)

    def test_from_spec_json(self):
        spec = json.dumps(
            {"group": "F2", "subgroup_generators": F2_GENS, "x_gamma": "e"}
        )
        c = coupling_from_spec(spec)
        assert c.index == 2

    def test_actions_commute(self, f2_coupling):
        rep = check_actions_commute(f2_coupling, 3, samples=150, seed=0)
        assert rep.passed


class TestCocycles:
    def test_alpha_examples(self, f2, f2_coupling):
        c = f2_coupling
        e, a = f2.identity(), f2.parse_word("a")
        assert c.alpha(a, (e, 0)) == e
        assert c.alpha(a, (a, 0)) == f2.parse_word("aa")
        assert c.alpha(e, (a, 0)) == e

    def test_alpha_of_generators_are_schreier_generators(self, f2, f2_coupling):
        c = f2_coupling
        for _, s in f2.symmetric_generators():
            for x in c.x_lambda_points():
                val = c.alpha(s, x)
                assert f2.is_identity(val) or val in c.sub.schreier_generators

    def test_beta_is_conjugation_by_base_point(self, f2):
        c = subgroup_coupling(f2, F2_GENS, x_gamma_word="a")
        lam = f2.parse_word("aa")
        g0 = f2.parse_word("a")
        gamma, k = c.beta(lam, c.x_gamma[0])
        assert k == 0
        assert gamma == f2.multiply(g0, f2.multiply(lam, f2.inverse(g0)))

    def test_cocycle_dispatch_and_domain_errors(self, f2, f2_coupling):
        c = f2_coupling
        a = f2.parse_word("a")
        assert cocycle(c, "alpha", a, (a, 0)) == f2.parse_word("aa")
        with pytest.raises(PreconditionError):
            cocycle(c, "alpha", a, (f2.parse_word("aa"), 0))  # aa not in T
        with pytest.raises(PreconditionError):
            cocycle(c, "beta", a, c.x_gamma[0])  # a is not in the subgroup
        with pytest.raises(PreconditionError):
            cocycle(c, "gamma", a, (a, 0))

    def test_cocycle_identity_f2(self, f2_coupling):
        rep = check_cocycle_identity(f2_coupling, 3)
        assert rep.cases == 53 * 53 * 2
        assert rep.passed

    def test_cocycle_identity_z2(self, z2_coupling):
        rep = check_cocycle_identity(z2_coupling, 4)
        assert rep.passed and rep.cases > 0

    def test_cocycle_identity_radius_zero_vacuous(self, f2_coupling):
        rep = check_cocycle_identity(f2_coupling, 0)
        assert rep.cases == 0 and rep.passed

    def test_inverse_relation(self, f2_coupling, z2_coupling):
        assert check_inverse_relation(f2_coupling, 4).passed
        assert check_inverse_relation(z2_coupling, 4).passed

    def test_inverse_relation_requires_inclusion(self, f2):
        c = subgroup_coupling(f2, F2_GENS, x_gamma_word="b")
        with pytest.raises(PreconditionError, match="strengthen"):
            check_inverse_relation(c, 2)

    def test_b_identity(self, f2_coupling, z2_coupling):
        assert check_b_identity(f2_coupling, 2).passed
        assert check_b_identity(z2_coupling, 3).passed

    def test_fundamental_domains(self, f2_coupling, z2_coupling):
        assert check_fundamental_domains(f2_coupling, 3).passed
        assert check_fundamental_domains(z2_coupling, 3).passed


class TestLambdaMetric:
    def test_lengths_match_independent_bfs(self, f2, f2_coupling):
        c = f2_coupling
        targets = [f2.parse_word(w) for w in ("aa", "b", "Aba", "aabb", "bb")]
        mine = c.lambda_lengths(set(targets))
        ref = independent_word_lengths(f2, list(c.sub.schreier_generators), targets)
        for t in targets:
            assert mine[t] == ref[t]

    def test_ball_sizes_free_rank_three(self, f2_coupling):
        # the index-2 subgroup of F2 is free of rank 3: |B(r)| = 1 + 3((5^r)-1)/2
        lengths = f2_coupling.lambda_ball(3)
        by_depth = {}
        for _, d in lengths.items():
            by_depth[d] = by_depth.get(d, 0) + 1
        assert by_depth[0] == 1 and by_depth[1] == 6
        assert by_depth[2] == 30 and by_depth[3] == 150

    def test_non_subgroup_target_errors(self, f2, f2_coupling):
        with pytest.raises(PreconditionError):
            f2_coupling.lambda_lengths({f2.parse_word("a")})


class TestProjections:
    def test_identity_projection(self, f2_coupling):
        rep = projection_and_similarity(
            f2_coupling, "lambda", ["e", "a"], ["e", "a"], power(1)
        )
        assert rep["integral"] == "0/1"
        assert rep["correction_set"] == ["e"]

    def test_alternate_transversal(self, f2, f2_coupling):
        rep = projection_and_similarity(
            f2_coupling, "lambda", ["e", "a"], ["e", "aB"], power(1)
        )
        assert rep["linf_equivalent"]
        # pi(a) = aB with correction (aB)^-1 a = bA a... in the subgroup
        corr = [w for w in rep["correction_set"] if w != "e"]
        assert len(corr) == 1
        lam = f2.parse_word(corr[0])
        assert f2_coupling.sub.contains(lam)
        dist = f2_coupling.lambda_lengths({lam})[lam]
        assert rep["integral"] == f"{dist}/1"

    def test_linf_equivalence_symmetric_transitive(self, f2_coupling):
        transversals = [["e", "a"], ["e", "aB"], ["e", "abb"], ["e", "A"]]
        for X1 in transversals:
            for X2 in transversals:
                fwd = projection_and_similarity(f2_coupling, "lambda", X1, X2, power(1))
                back = projection_and_similarity(f2_coupling, "lambda", X2, X1, power(1))
                assert fwd["linf_equivalent"] and back["linf_equivalent"]
                assert fwd["integral"] == back["integral"]  # displacement symmetry

    def test_invalid_transversal_rejected(self, f2_coupling):
        with pytest.raises(PreconditionError, match="transversal"):
            projection_and_similarity(f2_coupling, "lambda", ["e", "a"], ["e", "aa"], power(1))

    def test_gamma_side(self, f2_coupling):
        rep = projection_and_similarity(f2_coupling, "gamma", ["e"], ["ab"], power(2))
        assert rep["displacements"] == [2]
        assert rep["integral"] == "4/1"


class TestIntegrability:
    def test_f2_exact_constants(self, f2, f2_coupling):
        rep = integrability_report(f2_coupling, power(1), power(1))
        assert rep.exact
        # independent recomputation of K
        best = Fraction(0)
        ref_lengths = independent_word_lengths(
            f2, list(f2_coupling.sub.schreier_generators),
            [f2_coupling.alpha(s, x) for _, s in f2.symmetric_generators()
             for x in f2_coupling.x_lambda_points()],
        )
        for _, s in f2.symmetric_generators():
            total = sum(
                Fraction(ref_lengths[f2_coupling.alpha(s, x)])
                for x in f2_coupling.x_lambda_points()
            )
            best = max(best, total)
        assert rep.k_constant == best
        # L: beta on a singleton at e is lambda itself, so L = max |t|_{S_Gamma}
        assert rep.l_constant == max(
            f2.word_length(t) for t in f2_coupling.sub.schreier_generators
        )
        assert rep.beta_sup == 3

    def test_finite_for_any_phi(self, f2_coupling):
        rep = integrability_report(f2_coupling, power(5), power(3))
        assert isinstance(rep.k_constant, Fraction)  # finite sum, always defined

    def test_exp_power_bounds(self, f2_coupling):
        rep = integrability_report(f2_coupling, power(1), exp_power(1))
        assert not rep.exact
        lo, hi = rep.l_constant
        assert 0 < lo <= hi

    def test_generating_set_robustness(self, f2, f2_coupling):
        # adding a generator to S_lambda keeps power-integrals finite with the
        # same finiteness verdict (values may differ)
        c = f2_coupling
        extra = f2.parse_word("aabb")
        bigger = list(c.sub.schreier_generators) + [extra, f2.inverse(extra)]
        targets = [c.alpha(s, x) for _, s in f2.symmetric_generators() for x in c.x_lambda_points()]
        ref = independent_word_lengths(f2, bigger, targets)
        total = sum(ref[t] for t in targets)
        assert total < float("inf")


class TestCoboundedness:
    def test_witness_default_is_identity(self, f2, f2_coupling):
        assert coboundedness_witness(f2_coupling) == [f2.identity()]

    def test_witness_for_b(self, f2):
        c = subgroup_coupling(f2, F2_GENS, x_gamma_word="b")
        W = coboundedness_witness(c)
        assert [f2.describe(w) for w in W] == ["B"]
        assert not c.x_gamma_in_x_lambda()

    def test_witness_for_a_is_identity(self, f2):
        # 'a' is itself a transversal representative, so e * X_lambda covers it
        c = subgroup_coupling(f2, F2_GENS, x_gamma_word="a")
        W = coboundedness_witness(c)
        assert [f2.describe(w) for w in W] == ["e"]
        assert c.x_gamma_in_x_lambda()

    def test_witness_covers(self, f2):
        for word in ("b", "ab", "aab", "ba"):
            c = subgroup_coupling(f2, F2_GENS, x_gamma_word=word)
            W = coboundedness_witness(c)
            st = strengthen_coboundedness(c, W)
            assert st.x_gamma_in_x_lambda()


class TestStrengthening:
    def test_trivial_witness_is_isomorphic(self, f2, f2_coupling):
        st = strengthen_coboundedness(f2_coupling, [f2.identity()])
        assert st.fiber_count == 1
        assert st.x_gamma == f2_coupling.x_gamma
        assert st.x_lambda_points() == f2_coupling.x_lambda_points()

    def test_padded_witness_two_fibers(self, f2):
        c = subgroup_coupling(f2, F2_GENS, x_gamma_word="b")
        st = strengthen_coboundedness(c, [f2.identity(), f2.parse_word("B")])
        assert st.fiber_count == 2
        assert st.x_gamma_in_x_lambda()
        report = validate_strengthened(st, radius=3, growth_radius=6)
        assert report["passed"]

    def test_non_witness_rejected(self, f2):
        c = subgroup_coupling(f2, F2_GENS, x_gamma_word="b")
        with pytest.raises(PreconditionError, match="witness"):
            strengthen_coboundedness(c, [f2.identity()])

    def test_step_bound(self, f2):
        c = subgroup_coupling(f2, F2_GENS, x_gamma_word="b")
        st = strengthen_coboundedness(c, [f2.identity(), f2.parse_word("B")])
        assert check_step_bound(st).passed

    def test_growth_comparison(self, f2):
        c = subgroup_coupling(f2, F2_GENS, x_gamma_word="b")
        st = strengthen_coboundedness(c, [f2.identity(), f2.parse_word("B")])
        rep = check_growth_comparison(st, 6)
        assert rep.passed

    def test_gamma_metric_on_fibers(self, f2):
        c = subgroup_coupling(f2, F2_GENS, x_gamma_word="b")
        st = strengthen_coboundedness(c, [f2.identity(), f2.parse_word("B")])
        x = f2.parse_word("b")
        assert st.gamma_distance((x, 0), (x, 1)) == 1
        assert st.gamma_distance((x, 1), (x, 1)) == 0
        # fiber moves combine with group moves additively
        y = f2.parse_word("ba")
        assert st.gamma_distance((x, 0), (y, 1)) == 2

    def test_cocycles_still_exact_after_strengthening(self, f2):
        c = subgroup_coupling(f2, F2_GENS, x_gamma_word="b")
        st = strengthen_coboundedness(c, [f2.identity(), f2.parse_word("B")])
        assert check_cocycle_identity(st, 2).passed
        assert check_inverse_relation(st, 3).passed
        assert check_b_identity(st, 2).passed


class TestClaimBound:
    def test_degenerate_pair_skipped(self, f2, f2_coupling):
        u = f2.parse_word("aa")
        rep = claim_bound_check(f2_coupling, u, u, 2, power(1))
        assert rep.degenerate and rep.passed

    def test_schreier_generator_pair(self, f2, f2_coupling):
        u = f2.parse_word("aa")
        v = f2.parse_word("b")
        rep = claim_bound_check(f2_coupling, u, v, 1, power(1))
        assert rep.d_lambda == 2
        assert rep.identity_violations == 0
        assert rep.passed
        # measured side: |u^-1 v| = |AAb| = 3 > 1, so measure 0
        assert rep.measured == 0

    def test_measured_one_cases_pass(self, f2, f2_coupling):
        u = f2.parse_word("b")
        v = f2.parse_word("bb")
        rep = claim_bound_check(f2_coupling, u, v, 1, power(2))
        assert rep.measured == 1  # |b|_Gamma = 1 <= R
        assert rep.passed

    def test_requires_inclusion(self, f2):
        c = subgroup_coupling(f2, F2_GENS, x_gamma_word="b")
        u = f2.parse_word("aa")
        v = f2.parse_word("b")
        with pytest.raises(PreconditionError):
            claim_bound_check(c, u, v, 1, power(1))

    def test_sweep_small(self, f2_coupling, z2_coupling):
        for c in (f2_coupling, z2_coupling):
            out = claim_bound_sweep(c, 2, [1, 2], [power(1), power(2)])
            assert out["passed"]
            assert out["pair_checks"] > 0

    def test_sweep_on_strengthened(self, f2):
        c = subgroup_coupling(f2, F2_GENS, x_gamma_word="b")
        st = strengthen_coboundedness(c, [f2.identity(), f2.parse_word("B")])
        out = claim_bound_sweep(st, 2, [1, 2], [power(1)])
        assert out["passed"]
