from fractions import Fraction as F

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from hybridprice import benefits as B
from hybridprice import policy as P
from hybridprice.errors import InvalidRatio, ZeroBenefitWeight
from hybridprice.model import Cohort, PriceSchedule, Scenario

HALF = F(1, 2)


def weights(a, phi=2):
    return P.PolicyWeights(F(a), 1 - F(a), F(phi))


class TestTargetFunction:
    def test_benefit_only(self, p0):
        assert P.target_function(weights(1), p0, Cohort(10, 10)) == 30

    def test_load_only(self, p0):
        assert P.target_function(weights(0, 2), p0, Cohort(10, 0)) == F(9, 5)

    def test_balanced(self):
        s = PriceSchedule(p_n=F(1), p_std=F(2))
        assert P.target_function(weights(HALF, 2), s, Cohort(10, 0)) == F(49, 10)

    @given(st.integers(2, 40), st.data())
    def test_weight_limits(self, x, data):
        y = data.draw(st.integers(0, x))
        s = PriceSchedule(p_n=F(1), p_std=F(3), p_b=F(5))
        c = Cohort(x, y)
        assert P.target_function(weights(1, 7), s, c) == B.ben_cp_eq(s, c)
        assert P.target_function(weights(0, 7), s, c) == 7 * B.load_reduction(c)

    def test_weights_must_sum_to_one(self):
        with pytest.raises(ValueError):
            P.PolicyWeights(F(1, 2), F(1, 3), F(1))
        with pytest.raises(ValueError):
            P.PolicyWeights(F(1, 2), F(1, 2), F(0))


class TestPriceGap:
    def test_examples(self):
        assert P.price_gap(weights(HALF), 1, 1, 10) == F(12, 5)
        assert P.price_gap(weights(1, 99), 1, 1, 10) == 2

    def test_limit(self):
        assert float(P.price_gap(weights(HALF), 1, 1, 10**12)) == pytest.approx(2, abs=1e-9)

    def test_decreasing_in_audience(self):
        gaps = [P.price_gap(weights(F(3, 10), 5), 1, 1, x) for x in range(1, 300)]
        assert all(b < a for a, b in zip(gaps, gaps[1:]))
        assert all(g > 2 for g in gaps)

    def test_zero_benefit_weight(self):
        with pytest.raises(ZeroBenefitWeight):
            P.price_gap(weights(0), 1, 1, 10)

    @settings(max_examples=60)
    @given(
        a=st.fractions(min_value=F(1, 20), max_value=1),
        phi=st.fractions(min_value=F(1, 10), max_value=100),
        x=st.integers(3, 40),
        p_std=st.fractions(min_value=F(11, 10), max_value=30),
    )
    def test_mixed_objective_flat_in_y(self, a, phi, x, p_std):
        w = P.PolicyWeights(a, 1 - a, phi)
        gap = P.price_gap(w, F(1), F(1), x)
        s = PriceSchedule(p_n=F(1), p_std=p_std, p_b=p_std + gap)
        values = {P.target_function(w, s, Cohort(x, y)) for y in range(1, x)}
        assert len(values) == 1


class TestAsymptotic:
    def test_examples(self):
        got = P.asymptotic_policy(weights(HALF, 2), 1, 1)
        assert (got.p_b, got.p_std, got.feasible) == (4, 2, True)
        got = P.asymptotic_policy(weights(HALF, HALF), 1, 1)
        assert (got.p_b, got.p_std, got.feasible) == (1, -1, False)
        got = P.asymptotic_policy(P.PolicyWeights(F(9, 10), F(1, 10), F(45)), 1, 1)
        assert (got.p_b, got.p_std, got.feasible) == (10, 8, True)


class TestCalibration:
    def test_examples(self):
        assert P.calibrate_phi(F(2), HALF, HALF, 1, 1) == 2
        assert P.calibrate_phi(F(3), HALF, HALF, 1, 1) == F(3, 2)

    def test_diverges_near_one(self):
        phis = [P.calibrate_phi(1 + F(1, 10**k), HALF, HALF, 1, 1) for k in range(1, 8)]
        assert all(b > a for a, b in zip(phis, phis[1:]))
        assert phis[-1] > 10**6

    def test_rejects_ratio_at_one(self):
        with pytest.raises(InvalidRatio):
            P.calibrate_phi(F(1), HALF, HALF, 1, 1)

    @given(
        r=st.fractions(min_value=F(101, 100), max_value=50),
        a=st.fractions(min_value=F(1, 100), max_value=F(99, 100)),
        p_n=st.fractions(min_value=F(1, 10), max_value=10),
        f=st.integers(1, 1000),
    )
    def test_round_trip(self, r, a, p_n, f):
        phi = P.calibrate_phi(r, a, 1 - a, p_n, f)
        got = P.asymptotic_policy(P.PolicyWeights(a, 1 - a, phi), p_n, f)
        assert got.p_b / got.p_std == r


class TestMnRelation:
    @pytest.mark.parametrize("delta, n, m", [(1, 2, 4), (2, 1, 3), (F(1, 10), 20, 22)])
    def test_examples(self, delta, n, m):
        rel = P.mn_relation(F(delta))
        assert (rel.n, rel.m) == (n, m)

    def test_constraint_flag(self):
        assert P.mn_relation(F(1)).satisfies_constraints
        assert not P.mn_relation(F(2)).satisfies_constraints
        assert not P.mn_relation(F(10**6)).satisfies_constraints

    def test_limits(self):
        assert P.mn_relation(F(1, 10**9)).n == 2 * 10**9
        assert P.mn_relation(F(10**9)).m - 2 < F(1, 10**8)

    def test_rejects(self):
        with pytest.raises(InvalidRatio):
            P.mn_relation(0)


def sympy_indifference(a, b, phi, p_n, f, x):
    """Independent solve of the two indifference equations."""
    pb, ps = sympy.symbols("pb ps")
    a, b, phi, p_n, f = (sympy.Rational(str(v)) for v in (a, b, phi, p_n, f))
    tf_premium = a * f * (pb - p_n) * x
    tf_standard = a * f * (ps * (x - 1) / 2 - p_n) + b * phi * sympy.Rational(x - 1, x)
    gap = 2 * p_n + 2 * b * phi / (a * f * x)
    sol = sympy.solve([tf_premium - tf_standard, pb - ps - gap], [pb, ps], dict=True)[0]
    return F(str(sol[pb])), F(str(sol[ps]))


class TestExactIndifference:
    def test_benefit_only_is_infeasible(self):
        got = P.exact_indifference(weights(1), 1, 1, 10)
        assert got.p_std == -2
        assert not got.feasible
        assert (got.p_b, got.p_std) == sympy_indifference(1, 0, 2, 1, 1, 10)

    def test_balanced_weights_zero_residual(self):
        got = P.exact_indifference(weights(HALF, 2), 1, 1, 10)
        assert got.mode == "exact"
        assert got.residuals["mixed_spread"] == 0
        assert got.residuals["mixed_vs_premium"] == 0
        assert (got.p_b, got.p_std) == sympy_indifference(HALF, HALF, 2, 1, 1, 10)

    def test_two_users(self):
        got = P.exact_indifference(weights(HALF, 2), 1, 1, 2)
        assert got.residuals["mixed_spread"] is None
        assert isinstance(got.feasible, bool)

    @pytest.mark.parametrize("a, phi, p_n, f, x", [(F(1, 5), 400, 1, 1, 4), (F(7, 10), 3, F(3, 2), 2, 25)])
    def test_matches_symbolic_solve(self, a, phi, p_n, f, x):
        got = P.exact_indifference(P.PolicyWeights(a, 1 - a, F(phi)), F(p_n), F(f), x)
        assert (got.p_b, got.p_std) == sympy_indifference(a, 1 - a, phi, p_n, f, x)


class TestRecommend:
    ALL = [Scenario.ALL_PREMIUM, Scenario.MIXED, Scenario.ALL_STANDARD]

    def test_load_only_follows_load_reduction(self, p0):
        ranked = P.recommend(weights(0), self.ALL, Cohort(10, 5), p0)
        assert [r.scenario for r in ranked] == [Scenario.ALL_STANDARD, Scenario.MIXED, Scenario.ALL_PREMIUM]

    def test_benefit_only(self, p0):
        ranked = P.recommend(weights(1), self.ALL, Cohort(10, 5), p0)
        assert ranked[0].scenario is Scenario.ALL_PREMIUM
        assert ranked[0].value == 30
        assert ranked[1].value == ranked[2].value == 8

    def test_tie_at_zero_load_reduction(self, p0):
        ranked = P.recommend(weights(0), self.ALL, Cohort(10, 9), p0)
        tail = {(r.scenario, r.value) for r in ranked[1:]}
        assert tail == {(Scenario.MIXED, 0), (Scenario.ALL_PREMIUM, 0)}
