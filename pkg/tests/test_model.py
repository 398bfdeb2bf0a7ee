from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hybridprice.errors import InvalidCohort, InvalidSchedule
from hybridprice.model import (
    Cohort,
    NormalizedPrices,
    PriceSchedule,
    Scenario,
    approx_equal,
    classify_scenario,
    denormalize,
    format_number,
    normalize,
    parse_number,
    validate,
)


def sched(p_n, p_b, p_std, p_u=1, s=F(1, 10)):
    return PriceSchedule(p_n=F(p_n), p_b=F(p_b), p_std=F(p_std), p_u=F(p_u), s=F(s))


class TestValidate:
    def test_valid(self):
        assert validate(sched(1, 4, 2)) == []

    def test_equal_premium_and_standard_price(self):
        assert validate(sched(1, 2, 2)) == ["p_b > p_std"]

    def test_standard_price_at_delivery_fee(self):
        assert validate(sched(1, 4, 1)) == ["p_std > p_n"]

    def test_reports_every_violation(self):
        bad = PriceSchedule(p_n=F(0), p_b=F(-1), p_std=F(0), p_u=F(-1), s=F(-1))
        assert set(validate(bad)) == {"p_n > 0", "p_std > p_n", "p_b > p_std", "p_u >= 0", "s >= 0"}

    def test_nonfinite(self):
        assert validate(PriceSchedule(p_n=1.0, p_std=float("inf"))) == ["p_std finite"]

    def test_missing_premium_price_is_not_a_violation(self):
        assert validate(PriceSchedule(p_n=F(1), p_std=F(2))) == []

    def test_does_not_mutate(self):
        s = sched(1, 2, 2)
        validate(s)
        assert s == sched(1, 2, 2)


class TestNormalize:
    @pytest.mark.parametrize(
        "prices, x, y, expected",
        [
            ((1, 4, 2), 10, 5, (4, 2, 2, F(1, 2))),
            ((2, 8, 4), 10, 0, (4, 2, 2, 0)),
            ((1, 3, 2), 4, 1, (3, 2, F(3, 2), F(1, 4))),
        ],
    )
    def test_examples(self, prices, x, y, expected):
        got = normalize(sched(*prices), Cohort(x, y))
        assert (got.m, got.n, got.r, got.k) == expected

    def test_rejects_invalid(self):
        with pytest.raises(InvalidSchedule):
            normalize(sched(1, 2, 2), Cohort(10, 5))

    @given(
        p_n=st.fractions(min_value=F(1, 100), max_value=100),
        d1=st.fractions(min_value=F(1, 100), max_value=100),
        d2=st.fractions(min_value=F(1, 100), max_value=100),
        x=st.integers(1, 200),
        data=st.data(),
    )
    def test_round_trip_exact(self, p_n, d1, d2, x, data):
        y = data.draw(st.integers(0, x))
        s = PriceSchedule(p_n=p_n, p_std=p_n + d1, p_b=p_n + d1 + d2)
        back = denormalize(normalize(s, Cohort(x, y)), p_n)
        assert (back.p_b, back.p_std) == (s.p_b, s.p_std)

    @given(
        p_n=st.floats(0.01, 100),
        d1=st.floats(0.01, 100),
        d2=st.floats(0.01, 100),
    )
    def test_round_trip_float(self, p_n, d1, d2):
        s = PriceSchedule(p_n=p_n, p_std=p_n + d1, p_b=p_n + d1 + d2)
        back = denormalize(normalize(s, Cohort(10, 3)), p_n)
        assert approx_equal(back.p_b, s.p_b, 1e-12)
        assert approx_equal(back.p_std, s.p_std, 1e-12)

    def test_normalized_invariants(self):
        with pytest.raises(InvalidSchedule):
            NormalizedPrices.from_ratio(F(1), F(2))
        with pytest.raises(InvalidSchedule):
            NormalizedPrices(m=F(5), n=F(2), r=F(2), k=0)


class TestScenario:
    @pytest.mark.parametrize(
        "x, y, expected",
        [(10, 0, Scenario.ALL_STANDARD), (10, 10, Scenario.ALL_PREMIUM), (10, 5, Scenario.MIXED)],
    )
    def test_examples(self, x, y, expected):
        assert classify_scenario(Cohort(x, y)) is expected

    @given(st.integers(1, 300), st.data())
    def test_partition(self, x, data):
        y = data.draw(st.integers(0, x))
        tag = classify_scenario(Cohort(x, y))
        assert (tag is Scenario.ALL_STANDARD) == (y == 0)
        assert (tag is Scenario.ALL_PREMIUM) == (y == x and y > 0)
        assert (tag is Scenario.MIXED) == (0 < y < x)

    def test_single_user_admitted(self):
        assert Cohort(1, 0).x == 1

    @pytest.mark.parametrize("x, y, f", [(0, 0, 1), (5, 6, 1), (5, -1, 1), (5, 1, 0)])
    def test_bad_cohort(self, x, y, f):
        with pytest.raises(InvalidCohort):
            Cohort(x, y, f)


@pytest.mark.parametrize(
    "text, value",
    [("0.1", F(1, 10)), ("2", F(2)), ("11/9", F(11, 9)), ("-0.25", F(-1, 4))],
)
def test_number_text_round_trip(text, value):
    assert parse_number(text) == value
    assert format_number(value) == text


@pytest.mark.parametrize("bad", ["1,5", "1_000", "", "abc"])
def test_parse_number_rejects(bad):
    with pytest.raises(ValueError):
        parse_number(bad)
