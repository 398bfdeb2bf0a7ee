"""Pricing when the provider also values server load reduction.

The provider maximizes ``a*benefit + b*phi*load_reduction`` with ``a + b = 1``,
where ``phi`` converts load reduction into cost units. Two solvers are
offered: the large-audience ``asymptotic`` closed form and an ``exact``
finite-``x`` linear solve that reports feasibility and residuals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from hybridprice import benefits
from hybridprice.errors import InvalidRatio, ZeroBenefitWeight
from hybridprice.model import (
    Cohort,
    Number,
    PriceSchedule,
    Scenario,
    approx_equal,
    classify_scenario,
)


def _div(a: Number, b: Number) -> Number:
    if isinstance(a, float) or isinstance(b, float):
        return a / b
    return Fraction(a) / Fraction(b)


@dataclass(frozen=True)
class PolicyWeights:
    a: Number
    b: Number
    phi: Number

    def __post_init__(self) -> None:
        if not (0 <= self.a <= 1 and 0 <= self.b <= 1):
            raise ValueError("weights must lie in [0, 1]")
        if not approx_equal(self.a + self.b, 1):
            raise ValueError(f"weights must sum to 1, got a={self.a}, b={self.b}")
        if not self.phi > 0:
            raise ValueError(f"phi must be positive, got {self.phi}")

    def require_benefit_weight(self) -> None:
        if self.a == 0:
            raise ZeroBenefitWeight("price gap is undefined when the benefit weight is 0")


@dataclass(frozen=True)
class PolicyPrices:
    p_b: Number
    p_std: Number
    mode: str
    feasible: bool
    residuals: dict = field(default_factory=dict)


@dataclass(frozen=True)
class MnRelation:
    n: Number
    m: Number
    satisfies_constraints: bool


def _feasible(p_b: Number, p_std: Number, p_n: Number) -> bool:
    return p_b > p_std > p_n


def target_function(weights: PolicyWeights, schedule: PriceSchedule, cohort: Cohort) -> Number:
    benefit = benefits.ben_cp_eq(schedule, cohort) if weights.a else 0
    return weights.a * benefit + weights.b * weights.phi * benefits.load_reduction(cohort)


def price_gap(weights: PolicyWeights, p_n: Number, f: Number, x: Number) -> Number:
    """Premium-over-standard price gap that makes the mixed objective flat in ``y``."""
    weights.require_benefit_weight()
    if x < 1:
        raise ValueError("x must be at least 1")
    return 2 * p_n + _div(2 * weights.b * weights.phi, weights.a * f * x)


def asymptotic_policy(weights: PolicyWeights, p_n: Number, f: Number) -> PolicyPrices:
    weights.require_benefit_weight()
    p_b = _div(2 * weights.b * weights.phi, weights.a * f)
    p_std = p_b - 2 * p_n
    return PolicyPrices(p_b=p_b, p_std=p_std, mode="asymptotic", feasible=_feasible(p_b, p_std, p_n))


def calibrate_phi(r: Number, a: Number, b: Number, p_n: Number, f: Number) -> Number:
    """``phi`` for which the asymptotic policy charges premium users ``r`` times more."""
    if not r > 1:
        raise InvalidRatio(f"price ratio must exceed 1, got {r}")
    if not (a > 0 and b > 0):
        raise ZeroBenefitWeight("calibration needs both weights positive")
    return _div(p_n * a * f, b * (1 - _div(1, r)))


def mn_relation(delta: Number) -> MnRelation:
    """Price levels on the ``m = n + 2`` line for ratio ``r = 1 + delta``."""
    if not delta > 0:
        raise InvalidRatio(f"delta must be positive, got {delta}")
    n = _div(2, delta)
    m = n + 2
    return MnRelation(n=n, m=m, satisfies_constraints=n > 1)


def _tf(weights: PolicyWeights, p_b: Number, p_std: Number, p_n: Number, f: Number, x: int, y: int) -> Number:
    schedule = PriceSchedule(p_n=p_n, p_b=p_b, p_std=p_std)
    return target_function(weights, schedule, Cohort(x, y, f))


def exact_indifference(weights: PolicyWeights, p_n: Number, f: Number, x: int) -> PolicyPrices:
    """Finite-``x`` prices equalizing the all-premium and all-standard objectives.

    Combined with :func:`price_gap`, the mixed objective is then flat in ``y``
    as well. The solution may need a standard price below ``p_n``; that is
    reported through ``feasible`` rather than raised.
    """
    weights.require_benefit_weight()
    if x < 2:
        raise ValueError("exact indifference needs x >= 2")
    a, b, phi = weights.a, weights.b, weights.phi
    gap = price_gap(weights, p_n, f, x)
    # a*f*x*(p_std + gap - p_n) = a*f*(p_std*(x-1)/2 - p_n) + b*phi*(x-1)/x
    rhs = -a * f * p_n + a * f * x * p_n - a * f * x * gap + _div(b * phi * (x - 1), x)
    p_std = _div(2 * rhs, a * f * (x + 1))
    p_b = p_std + gap
    premium_tf = _tf(weights, p_b, p_std, p_n, f, x, x)
    standard_tf = _tf(weights, p_b, p_std, p_n, f, x, 0)
    mixed = [_tf(weights, p_b, p_std, p_n, f, x, y) for y in range(1, x)]
    residuals = {
        "standard_vs_premium": abs(standard_tf - premium_tf),
        "mixed_vs_premium": max(abs(v - premium_tf) for v in mixed),
        "mixed_spread": max(mixed) - min(mixed) if len(mixed) > 1 else None,
    }
    return PolicyPrices(p_b=p_b, p_std=p_std, mode="exact", feasible=_feasible(p_b, p_std, p_n), residuals=residuals)


@dataclass(frozen=True)
class Ranked:
    scenario: Scenario
    y: int
    value: Number


def recommend(
    weights: PolicyWeights,
    candidates: Iterable[Scenario],
    cohort: Cohort,
    schedule: PriceSchedule,
) -> list[Ranked]:
    """Rank audience mixes by the weighted objective, best first.

    ``Mixed`` is evaluated at the cohort's own premium count; ties keep
    candidate order.
    """
    scored = []
    for scenario in candidates:
        if scenario is Scenario.ALL_STANDARD:
            y = 0
        elif scenario is Scenario.ALL_PREMIUM:
            y = cohort.x
        else:
            if classify_scenario(cohort) is not Scenario.MIXED:
                raise ValueError("Mixed candidate needs a cohort with 0 < y < x")
            y = cohort.y
        variant = Cohort(cohort.x, y, cohort.f)
        scored.append(Ranked(scenario, y, target_function(weights, schedule, variant)))
    return sorted(scored, key=lambda item: -item.value)
