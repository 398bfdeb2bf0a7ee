"""Nash bargaining between the provider and the designated sharer.

Both sides' objectives are linear in the sharing reward ``p_u`` with opposite
signs, so their sum does not depend on it. The settlement puts each objective
at the midpoint of that sum, which pins down ``p_u``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from hybridprice import benefits
from hybridprice.errors import DegenerateCohort, NoBargain
from hybridprice.model import (
    Cohort,
    NormalizedPrices,
    Number,
    PriceSchedule,
    Scenario,
    approx_equal,
    classify_scenario,
    denormalize,
    ensure_valid,
)

HALF = Fraction(1, 2)


@dataclass(frozen=True)
class BargainState:
    f_cp: Number
    f_user: Number
    f_eq: Number


class NbsOutcome(str, enum.Enum):
    SETTLED = "settled"
    NO_EQUILIBRIUM = "NoEquilibrium"
    NO_BARGAIN = "NoBargain"


@dataclass(frozen=True)
class NbsResult:
    outcome: NbsOutcome
    reward: Number | None = None
    state: BargainState | None = None

    @property
    def settled(self) -> bool:
        return self.outcome is NbsOutcome.SETTLED


@dataclass(frozen=True)
class ComparisonReport:
    delta_21: Number
    delta_23: Number | None
    dominant: Scenario
    two_m_gt_n_plus_2: bool
    m_gt_1_5: bool


@dataclass(frozen=True)
class GradientWitness:
    d_premium: Number
    d_standard: Number

    @property
    def no_interior_max(self) -> bool:
        return self.d_premium > 0 and self.d_standard > 0


def _sharing_users(cohort: Cohort) -> int:
    scenario = classify_scenario(cohort)
    if scenario is Scenario.ALL_PREMIUM:
        raise NoBargain("premium users never share")
    shares = cohort.x - cohort.y - 1
    if cohort.x < 2 or shares < 1:
        raise NoBargain(f"no peer deliveries for x={cohort.x}, y={cohort.y}")
    return shares


def bargain_state(schedule: PriceSchedule, cohort: Cohort) -> BargainState:
    shares = _sharing_users(cohort)
    x, y = cohort.x, cohort.y
    premium = schedule.require_premium_price() * y if y else 0
    f_cp = premium + schedule.p_std * (x - y) - schedule.p_u * shares
    f_user = schedule.p_u * shares - schedule.p_std
    return BargainState(f_cp=f_cp, f_user=f_user, f_eq=HALF * (f_cp + f_user))


def nbs_reward(schedule: PriceSchedule, cohort: Cohort) -> NbsResult:
    """Sharing reward at which both objectives sit at their midpoint.

    ``schedule.p_u`` is ignored. Solving ``f_user = f_eq`` gives
    ``p_u = (p_b*y + p_std*(x-y+1)) / (2*(x-y-1))``, which reduces to
    ``p_std*(x+1) / (2*(x-1))`` when ``y = 0``.
    """
    if classify_scenario(cohort) is Scenario.ALL_PREMIUM:
        # the only settlement is p_b = 0, which the provider never accepts
        return NbsResult(NbsOutcome.NO_EQUILIBRIUM)
    try:
        shares = _sharing_users(cohort)
    except NoBargain:
        return NbsResult(NbsOutcome.NO_BARGAIN)
    x, y = cohort.x, cohort.y
    premium = schedule.require_premium_price() * y if y else 0
    numerator = premium + schedule.p_std * (x - y + 1)
    if isinstance(numerator, float):
        reward = numerator / (2 * shares)
    else:
        reward = Fraction(numerator) / (2 * shares)
    state = bargain_state(schedule.with_reward(reward), cohort)
    return NbsResult(NbsOutcome.SETTLED, reward, state)


def verify_equilibrium(schedule: PriceSchedule, cohort: Cohort) -> bool:
    """True when raw benefits at ``schedule.p_u`` equal the equilibrium forms."""
    if classify_scenario(cohort) is not Scenario.ALL_PREMIUM:
        _sharing_users(cohort)
    return approx_equal(
        benefits.ben_cp_raw(schedule, cohort), benefits.ben_cp_eq(schedule, cohort)
    ) and approx_equal(
        benefits.ben_sharer_raw(schedule, cohort), benefits.ben_user_eq(schedule, cohort)
    )


def delta_21_expanded(m: Number, n: Number, x: Number) -> Number:
    """All-premium minus all-standard benefit per ``f*p_n``, in collected form."""
    return HALF * ((m - n) * x + (m - 2) * x + n + 2)


def delta_23_expanded(m: Number, n: Number, x: Number, y: Number) -> Number:
    """All-premium minus mixed benefit per ``f*p_n``, in collected form."""
    return HALF * ((2 * m - n - 2) * x + (n + 2 - m) * y + n + 2)


def delta_23_naive(m: Number, n: Number, x: Number, y: Number) -> Number:
    # the tempting collection that loses the -m*y term; kept for contrast
    return HALF * ((2 * m - n - 2) * x + (n + 2) * y + n + 2)


def compare_cp(prices: NormalizedPrices, x: int, y: int, p_n: Number = 1, f: Number = 1) -> ComparisonReport:
    """Benefit gaps of the all-premium audience over the other two.

    ``delta_23`` is ``None`` when ``y = 0`` (no mixed audience to compare).
    """
    if x < 2 or not 0 <= y < x:
        raise DegenerateCohort(f"comparison needs x >= 2 and 0 <= y < x, got x={x}, y={y}")
    m, n = prices.m, prices.n
    schedule = denormalize(prices, p_n)
    premium = benefits.ben_cp_eq(schedule, Cohort(x, x, f))
    standard = benefits.ben_cp_eq(schedule, Cohort(x, 0, f))
    delta_21 = premium - standard
    candidates = [(premium, Scenario.ALL_PREMIUM), (standard, Scenario.ALL_STANDARD)]
    delta_23 = None
    if y >= 1:
        mixed = benefits.ben_cp_eq(schedule, Cohort(x, y, f))
        delta_23 = premium - mixed
        candidates.append((mixed, Scenario.MIXED))
    dominant = max(candidates, key=lambda item: item[0])[1]
    return ComparisonReport(
        delta_21=delta_21,
        delta_23=delta_23,
        dominant=dominant,
        two_m_gt_n_plus_2=2 * m > n + 2,
        m_gt_1_5=m > Fraction(3, 2),
    )


def dominance_counterexamples(
    n_values=None, gap: Number = Fraction(1, 20), max_x: int = 1000
) -> Iterator[tuple[Number, Number, int]]:
    """Yield ``(m, n, x)`` with ``m > n > 1``, ``2m < n+2`` and a negative all-premium gap.

    Below the threshold the coefficient of ``x`` in the gap is negative, so
    the gap turns negative once ``x`` is large enough.
    """
    if n_values is None:
        n_values = [Fraction(11, 10) + Fraction(i, 10) for i in range(9)]
    for n in n_values:
        m = n + gap
        if not 2 * m < n + 2:
            continue
        for x in range(2, max_x + 1):
            if delta_21_expanded(m, n, x) < 0:
                yield m, n, x
                break


def f_eq3(p_b: Number, p_std: Number, cohort: Cohort) -> Number:
    """Shared objective of the mixed audience at the bargaining midpoint (times ``f``)."""
    return cohort.f * HALF * (p_b * cohort.y + p_std * (cohort.x - cohort.y - 1))


def interior_max_witness(cohort: Cohort) -> GradientWitness:
    """Gradient of the mixed midpoint objective in ``(p_b, p_std)``.

    Both partials are constant and nonnegative, so the objective has no
    stationary point inside ``p_b > p_std``; the Lagrange conditions would
    force ``x = 1``.
    """
    if classify_scenario(cohort) is not Scenario.MIXED:
        raise DegenerateCohort("gradient witness needs 1 <= y <= x-1")
    f = cohort.f
    return GradientWitness(
        d_premium=f * HALF * cohort.y,
        d_standard=f * HALF * (cohort.x - cohort.y - 1),
    )


def settle(schedule: PriceSchedule, cohort: Cohort) -> tuple[NbsResult, PriceSchedule]:
    """Validate, solve the reward and return the schedule carrying it."""
    ensure_valid(schedule)
    result = nbs_reward(schedule, cohort)
    if result.settled:
        return result, schedule.with_reward(result.reward)
    return result, schedule
