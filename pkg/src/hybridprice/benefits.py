"""Closed-form provider/sharer benefits and server load reduction.

Raw forms keep the sharing reward ``p_u`` explicit. Equilibrium forms are the
values after the provider and the designated sharer settle at the bargaining
midpoint, where ``p_u`` cancels out.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from hybridprice.errors import DegenerateCohort
from hybridprice.model import (
    Cohort,
    NormalizedPrices,
    Number,
    PriceSchedule,
    Scenario,
    classify_scenario,
    format_number,
)


@dataclass(frozen=True)
class BenefitReport:
    scenario: Scenario
    cp: Number
    sharer: Number
    load_reduction: Number
    settled: bool = True

    def as_dict(self) -> dict[str, str | bool]:
        return {
            "scenario": self.scenario.value,
            "cp": format_number(self.cp),
            "sharer": format_number(self.sharer),
            "load_reduction": format_number(self.load_reduction),
            "settled": self.settled,
        }


def ben_cp_raw(schedule: PriceSchedule, cohort: Cohort) -> Number:
    x, y, f = cohort.x, cohort.y, cohort.f
    scenario = classify_scenario(cohort)
    if scenario is Scenario.ALL_PREMIUM:
        return f * (schedule.require_premium_price() - schedule.p_n) * x
    if scenario is Scenario.ALL_STANDARD:
        # x == 1 collapses to f*(p_std - p_n): nobody to share with
        return f * (schedule.p_std * x - schedule.p_n - schedule.p_u * (x - 1))
    p_b = schedule.require_premium_price()
    return f * (
        p_b * y
        + schedule.p_std * (x - y)
        - schedule.p_n * (y + 1)
        - schedule.p_u * (x - y - 1)
    )


def ben_sharer_raw(schedule: PriceSchedule, cohort: Cohort) -> Number:
    """Designated sharer's benefit; per-user ``-f*p_b`` when everyone is premium."""
    f = cohort.f
    if classify_scenario(cohort) is Scenario.ALL_PREMIUM:
        return -f * schedule.require_premium_price()
    shares = cohort.x - cohort.y - 1
    return f * (schedule.p_u * shares - schedule.p_std - schedule.s * shares)


def _check_equilibrium_domain(cohort: Cohort) -> Scenario:
    scenario = classify_scenario(cohort)
    if scenario is Scenario.ALL_STANDARD and cohort.x < 2:
        raise DegenerateCohort("all-standard equilibrium needs x >= 2")
    return scenario


def _shared_term(schedule: PriceSchedule, cohort: Cohort) -> Number:
    """Bargaining midpoint ``(p_b*y + p_std*(x-y-1)) / 2`` per byte."""
    x, y = cohort.x, cohort.y
    premium = schedule.require_premium_price() * y if y else 0
    return Fraction(1, 2) * (premium + schedule.p_std * (x - y - 1))


def ben_cp_eq(schedule: PriceSchedule, cohort: Cohort) -> Number:
    scenario = _check_equilibrium_domain(cohort)
    f = cohort.f
    if scenario is Scenario.ALL_PREMIUM:
        return f * (schedule.require_premium_price() - schedule.p_n) * cohort.x
    return f * (_shared_term(schedule, cohort) - schedule.p_n * (cohort.y + 1))


def ben_user_eq(schedule: PriceSchedule, cohort: Cohort) -> Number:
    scenario = _check_equilibrium_domain(cohort)
    f = cohort.f
    if scenario is Scenario.ALL_PREMIUM:
        return -f * schedule.require_premium_price()
    return f * (_shared_term(schedule, cohort) - schedule.s * (cohort.x - cohort.y - 1))


def server_deliveries(cohort: Cohort) -> int:
    if cohort.y == cohort.x:
        return cohort.x
    return cohort.y + 1


def load_reduction(cohort: Cohort) -> Fraction:
    """Share of the audience not served by the provider's server."""
    return 1 - Fraction(server_deliveries(cohort), cohort.x)


def ben_cp_eq_normalized(prices: NormalizedPrices, x: Number, p_n: Number = 1, f: Number = 1) -> Number:
    """Equilibrium provider benefit with prices in units of ``p_n`` and ``y = k*x``.

    ``k*x`` need not be integral, which lets sweeps treat the premium share
    as continuous.
    """
    n, r, k = prices.n, prices.r, prices.k
    kx = k * x
    return f * p_n * (Fraction(1, 2) * n * (r * kx + x - kx - 1) - (kx + 1))


def benefit_report(schedule: PriceSchedule, cohort: Cohort) -> BenefitReport:
    """Equilibrium benefits where defined, raw forms for the lone-user case."""
    scenario = classify_scenario(cohort)
    try:
        cp = ben_cp_eq(schedule, cohort)
        sharer = ben_user_eq(schedule, cohort)
        settled = True
    except DegenerateCohort:
        cp = ben_cp_raw(schedule, cohort)
        sharer = ben_sharer_raw(schedule, cohort)
        settled = False
    return BenefitReport(scenario, cp, sharer, load_reduction(cohort), settled)
