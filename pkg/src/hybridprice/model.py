"""Domain types, constraint checks and the (m, n, r, k) price parameterization.

Monetary quantities are plain numbers. Passing ``Fraction`` (or ``int``)
inputs keeps every downstream formula exact; passing ``float`` gives ordinary
floating evaluation, in which case comparisons go through :func:`approx_equal`.
"""

from __future__ import annotations

import enum
import math
import os
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Mapping, Union

from hybridprice.errors import InvalidCohort, InvalidSchedule

Number = Union[Fraction, int, float]

NUMERIC_ENV_VAR = "HYBRIDPRICE_NUMERIC"
REL_TOL = 1e-9


def default_numeric_mode() -> str:
    mode = os.environ.get(NUMERIC_ENV_VAR, "exact").strip().lower()
    if mode not in ("exact", "float"):
        raise ValueError(f"{NUMERIC_ENV_VAR} must be 'exact' or 'float', got {mode!r}")
    return mode


def parse_number(text: str | Number, exact: bool = True) -> Number:
    """Parse a decimal string (``'.'`` separator) or an ``a/b`` ratio."""
    if isinstance(text, (int, Fraction)) and not isinstance(text, bool):
        return Fraction(text) if exact else float(text)
    if isinstance(text, float):
        return Fraction(str(text)) if exact else text
    raw = str(text).strip()
    if not raw or "," in raw or "_" in raw:
        raise ValueError(f"not a plain decimal number: {text!r}")
    try:
        value = Fraction(raw)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a plain decimal number: {text!r}") from exc
    return value if exact else float(value)


def format_number(value: Number) -> str:
    """Decimal string for terminating rationals, ``p/q`` otherwise."""
    if isinstance(value, bool):
        raise TypeError("bool is not a number here")
    if isinstance(value, float):
        return repr(value)
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    den = value.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return f"{value.numerator}/{value.denominator}"
    digits = max(twos, fives)
    scaled = value * 10**digits
    sign = "-" if scaled < 0 else ""
    whole = abs(scaled.numerator)
    text = str(whole).rjust(digits + 1, "0")
    return f"{sign}{text[:-digits]}.{text[-digits:]}"


def approx_equal(a: Number, b: Number, rel_tol: float = REL_TOL) -> bool:
    """Exact equality for rationals; relative tolerance once a float is involved."""
    if isinstance(a, float) or isinstance(b, float):
        return math.isclose(float(a), float(b), rel_tol=rel_tol, abs_tol=rel_tol)
    return a == b


def _finite(value: Number) -> bool:
    return not isinstance(value, float) or math.isfinite(value)


class Scenario(str, enum.Enum):
    ALL_STANDARD = "AllStandard"
    ALL_PREMIUM = "AllPremium"
    MIXED = "Mixed"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, kw_only=True)
class PriceSchedule:
    """Per-byte rates for one content.

    ``p_std`` is the standard-option price. ``p_b`` may be left as ``None``
    when only all-standard audiences are evaluated.
    """

    p_n: Number
    p_std: Number
    p_b: Number | None = None
    p_u: Number = 0
    s: Number = 0

    def with_reward(self, p_u: Number) -> PriceSchedule:
        return replace(self, p_u=p_u)

    def scaled(self, factor: Number) -> PriceSchedule:
        return PriceSchedule(
            p_n=self.p_n * factor,
            p_std=self.p_std * factor,
            p_b=None if self.p_b is None else self.p_b * factor,
            p_u=self.p_u * factor,
            s=self.s * factor,
        )

    def require_premium_price(self) -> Number:
        if self.p_b is None:
            raise InvalidSchedule(["p_b required for audiences with premium users"])
        return self.p_b

    @classmethod
    def from_mapping(cls, values: Mapping[str, str | Number], exact: bool = True) -> PriceSchedule:
        known = {"p_n", "p_std", "p_b", "p_u", "s"}
        kwargs = {k: parse_number(v, exact) for k, v in values.items() if k in known and v is not None}
        missing = {"p_n", "p_std"} - kwargs.keys()
        if missing:
            raise InvalidSchedule([f"missing {name}" for name in sorted(missing)])
        return cls(**kwargs)

    def as_dict(self) -> dict[str, str | None]:
        return {
            "p_n": format_number(self.p_n),
            "p_b": None if self.p_b is None else format_number(self.p_b),
            "p_std": format_number(self.p_std),
            "p_u": format_number(self.p_u),
            "s": format_number(self.s),
        }


@dataclass(frozen=True)
class Cohort:
    """Audience of one content: ``x`` users, ``y`` of them premium, file of ``f`` bytes."""

    x: int
    y: int
    f: Number = 1

    def __post_init__(self) -> None:
        if isinstance(self.x, bool) or not isinstance(self.x, int) or self.x < 1:
            raise InvalidCohort(f"x must be a positive integer, got {self.x!r}")
        if isinstance(self.y, bool) or not isinstance(self.y, int) or not 0 <= self.y <= self.x:
            raise InvalidCohort(f"y must be an integer in [0, {self.x}], got {self.y!r}")
        if not _finite(self.f) or self.f < 1:
            raise InvalidCohort(f"f must be at least one byte, got {self.f!r}")

    @property
    def standard(self) -> int:
        return self.x - self.y

    @property
    def shares(self) -> int:
        """Peer deliveries made by the designated sharer."""
        return max(self.x - self.y - 1, 0)


@dataclass(frozen=True)
class NormalizedPrices:
    """Prices in units of the delivery fee: ``p_b = m*p_n``, ``p_std = n*p_n``."""

    m: Number
    n: Number
    r: Number
    k: Number

    def __post_init__(self) -> None:
        problems = []
        if not self.n > 1:
            problems.append("n > 1")
        if not self.m > self.n:
            problems.append("m > n")
        if not approx_equal(self.m, self.r * self.n):
            problems.append("m = r*n")
        if not 0 <= self.k <= 1:
            problems.append("0 <= k <= 1")
        if problems:
            raise InvalidSchedule(problems)

    @classmethod
    def from_ratio(cls, n: Number, r: Number, k: Number = 0) -> NormalizedPrices:
        return cls(m=r * n, n=n, r=r, k=k)

    @classmethod
    def from_levels(cls, m: Number, n: Number, k: Number = 0) -> NormalizedPrices:
        return cls(m=m, n=n, r=_ratio(m, n), k=k)


def validate(schedule: PriceSchedule) -> list[str]:
    """Return every violated constraint; an empty list means the schedule is valid."""
    violations = []
    rates = {"p_n": schedule.p_n, "p_std": schedule.p_std, "p_b": schedule.p_b,
             "p_u": schedule.p_u, "s": schedule.s}
    for name, value in rates.items():
        if value is not None and not _finite(value):
            violations.append(f"{name} finite")
    if violations:
        return violations
    if not schedule.p_n > 0:
        violations.append("p_n > 0")
    if not schedule.p_std > schedule.p_n:
        violations.append("p_std > p_n")
    if schedule.p_b is not None and not schedule.p_b > schedule.p_std:
        violations.append("p_b > p_std")
    if not schedule.p_u >= 0:
        violations.append("p_u >= 0")
    if not schedule.s >= 0:
        violations.append("s >= 0")
    return violations


def ensure_valid(schedule: PriceSchedule) -> PriceSchedule:
    violations = validate(schedule)
    if violations:
        raise InvalidSchedule(violations)
    return schedule


def _ratio(a: Number, b: Number) -> Number:
    if isinstance(a, int) and isinstance(b, int):
        return Fraction(a, b)
    return a / b


def normalize(schedule: PriceSchedule, cohort: Cohort) -> NormalizedPrices:
    ensure_valid(schedule)
    p_b = schedule.require_premium_price()
    m = _ratio(p_b, schedule.p_n)
    n = _ratio(schedule.p_std, schedule.p_n)
    return NormalizedPrices(m=m, n=n, r=_ratio(m, n), k=_ratio(cohort.y, cohort.x))


def denormalize(prices: NormalizedPrices, p_n: Number, *, p_u: Number = 0, s: Number = 0) -> PriceSchedule:
    return PriceSchedule(p_n=p_n, p_b=prices.m * p_n, p_std=prices.n * p_n, p_u=p_u, s=s)


def classify_scenario(cohort: Cohort) -> Scenario:
    if cohort.y == 0:
        return Scenario.ALL_STANDARD
    if cohort.y == cohort.x:
        return Scenario.ALL_PREMIUM
    return Scenario.MIXED
