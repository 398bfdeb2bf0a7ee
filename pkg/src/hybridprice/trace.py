"""Session traces, per-content audiences and the premium-share Monte Carlo curve.

Trace CSV header: ``timestamp,user_id,content_id,bytes,option``. Timestamps
are ISO 8601 with second resolution. The synthetic generator draws content
popularity from a Zipf law and assigns the premium option per user.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass
from datetime import datetime, timedelta
from fractions import Fraction
from typing import Iterable, Sequence, TextIO

import numpy as np

from hybridprice.benefits import benefit_report
from hybridprice.errors import EmptyPool, ParseError
from hybridprice.model import Cohort, Number, PriceSchedule

TRACE_COLUMNS = ("timestamp", "user_id", "content_id", "bytes", "option")
CURVE_COLUMNS = ("premium_fraction", "mean", "ci_low", "ci_high", "replicates")
Z_95 = 1.96
TRACE_START = datetime(2014, 7, 1)
ONE_GB = 10**9


class Option(str, enum.Enum):
    PREMIUM = "premium"
    STANDARD = "standard"
    UNASSIGNED = "unassigned"


@dataclass(frozen=True)
class SessionRecord:
    timestamp: datetime
    user_id: str
    content_id: str
    bytes: int
    option: Option


@dataclass(frozen=True)
class ContentCohort:
    content_id: str
    viewers: frozenset
    premium_viewers: frozenset
    f: int

    @property
    def x(self) -> int:
        return len(self.viewers)

    @property
    def y(self) -> int:
        return len(self.premium_viewers)


@dataclass(frozen=True)
class CurvePoint:
    premium_fraction: float
    mean_benefit: float
    ci_low: float
    ci_high: float
    replicates: int


def parse_trace(lines: Iterable[str]) -> list[SessionRecord]:
    reader = csv.reader(lines)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty trace, header expected", 1) from None
    if tuple(header) != TRACE_COLUMNS:
        raise ParseError(f"header must be {','.join(TRACE_COLUMNS)}", 1)
    records = []
    for row in reader:
        lineno = reader.line_num
        if not row:
            continue
        if len(row) != len(TRACE_COLUMNS):
            missing = TRACE_COLUMNS[len(row)] if len(row) < len(TRACE_COLUMNS) else None
            raise ParseError(f"expected {len(TRACE_COLUMNS)} fields, got {len(row)}", lineno, missing)
        stamp, user, content, size, option = row
        try:
            timestamp = datetime.fromisoformat(stamp)
        except ValueError:
            raise ParseError(f"bad timestamp {stamp!r}", lineno, "timestamp") from None
        if not user:
            raise ParseError("empty user_id", lineno, "user_id")
        if not content:
            raise ParseError("empty content_id", lineno, "content_id")
        if not size.isdigit() or int(size) < 1:
            raise ParseError(f"bytes must be a positive integer, got {size!r}", lineno, "bytes")
        try:
            opt = Option(option)
        except ValueError:
            raise ParseError(f"unknown option {option!r}", lineno, "option") from None
        records.append(SessionRecord(timestamp, user, content, int(size), opt))
    return records


def write_trace(records: Iterable[SessionRecord], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    for rec in records:
        writer.writerow([rec.timestamp.isoformat(timespec="seconds"), rec.user_id,
                         rec.content_id, rec.bytes, rec.option.value])


def serialize_trace(records: Iterable[SessionRecord]) -> str:
    buf = io.StringIO()
    write_trace(records, buf)
    return buf.getvalue()


def zipf_weights(contents: int, exponent: float) -> np.ndarray:
    ranks = np.arange(1, contents + 1, dtype=float)
    weights = ranks ** (-exponent)
    return weights / weights.sum()


def generate_trace(
    seed: int,
    users: int,
    contents: int,
    zipf_exponent: float,
    premium_prob: float,
    size_bytes: int = ONE_GB,
    sessions_per_user: int = 10,
) -> list[SessionRecord]:
    if users < 1 or contents < 1:
        raise ValueError("need at least one user and one content")
    if not 0 <= premium_prob <= 1:
        raise ValueError(f"premium_prob must lie in [0, 1], got {premium_prob}")
    if size_bytes < 1 or sessions_per_user < 1:
        raise ValueError("size_bytes and sessions_per_user must be positive")
    rng = np.random.default_rng(seed)
    uw, cw = len(str(users)), len(str(contents))
    probs = zipf_weights(contents, zipf_exponent)
    is_premium = rng.random(users) < premium_prob
    span = 31 * 24 * 3600
    records = []
    for u in range(users):
        option = Option.PREMIUM if is_premium[u] else Option.STANDARD
        picks = rng.choice(contents, size=sessions_per_user, p=probs)
        offsets = rng.integers(0, span, size=sessions_per_user)
        for c, off in zip(picks, offsets):
            records.append(SessionRecord(
                TRACE_START + timedelta(seconds=int(off)),
                f"user{u + 1:0{uw}d}",
                f"c{c + 1:0{cw}d}",
                size_bytes,
                option,
            ))
    records.sort(key=lambda r: (r.timestamp, r.user_id, r.content_id))
    return records


def extract_cohorts(records: Iterable[SessionRecord]) -> list[ContentCohort]:
    """Group sessions by content; repeated views by one user count once."""
    viewers: dict[str, set] = {}
    premium: dict[str, set] = {}
    sizes: dict[str, int] = {}
    for rec in records:
        viewers.setdefault(rec.content_id, set()).add(rec.user_id)
        premium.setdefault(rec.content_id, set())
        if rec.option is Option.PREMIUM:
            premium[rec.content_id].add(rec.user_id)
        sizes[rec.content_id] = max(sizes.get(rec.content_id, 0), rec.bytes)
    return [
        ContentCohort(cid, frozenset(viewers[cid]), frozenset(premium[cid]), sizes[cid])
        for cid in sorted(viewers)
    ]


def user_pool(records: Iterable[SessionRecord]) -> list[str]:
    return sorted({rec.user_id for rec in records})


def _benefit_table(x: int, schedule: PriceSchedule) -> list[Fraction]:
    """Provider benefit in units of ``f*p_n`` for every premium count ``0..x``."""
    return [benefit_report(schedule, Cohort(x, y)).cp for y in range(x + 1)]


def mc_benefit_curve(
    pool: Sequence[str],
    cohorts: Sequence[ContentCohort],
    n: Number,
    r: Number,
    grid: Sequence[float],
    replicates: int = 200,
    seed: int = 0,
) -> list[CurvePoint]:
    """Mean provider benefit (units of ``f*p_n``) against the premium share of the pool.

    For each share ``q``, ``floor(q*|pool|)`` users are drawn without
    replacement as premium and every content's audience is re-split. Each
    replicate uses its own seed derived from ``(seed, grid index, replicate)``.
    Intervals are mean +/- 1.96 standard errors.
    """
    if not pool:
        raise EmptyPool("user pool is empty")
    if replicates < 1:
        raise ValueError("replicates must be at least 1")
    n, r = Fraction(n), Fraction(r)
    if not (n > 1 and r > 1):
        raise ValueError("need n > 1 and r > 1")
    schedule = PriceSchedule(p_n=1, p_std=n, p_b=n * r)
    index = {uid: i for i, uid in enumerate(sorted(pool))}
    members = []
    tables = []
    for cohort in cohorts:
        idx = np.array(sorted(index[v] for v in cohort.viewers if v in index), dtype=np.int64)
        members.append(idx)
        tables.append(_benefit_table(cohort.x, schedule))
    size = len(index)
    points = []
    for qi, q in enumerate(grid):
        if not 0 <= q <= 1:
            raise ValueError(f"premium fraction {q} outside [0, 1]")
        draw = math.floor((Fraction(str(q)) if isinstance(q, float) else Fraction(q)) * size)
        totals = []
        for rep in range(replicates):
            rng = np.random.default_rng([seed, qi, rep])
            mask = np.zeros(size, dtype=bool)
            mask[rng.choice(size, size=draw, replace=False)] = True
            totals.append(sum(table[int(mask[idx].sum())] for idx, table in zip(members, tables)))
        mean = sum(totals, Fraction(0)) / replicates
        if replicates > 1:
            var = sum(((t - mean) ** 2 for t in totals), Fraction(0)) / (replicates - 1)
            half = Z_95 * math.sqrt(var / replicates)
        else:
            half = 0.0
        m = float(mean)
        points.append(CurvePoint(float(q), m, m - half, m + half, replicates))
    return points


def write_curve(points: Iterable[CurvePoint], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CURVE_COLUMNS)
    for p in points:
        writer.writerow([repr(p.premium_fraction), repr(p.mean_benefit), repr(p.ci_low),
                         repr(p.ci_high), p.replicates])


def fitted_slope(points: Sequence[CurvePoint]) -> float:
    """Least-squares slope of mean benefit against premium share."""
    q = np.array([p.premium_fraction for p in points])
    m = np.array([p.mean_benefit for p in points])
    return float(np.polyfit(q, m, 1)[0])
