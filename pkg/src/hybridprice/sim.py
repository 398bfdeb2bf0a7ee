"""Discrete-event simulation of the hybrid delivery protocol with a money ledger.

Requests are processed tick by tick. A standard requester polls every other
standard user; availability reflects ownership at the end of the previous
tick. Only the designated sharer (the first standard user served by the
provider) ever uploads to peers. Every payment is a ledger entry between two
parties, so the party nets always sum to zero.
"""

from __future__ import annotations

import csv
import enum
import io
import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import groupby
from typing import Hashable, Iterable, Sequence, TextIO

from hybridprice import benefits
from hybridprice.errors import DuplicateRequest, MismatchReport, ParseError, UnknownAgent
from hybridprice.model import (
    Cohort,
    Number,
    PriceSchedule,
    approx_equal,
    format_number,
    parse_number,
)

CP = "CP"
NP = "NP"
ENERGY_SINK = "EnergySink"
RESERVED_PARTIES = frozenset({CP, NP, ENERGY_SINK})

LEDGER_COLUMNS = ("time", "payer", "payee", "amount", "reason")


class Role(str, enum.Enum):
    PREMIUM = "premium"
    STANDARD = "standard"


class Reason(str, enum.Enum):
    CONTENT_PRICE_PREMIUM = "ContentPricePremium"
    CONTENT_PRICE_STANDARD = "ContentPriceStandard"
    NP_DELIVERY_FEE = "NpDeliveryFee"
    SHARE_REWARD = "ShareReward"
    ENERGY_COST = "EnergyCost"


class MessageKind(str, enum.Enum):
    AVAILABILITY_QUERY = "AvailabilityQuery"
    NEGATIVE_RESPONSE = "NegativeResponse"
    POSITIVE_RESPONSE = "PositiveResponse"
    CP_REQUEST = "CpRequest"
    CP_DELIVERY = "CpDelivery"
    PEER_DELIVERY = "PeerDelivery"


@dataclass(frozen=True)
class UserAgent:
    id: Hashable
    role: Role
    owns_content: bool = False
    designated_sharer: bool = False


@dataclass(frozen=True)
class RequestEvent:
    time: int
    user: Hashable


@dataclass(frozen=True)
class LedgerEntry:
    time: int
    payer: Hashable
    payee: Hashable
    amount: Number
    reason: Reason


@dataclass(frozen=True)
class Message:
    time: int
    kind: MessageKind
    source: Hashable
    target: Hashable


@dataclass(frozen=True)
class SimOutcome:
    schedule: PriceSchedule
    f: Number
    agents: tuple[UserAgent, ...]
    requests: tuple[RequestEvent, ...]
    ledger: tuple[LedgerEntry, ...]
    net: dict
    server_deliveries: int
    shares: int
    message_log: tuple[Message, ...]
    sharer: Hashable | None
    final_agents: tuple[UserAgent, ...] = ()

    def net_through(self, time: int) -> dict:
        """Party nets counting only ledger entries up to and including ``time``."""
        return _nets(self.agents, (e for e in self.ledger if e.time <= time))


def natural_key(value: Hashable):
    """Order ``u2`` before ``u10``; integers sort numerically."""
    if isinstance(value, int):
        return ((0, value),)
    return tuple((0, int(part)) if part.isdigit() else (1, part) for part in re.split(r"(\d+)", str(value)) if part)


def _nets(agents: Iterable[UserAgent], entries: Iterable[LedgerEntry]) -> dict:
    net = {CP: 0, NP: 0, ENERGY_SINK: 0}
    for agent in agents:
        net[agent.id] = 0
    for entry in entries:
        net[entry.payer] -= entry.amount
        net[entry.payee] += entry.amount
    return net


def _check_agents(agents: Sequence[UserAgent]) -> dict:
    by_id = {}
    for agent in agents:
        if agent.id in RESERVED_PARTIES:
            raise ValueError(f"agent id {agent.id!r} collides with a reserved party")
        if agent.id in by_id:
            raise ValueError(f"agent {agent.id!r} declared twice")
        if agent.designated_sharer and (agent.role is not Role.STANDARD or not agent.owns_content):
            raise ValueError(f"designated sharer {agent.id!r} must be a standard user holding the content")
        by_id[agent.id] = agent
    if sum(a.designated_sharer for a in agents) > 1:
        raise ValueError("at most one designated sharer")
    return by_id


def run(
    schedule: PriceSchedule,
    f: Number,
    agents: Sequence[UserAgent],
    requests: Sequence[RequestEvent],
) -> SimOutcome:
    agents = tuple(agents)
    requests = tuple(requests)
    by_id = _check_agents(agents)
    seen = set()
    for req in requests:
        if req.user not in by_id:
            raise UnknownAgent(f"request at t={req.time} from undeclared agent {req.user!r}")
        if req.user in seen or by_id[req.user].owns_content:
            raise DuplicateRequest(f"agent {req.user!r} requests the content more than once")
        if req.time < 0:
            raise ValueError(f"negative tick {req.time}")
        seen.add(req.user)

    owners = {a.id for a in agents if a.owns_content}
    sharer = next((a.id for a in agents if a.designated_sharer), None)
    standard_ids = sorted((a.id for a in agents if a.role is Role.STANDARD), key=natural_key)

    ledger: list[LedgerEntry] = []
    messages: list[Message] = []
    server_deliveries = 0
    shares = 0

    def pay(t, payer, payee, amount, reason):
        if amount:
            ledger.append(LedgerEntry(t, payer, payee, amount, reason))

    ordered = sorted(requests, key=lambda r: (r.time, natural_key(r.user)))
    for tick, batch in groupby(ordered, key=lambda r: r.time):
        visible = frozenset(owners)
        for req in batch:
            user = req.user
            if by_id[user].role is Role.PREMIUM:
                messages.append(Message(tick, MessageKind.CP_REQUEST, user, CP))
                messages.append(Message(tick, MessageKind.CP_DELIVERY, CP, user))
                pay(tick, user, CP, f * schedule.require_premium_price(), Reason.CONTENT_PRICE_PREMIUM)
                pay(tick, CP, NP, f * schedule.p_n, Reason.NP_DELIVERY_FEE)
                server_deliveries += 1
                owners.add(user)
                continue
            for peer in standard_ids:
                if peer == user:
                    continue
                messages.append(Message(tick, MessageKind.AVAILABILITY_QUERY, user, peer))
                kind = MessageKind.POSITIVE_RESPONSE if peer in visible else MessageKind.NEGATIVE_RESPONSE
                messages.append(Message(tick, kind, peer, user))
            pay(tick, user, CP, f * schedule.p_std, Reason.CONTENT_PRICE_STANDARD)
            if sharer is not None and sharer in visible:
                messages.append(Message(tick, MessageKind.PEER_DELIVERY, sharer, user))
                pay(tick, CP, sharer, f * schedule.p_u, Reason.SHARE_REWARD)
                pay(tick, sharer, ENERGY_SINK, f * schedule.s, Reason.ENERGY_COST)
                shares += 1
            else:
                messages.append(Message(tick, MessageKind.CP_REQUEST, user, CP))
                messages.append(Message(tick, MessageKind.CP_DELIVERY, CP, user))
                pay(tick, CP, NP, f * schedule.p_n, Reason.NP_DELIVERY_FEE)
                server_deliveries += 1
                if sharer is None:
                    sharer = user
            owners.add(user)

    final_agents = tuple(
        UserAgent(a.id, a.role, a.id in owners, a.id == sharer) for a in agents
    )
    return SimOutcome(
        schedule=schedule,
        f=f,
        agents=agents,
        requests=requests,
        ledger=tuple(ledger),
        net=_nets(agents, ledger),
        server_deliveries=server_deliveries,
        shares=shares,
        message_log=tuple(messages),
        sharer=sharer,
        final_agents=final_agents,
    )


def replay(outcome: SimOutcome) -> SimOutcome:
    return run(outcome.schedule, outcome.f, outcome.agents, outcome.requests)


@dataclass(frozen=True)
class Check:
    name: str
    expected: Number
    actual: Number

    @property
    def ok(self) -> bool:
        return approx_equal(self.expected, self.actual)


@dataclass(frozen=True)
class OracleReport:
    cohort: Cohort
    outcome: SimOutcome
    checks: tuple[Check, ...] = field(default_factory=tuple)
    sharer_checked: bool = False

    @property
    def mismatches(self) -> list[str]:
        return [
            f"{c.name}: expected {format_number(c.expected)}, got {format_number(c.actual)}"
            for c in self.checks
            if not c.ok
        ]

    @property
    def ok(self) -> bool:
        return not self.mismatches


def check_outcome(outcome: SimOutcome, schedule: PriceSchedule, cohort: Cohort, raise_on_mismatch: bool = True) -> OracleReport:
    """Compare a finished run against the closed-form benefit expressions."""
    f = cohort.f
    checks = [
        Check("zero-sum", 0, sum(outcome.net.values())),
        Check("cp net", benefits.ben_cp_raw(schedule, cohort), outcome.net[CP]),
        Check(
            "load reduction",
            benefits.load_reduction(cohort),
            1 - Fraction(outcome.server_deliveries, cohort.x),
        ),
    ]
    sharer_checked = outcome.shares > 0
    if sharer_checked:
        checks.append(Check(f"sharer {outcome.sharer} net", benefits.ben_sharer_raw(schedule, cohort), outcome.net[outcome.sharer]))
    requested = {r.user for r in outcome.requests}
    for agent in outcome.agents:
        if agent.id not in requested:
            continue
        if agent.role is Role.PREMIUM:
            checks.append(Check(f"premium {agent.id} net", -f * schedule.require_premium_price(), outcome.net[agent.id]))
        elif not (sharer_checked and agent.id == outcome.sharer):
            checks.append(Check(f"standard {agent.id} net", -f * schedule.p_std, outcome.net[agent.id]))
    report = OracleReport(cohort, outcome, tuple(checks), sharer_checked)
    if raise_on_mismatch and not report.ok:
        raise MismatchReport(report.mismatches, report)
    return report


def cohort_agents(cohort: Cohort, rng: random.Random) -> tuple[list[UserAgent], list[RequestEvent]]:
    """Agents for a cohort with randomly placed premium users and a random request order."""
    width = len(str(cohort.x))
    ids = [f"u{i:0{width}d}" for i in range(1, cohort.x + 1)]
    premium = set(rng.sample(ids, cohort.y))
    agents = [UserAgent(uid, Role.PREMIUM if uid in premium else Role.STANDARD) for uid in ids]
    order = ids[:]
    rng.shuffle(order)
    requests = [RequestEvent(tick, uid) for tick, uid in enumerate(order, start=1)]
    return agents, requests


def oracle_check(schedule: PriceSchedule, cohort: Cohort, seed: int) -> OracleReport:
    agents, requests = cohort_agents(cohort, random.Random(seed))
    outcome = run(schedule, cohort.f, agents, requests)
    return check_outcome(outcome, schedule, cohort)


def cohort_of(outcome: SimOutcome) -> Cohort:
    """Cohort formed by the agents that actually requested the content."""
    roles = {a.id: a.role for a in outcome.agents}
    users = [r.user for r in outcome.requests]
    y = sum(roles[u] is Role.PREMIUM for u in users)
    return Cohort(len(users), y, outcome.f)


# --- scenario files ---------------------------------------------------------

@dataclass(frozen=True)
class ScenarioScript:
    schedule: PriceSchedule
    f: Number
    agents: tuple[UserAgent, ...]
    requests: tuple[RequestEvent, ...]


_PRICE_KEYS = {"p_n", "p_b", "p_std", "p_u", "s"}


def parse_scenario(lines: Iterable[str], exact: bool = True) -> ScenarioScript:
    """Parse a protocol scenario.

    Layout: ``f=<bytes>`` first, then ``key=value`` price lines, then one
    ``tick,user_id,role`` request per line. ``#`` starts a comment.
    """
    f = None
    prices: dict[str, Number] = {}
    roles: dict[str, Role] = {}
    requests: list[RequestEvent] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" in line:
            if requests:
                raise ParseError("price lines must precede requests", lineno)
            key, _, value = (part.strip() for part in line.partition("="))
            if f is None and key != "f":
                raise ParseError("first entry must be f=<bytes>", lineno, "f")
            if key == "f":
                if f is not None:
                    raise ParseError("f given twice", lineno, "f")
                try:
                    f = int(value)
                except ValueError:
                    raise ParseError(f"f must be an integer byte count, got {value!r}", lineno, "f") from None
                if f < 1:
                    raise ParseError("f must be at least 1", lineno, "f")
                continue
            if key not in _PRICE_KEYS:
                raise ParseError(f"unknown key {key!r}", lineno, key)
            try:
                prices[key] = parse_number(value, exact)
            except ValueError as exc:
                raise ParseError(str(exc), lineno, key) from None
            continue
        if f is None:
            raise ParseError("missing f=<bytes> header", lineno)
        fields = [part.strip() for part in line.split(",")]
        if len(fields) != 3:
            raise ParseError(f"expected tick,user_id,role, got {len(fields)} fields", lineno)
        tick_text, user, role_text = fields
        try:
            tick = int(tick_text)
        except ValueError:
            raise ParseError(f"tick must be an integer, got {tick_text!r}", lineno, 1) from None
        if tick < 0:
            raise ParseError("tick must be nonnegative", lineno, 1)
        if not user or user in RESERVED_PARTIES:
            raise ParseError(f"invalid user id {user!r}", lineno, 2)
        try:
            role = Role(role_text.lower())
        except ValueError:
            raise ParseError(f"role must be premium or standard, got {role_text!r}", lineno, 3) from None
        if roles.setdefault(user, role) is not role:
            raise ParseError(f"user {user!r} declared with two roles", lineno, 3)
        requests.append(RequestEvent(tick, user))
    if f is None:
        raise ParseError("missing f=<bytes> header", 1)
    for key in ("p_n", "p_std"):
        if key not in prices:
            raise ParseError(f"missing price {key}", 1, key)
    schedule = PriceSchedule(**prices)
    agents = tuple(UserAgent(uid, role) for uid, role in sorted(roles.items(), key=lambda kv: natural_key(kv[0])))
    return ScenarioScript(schedule, f, agents, tuple(requests))


def run_script(script: ScenarioScript) -> SimOutcome:
    return run(script.schedule, script.f, script.agents, script.requests)


def write_ledger_csv(ledger: Iterable[LedgerEntry], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(LEDGER_COLUMNS)
    for e in ledger:
        writer.writerow([e.time, e.payer, e.payee, format_number(e.amount), e.reason.value])


def ledger_csv(ledger: Iterable[LedgerEntry]) -> str:
    buf = io.StringIO()
    write_ledger_csv(ledger, buf)
    return buf.getvalue()


def net_summary(net: dict) -> dict[str, str]:
    fixed = [CP, NP, ENERGY_SINK]
    users = sorted((k for k in net if k not in RESERVED_PARTIES), key=natural_key)
    return {str(k): format_number(net[k]) for k in fixed + users}



def random_case(rng: random.Random, max_x: int = 50) -> tuple[PriceSchedule, Cohort]:
    """Random valid rational schedule and cohort with ``x <= max_x``."""

    def rate(lo: int, hi: int) -> Fraction:
        return Fraction(rng.randint(lo, hi), rng.randint(1, 20))

    p_n = rate(1, 40)
    p_std = p_n + rate(1, 60)
    p_b = p_std + rate(1, 80)
    schedule = PriceSchedule(p_n=p_n, p_std=p_std, p_b=p_b, p_u=rate(0, 80), s=rate(0, 20))
    x = rng.randint(1, max_x)
    return schedule, Cohort(x, rng.randint(0, x), rng.randint(1, 10**6))
