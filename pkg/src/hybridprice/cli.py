"""Command-line front end.

Exit codes: 0 success, 2 bad input or violated constraint, 3 verification
failure. Tabular commands print CSV by default; ``--format json`` mirrors the
same fields.
"""

from __future__ import annotations

import argparse
import csv
import json
import random
import sys
from contextlib import contextmanager
from fractions import Fraction
from typing import Iterable, Sequence

from hybridprice import bargaining, benefits, policy, sim, trace
from hybridprice.errors import HybridPriceError, InvalidSchedule, ParseError
from hybridprice.model import (
    Cohort,
    NormalizedPrices,
    PriceSchedule,
    classify_scenario,
    default_numeric_mode,
    format_number,
    parse_number,
    validate,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_VERIFY = 3

SWEEP_COLUMNS = ("n", "r", "k", "x", "benefit")

SWEEP_PRESETS = {
    "fig4a": {"n": "2", "x": "10", "k": "0:1:0.1", "r": "1.5:4:0.5"},
    "fig4b": {"n": "2", "k": "0.5", "r": "1.5:4:0.5", "x": "10:100:10"},
    "fig4c": {"n": "2", "r": "2", "k": "0:1:0.1", "x": "10:100:10"},
}


class UsageError(Exception):
    """Bad flags or input values; maps to exit code 2."""


# --- helpers -----------------------------------------------------------------

def _num(text, args):
    try:
        return parse_number(text, exact=args.numeric == "exact")
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def parse_grid(spec: str) -> list[Fraction]:
    """``a,b,c`` list or inclusive ``start:stop:step`` range, as exact decimals."""
    spec = spec.strip()
    if not spec:
        raise UsageError("empty grid")
    try:
        if ":" in spec:
            parts = spec.split(":")
            if len(parts) != 3:
                raise UsageError(f"range grid must be start:stop:step, got {spec!r}")
            start, stop, step = (parse_number(p) for p in parts)
            if step <= 0 or stop < start:
                raise UsageError(f"empty or unbounded grid {spec!r}")
            count = int((stop - start) / step)
            return [start + i * step for i in range(count + 1)]
        return [parse_number(p) for p in spec.split(",")]
    except ValueError as exc:
        raise UsageError(f"bad grid {spec!r}: {exc}") from None


@contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            yield fh


@contextmanager
def _input(path):
    if path == "-":
        yield sys.stdin
    else:
        try:
            fh = open(path, encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot read {path}: {exc.strerror}") from None
        with fh:
            yield fh


def _fmt(value):
    if isinstance(value, (Fraction, float)):
        return format_number(value)
    return value


def _emit_record(record: dict, args) -> None:
    with _output(args.output) as out:
        if args.format == "json":
            json.dump({k: _fmt(v) for k, v in record.items()}, out, indent=2)
            out.write("\n")
        else:
            writer = csv.writer(out, lineterminator="\n")
            writer.writerow(["key", "value"])
            for key, value in record.items():
                value = _fmt(value)
                writer.writerow([key, json.dumps(value) if isinstance(value, (dict, bool)) or value is None else value])


def _emit_rows(columns: Sequence[str], rows: Iterable[Sequence], args) -> None:
    rows = [[_fmt(v) for v in row] for row in rows]
    with _output(args.output) as out:
        if args.format == "json":
            json.dump([dict(zip(columns, row)) for row in rows], out, indent=2)
            out.write("\n")
        else:
            writer = csv.writer(out, lineterminator="\n")
            writer.writerow(columns)
            writer.writerows(rows)


def _read_config(path: str) -> dict[str, str]:
    values = {}
    with _input(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ParseError("expected key=value", lineno)
            values[key.strip()] = value.strip()
    return values


# --- commands ----------------------------------------------------------------

def cmd_price(args) -> int:
    conf = _read_config(args.config) if args.config else {}

    def pick(flag, key):
        value = getattr(args, flag)
        return value if value is not None else conf.get(key)

    raw = {"p_n": pick("pn", "p_n"), "p_std": pick("pstd", "p_std"), "p_b": pick("pb", "p_b"),
           "s": pick("s", "s")}
    counts = {"x": pick("x", "x"), "y": pick("y", "y"), "f": pick("f", "f")}
    missing = [k for k in ("p_n", "p_std") if raw[k] is None] + [k for k in ("x", "y") if counts[k] is None]
    if missing:
        raise UsageError("missing " + ", ".join(missing))
    schedule = PriceSchedule(**{k: _num(v, args) for k, v in raw.items() if v is not None})
    try:
        cohort = Cohort(int(counts["x"]), int(counts["y"]), int(counts["f"] or 1))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    violations = validate(schedule)
    if violations:
        raise InvalidSchedule(violations)
    result, settled = bargaining.settle(schedule, cohort)
    report = benefits.benefit_report(settled, cohort)
    record = {
        "scenario": classify_scenario(cohort).value,
        "nbs": result.outcome.value,
        "p_u": result.reward if result.settled else result.outcome.value,
        "ben_cp": report.cp,
        "ben_user": report.sharer,
        "load_reduction": report.load_reduction,
        "equilibrium_form": report.settled,
    }
    if result.settled:
        record["f_eq"] = result.state.f_eq
    _emit_record(record, args)
    return EXIT_OK


def cmd_compare(args) -> int:
    m, n = _num(args.m, args), _num(args.n, args)
    prices = NormalizedPrices.from_levels(m, n)
    report = bargaining.compare_cp(prices, args.x, args.y, _num(args.pn, args), _num(args.f, args))
    _emit_record({
        "delta_21": report.delta_21,
        "delta_23": report.delta_23,
        "dominant": report.dominant.value,
        "two_m_gt_n_plus_2": report.two_m_gt_n_plus_2,
        "m_gt_1_5": report.m_gt_1_5,
    }, args)
    return EXIT_OK


def cmd_sweep(args) -> int:
    grids = dict(SWEEP_PRESETS[args.preset]) if args.preset else {}
    for key in ("n", "r", "k", "x"):
        if getattr(args, key) is not None:
            grids[key] = getattr(args, key)
    missing = [key for key in ("n", "r", "k", "x") if key not in grids]
    if missing:
        raise UsageError("sweep needs grids for " + ", ".join(missing))
    values = {key: parse_grid(spec) for key, spec in grids.items()}
    if any(v <= 1 for v in values["n"] + values["r"]):
        raise UsageError("n and r grids must be > 1")
    if any(not 0 <= v <= 1 for v in values["k"]):
        raise UsageError("k grid must lie in [0, 1]")
    if any(v < 1 for v in values["x"]):
        raise UsageError("x grid must be >= 1")
    if args.numeric == "float":
        values = {key: [float(v) for v in vs] for key, vs in values.items()}
    p_n, f = _num(args.pn, args), _num(args.f, args)
    rows = []
    for n in values["n"]:
        for r in values["r"]:
            for k in values["k"]:
                prices = NormalizedPrices.from_ratio(n, r, k)
                for x in values["x"]:
                    rows.append([n, r, k, x, benefits.ben_cp_eq_normalized(prices, x, p_n, f)])
    _emit_rows(SWEEP_COLUMNS, rows, args)
    return EXIT_OK


def cmd_simulate(args) -> int:
    with _input(args.scenario) as fh:
        script = sim.parse_scenario(fh, exact=args.numeric == "exact")
    violations = validate(script.schedule)
    if violations:
        raise InvalidSchedule(violations)
    outcome = sim.run_script(script)
    net = outcome.net if args.until is None else outcome.net_through(args.until)
    ledger = [e for e in outcome.ledger if args.until is None or e.time <= args.until]
    with _output(args.output) as out:
        if args.format == "json":
            json.dump({
                "ledger": [{"time": e.time, "payer": str(e.payer), "payee": str(e.payee),
                            "amount": format_number(e.amount), "reason": e.reason.value} for e in ledger],
                "net": sim.net_summary(net),
                "server_deliveries": outcome.server_deliveries,
                "shares": outcome.shares,
            }, out, indent=2)
            out.write("\n")
        else:
            sim.write_ledger_csv(ledger, out)
    if args.format != "json":
        with _output(args.summary) if args.summary else _stderr() as out:
            writer = csv.writer(out, lineterminator="\n")
            writer.writerow(["party", "net"])
            writer.writerows(sim.net_summary(net).items())
    if args.check:
        report = sim.check_outcome(outcome, script.schedule, sim.cohort_of(outcome), raise_on_mismatch=False)
        if not report.ok:
            for line in report.mismatches:
                print(f"mismatch: {line}", file=sys.stderr)
            return EXIT_VERIFY
    return EXIT_OK


@contextmanager
def _stderr():
    yield sys.stderr


def cmd_oracle(args) -> int:
    rng = random.Random(args.seed)
    failures = 0
    for case in range(args.cases):
        schedule, cohort = sim.random_case(rng, args.max_x)
        if args.numeric == "float":
            schedule = PriceSchedule(**{k: float(v) for k, v in vars(schedule).items()})
        report = sim.check_outcome(
            sim.run(schedule, cohort.f, *sim.cohort_agents(cohort, rng)), schedule, cohort,
            raise_on_mismatch=False,
        )
        if not report.ok:
            failures += 1
            print(f"case {case} x={cohort.x} y={cohort.y}: " + "; ".join(report.mismatches), file=sys.stderr)
    _emit_record({"cases": args.cases, "mismatches": failures}, args)
    return EXIT_VERIFY if failures else EXIT_OK


def _weights(args, phi):
    a, b = _num(args.a, args), _num(args.b, args)
    try:
        return policy.PolicyWeights(a, b, phi)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_calibrate(args) -> int:
    r, p_n, f = _num(args.r, args), _num(args.pn, args), _num(args.f, args)
    phi = policy.calibrate_phi(r, _num(args.a, args), _num(args.b, args), p_n, f)
    weights = _weights(args, phi)
    prices = policy.asymptotic_policy(weights, p_n, f)
    _emit_record({
        "phi": phi,
        "p_b": prices.p_b,
        "p_std": prices.p_std,
        "ratio": prices.p_b / prices.p_std,
        "feasible": prices.feasible,
    }, args)
    return EXIT_OK


def cmd_policy(args) -> int:
    weights = _weights(args, _num(args.phi, args))
    p_n, f = _num(args.pn, args), _num(args.f, args)
    prices = policy.asymptotic_policy(weights, p_n, f)
    record = {
        "p_b": prices.p_b,
        "p_std": prices.p_std,
        "feasible": prices.feasible,
    }
    if args.x is not None:
        exact = policy.exact_indifference(weights, p_n, f, args.x)
        record.update({
            "gap": policy.price_gap(weights, p_n, f, args.x),
            "exact_p_b": exact.p_b,
            "exact_p_std": exact.p_std,
            "exact_feasible": exact.feasible,
        })
        record.update({f"residual_{k}": v for k, v in exact.residuals.items()})
    _emit_record(record, args)
    return EXIT_OK


def _generated(args):
    return trace.generate_trace(
        args.seed, args.users, args.contents, args.zipf, args.premium_prob,
        args.size, args.sessions_per_user,
    )


def cmd_gen_trace(args) -> int:
    records = _generated(args)
    with _output(args.output) as out:
        trace.write_trace(records, out)
    return EXIT_OK


def cmd_mc(args) -> int:
    if args.trace:
        with _input(args.trace) as fh:
            records = trace.parse_trace(fh)
    else:
        records = _generated(args)
    if args.replicates < 1:
        raise UsageError("replicates must be >= 1")
    grid = parse_grid(args.grid)
    if any(not 0 <= q <= 1 for q in grid):
        raise UsageError("grid must lie in [0, 1]")
    n, r = parse_number(args.n), parse_number(args.r)
    if not (n > 1 and r > 1):
        raise UsageError("need n > 1 and r > 1")
    points = trace.mc_benefit_curve(
        trace.user_pool(records), trace.extract_cohorts(records), n, r, grid, args.replicates, args.seed,
    )
    rows = [[repr(p.premium_fraction), repr(p.mean_benefit), repr(p.ci_low), repr(p.ci_high), p.replicates]
            for p in points]
    _emit_rows(trace.CURVE_COLUMNS, rows, args)
    return EXIT_OK


# --- parser ------------------------------------------------------------------

def _add_generator_flags(p) -> None:
    p.add_argument("--users", type=int, default=100)
    p.add_argument("--contents", type=int, default=5)
    p.add_argument("--zipf", type=float, default=0.8, help="Zipf exponent of content popularity")
    p.add_argument("--premium-prob", type=float, default=0.0)
    p.add_argument("--size", type=int, default=trace.ONE_GB, help="bytes per session")
    p.add_argument("--sessions-per-user", type=int, default=10)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--numeric", choices=("exact", "float"), default=None,
                        help="arithmetic mode (default from HYBRIDPRICE_NUMERIC, else exact)")
    common.add_argument("-o", "--output", default="-", help="output path, '-' for stdout")

    parser = argparse.ArgumentParser(prog="hybridprice", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("price", parents=[common], help="bargaining reward and equilibrium benefits")
    p.add_argument("--config", help="flat key=value file (p_n, p_std, p_b, s, x, y, f)")
    p.add_argument("--pn")
    p.add_argument("--pstd")
    p.add_argument("--pb")
    p.add_argument("--s")
    p.add_argument("--x")
    p.add_argument("--y")
    p.add_argument("--f")
    p.set_defaults(func=cmd_price)

    p = sub.add_parser("compare", parents=[common], help="all-premium benefit gaps and thresholds")
    p.add_argument("--m", required=True)
    p.add_argument("--n", required=True)
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--y", type=int, default=0)
    p.add_argument("--pn", default="1")
    p.add_argument("--f", default="1")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", parents=[common], help="normalized benefit surface")
    p.add_argument("--preset", choices=sorted(SWEEP_PRESETS))
    for key in ("n", "r", "k", "x"):
        p.add_argument(f"--{key}", help="list a,b,c or range start:stop:step")
    p.add_argument("--pn", default="1")
    p.add_argument("--f", default="1")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", parents=[common], help="run a protocol scenario file")
    p.add_argument("scenario", help="scenario file, '-' for stdin")
    p.add_argument("--check", action="store_true", help="compare nets against closed forms")
    p.add_argument("--until", type=int, help="only count ledger entries up to this tick")
    p.add_argument("--summary", help="write party nets here instead of stderr")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("oracle", parents=[common], help="randomized ledger-vs-formula check")
    p.add_argument("--cases", type=int, default=100)
    p.add_argument("--max-x", type=int, default=50)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("calibrate", parents=[common], help="phi for a target price ratio")
    p.add_argument("--r", required=True)
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--pn", default="1")
    p.add_argument("--f", default="1")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("policy", parents=[common], help="load-aware prices")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--phi", required=True)
    p.add_argument("--pn", default="1")
    p.add_argument("--f", default="1")
    p.add_argument("--x", type=int)
    p.set_defaults(func=cmd_policy)

    p = sub.add_parser("gen-trace", parents=[common], help="synthetic Zipf session trace")
    p.add_argument("--seed", type=int, required=True)
    _add_generator_flags(p)
    p.set_defaults(func=cmd_gen_trace)

    p = sub.add_parser("mc", aliases=["mc-curve"], parents=[common],
                       help="Monte Carlo benefit vs premium share")
    p.add_argument("--trace", help="trace CSV ('-' for stdin); otherwise one is generated")
    _add_generator_flags(p)
    p.add_argument("--n", required=True)
    p.add_argument("--r", required=True)
    p.add_argument("--grid", default="0:1:0.1")
    p.add_argument("--replicates", type=int, default=200)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=cmd_mc)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.numeric is None:
            args.numeric = default_numeric_mode()
        return args.func(args)
    except InvalidSchedule as exc:
        for violation in exc.violations:
            print(f"violation: {violation}", file=sys.stderr)
        return EXIT_INPUT
    except (UsageError, HybridPriceError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
