"""Command-line entry point.

Subcommands: build, validate, verify, labels, audit, bounds, sweep,
frontier, fuzz, mg, mg-query, plot-data. Programs travel between commands
as the JSON serialization on files or stdin/stdout, so subcommands compose
as pipelines. Exit status: 0 for valid/consistent/success, 1 for
invalid/ruled_out/property violation, 2 for usage errors.

Budgets can be overridden with environment variables:
ROBPCOUNT_MAX_WIDTH, ROBPCOUNT_MAX_INPUTS, ROBPCOUNT_MAX_CELLS,
ROBPCOUNT_MAX_PAINT, ROBPCOUNT_FRONTIER_N, ROBPCOUNT_FRONTIER_W.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from fractions import Fraction

from . import bounds as bounds_mod
from . import constructions, oracle, potential, streaming
from .exact import format_rational, parse_rational
from .labeling import compute_labels, edge_monotone, minimal_error, verify
from .robp import (
    Alphabet,
    Robp,
    binary_alphabet,
    counter_alphabet,
    parallel_alphabet,
    read_robp,
    validate,
    write_robp,
)


def _env_int(name: str, default: int) -> int:
    value = os.environ.get(name)
    return int(value) if value else default


def _budgets():
    return {
        "max_width": _env_int("ROBPCOUNT_MAX_WIDTH", constructions.DEFAULT_MAX_WIDTH),
        "max_inputs": _env_int("ROBPCOUNT_MAX_INPUTS", oracle.DEFAULT_MAX_INPUTS),
        "max_cells": _env_int("ROBPCOUNT_MAX_CELLS", potential.DEFAULT_MAX_BOX_CELLS),
        "max_paint": _env_int("ROBPCOUNT_MAX_PAINT", potential.DEFAULT_MAX_PAINT),
        "frontier_n": _env_int("ROBPCOUNT_FRONTIER_N", oracle.DEFAULT_FRONTIER_N),
        "frontier_w": _env_int("ROBPCOUNT_FRONTIER_W", oracle.DEFAULT_FRONTIER_W),
    }


def _read_program(path: str | None) -> Robp:
    text = sys.stdin.read() if path in (None, "-") else open(path).read()
    return read_robp(text)


def _write_text(path: str | None, text: str):
    if path in (None, "-"):
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _problem_from_flags(args) -> Alphabet:
    if args.problem == "binary":
        return binary_alphabet()
    if args.problem == "counter":
        return counter_alphabet(args.k)
    return parallel_alphabet(args.k)


def _json_out(obj) -> int:
    print(json.dumps(obj, sort_keys=True, separators=(",", ": ")))
    return 0


def _cmd_build(args) -> int:
    budgets = _budgets()
    if args.kind == "exact":
        p = constructions.exact_counter(args.n, args.k, max_width=budgets["max_width"])
    elif args.kind == "tribes":
        p = constructions.tribes(args.n, args.w, outputs=args.tribes_outputs)
    elif args.kind == "rounded":
        p = constructions.rounded_counter(
            args.n, args.k, args.delta, max_width=budgets["max_width"]
        )
    else:
        values = [parse_rational(v) for v in args.value.split(",")]
        p = constructions.constant_program(args.n, values)
    _write_text(args.output, write_robp(p))
    return 0


def _cmd_validate(args) -> int:
    report = validate(_read_program(args.input))
    _json_out(
        {
            "valid": report.valid,
            "width": report.width,
            "layer_sizes": list(report.layer_sizes),
            "violations": [list(v) for v in report.violations],
        }
    )
    return 0 if report.valid else 1


def _cmd_verify(args) -> int:
    p = _read_program(args.input)
    cert = verify(p, _problem_from_flags(args), args.delta)
    _json_out(
        {
            "valid": cert.valid,
            "delta": format_rational(cert.delta),
            "max_halfwidth": format_rational(cert.max_halfwidth),
            "worst": None
            if cert.worst is None
            else [cert.worst[0], cert.worst[1], format_rational(cert.worst[2])],
        }
    )
    return 0 if cert.valid else 1


def _cmd_labels(args) -> int:
    p = _read_program(args.input)
    lp = compute_labels(p, args.mode)
    writer = csv.writer(sys.stdout)
    d = lp.dims
    writer.writerow(
        ["layer", "vertex"]
        + [f"lo_{j + 1}" for j in range(d)]
        + [f"hi_{j + 1}" for j in range(d)]
    )
    for t in range(p.n + 1):
        lo, hi = lp.layer_rectangles(t)
        for v in range(lo.shape[0]):
            writer.writerow([t, v] + [int(x) for x in lo[v]] + [int(x) for x in hi[v]])
    return 0


def _audit_reports(p: Robp, args, budgets):
    limits = {"max_cells": budgets["max_cells"], "max_paint": budgets["max_paint"]}
    if args.family == "counter":
        lp = compute_labels(p, "potential")
        prof = potential.profile_counter(lp, **limits)
        reports = []
        if args.check in ("growth", "both"):
            reports.append(potential.audit_growth_counter(lp, p.width, prof))
        if args.check in ("final", "both"):
            if args.delta is None:
                raise SystemExit("audit --family counter --check final needs --delta")
            reports.append(potential.audit_final_counter(lp, args.delta, prof))
        return reports
    lp = compute_labels(p, "full")
    prof = potential.profile_parallel(lp, **limits)
    reports = []
    if args.check in ("growth", "both"):
        reports.append(potential.audit_growth_parallel(lp, p.width, prof))
    if args.check in ("final", "both"):
        reports.append(potential.audit_final_parallel(lp, prof))
    return reports


def _cmd_audit(args) -> int:
    p = _read_program(args.input)
    reports = _audit_reports(p, args, _budgets())
    writer = csv.writer(sys.stdout)
    writer.writerow(["t", "lhs", "rhs", "slack", "pass"])
    ok = True
    for report in reports:
        for row in report.rows:
            writer.writerow(
                [
                    row.t,
                    format_rational(Fraction(row.lhs)),
                    format_rational(Fraction(row.rhs)),
                    format_rational(Fraction(row.slack)),
                    str(row.passed).lower(),
                ]
            )
        ok = ok and report.overall_pass
    return 0 if ok else 1


def _cmd_bounds(args) -> int:
    report = bounds_mod.thm_main_feasible(args.n, args.k, args.w, args.delta)
    _json_out(
        {
            "n": report.n,
            "k": report.k,
            "w": report.w,
            "delta": format_rational(report.delta),
            "m": report.m,
            "lhs": format_rational(report.lhs),
            "rhs": format_rational(report.rhs),
            "verdict": report.verdict,
        }
    )
    return 1 if report.ruled_out else 0


def _cmd_sweep(args) -> int:
    writer = csv.writer(sys.stdout)
    writer.writerow(["n", "k", "w", "delta", "m", "lhs", "rhs", "verdict"])
    for w in range(args.w_min, args.w_max + 1):
        r = bounds_mod.thm_main_feasible(args.n, args.k, w, args.delta)
        writer.writerow(
            [
                r.n,
                r.k,
                r.w,
                format_rational(r.delta),
                r.m,
                format_rational(r.lhs),
                format_rational(r.rhs),
                r.verdict,
            ]
        )
    return 0


def _cmd_frontier(args) -> int:
    budgets = _budgets()
    writer = csv.writer(sys.stdout)
    writer.writerow(["n", "w", "delta_num", "delta_den", "lb_num", "lb_den"])
    for n in range(1, args.n_max + 1):
        for w in range(1, args.w_max + 1):
            point = oracle.frontier(
                n, w, max_n=budgets["frontier_n"], max_w=budgets["frontier_w"]
            )
            row = [n, w, point.delta_star.numerator, point.delta_star.denominator]
            if w >= 3:
                lb = bounds_mod.lb_small_w(n, 2, w)
                row += [lb.numerator, lb.denominator]
            else:
                row += ["", ""]
            writer.writerow(row)
    return 0


def _fuzz_one(seed: int, n: int, w: int, alphabet: Alphabet, max_inputs: int) -> str | None:
    p = oracle.random_robp(n, alphabet, w, seed)
    report = validate(p)
    if not report.valid:
        return f"seed {seed}: generated program failed validate: {report.violations[:3]}"
    if report.width > w:
        return f"seed {seed}: width {report.width} exceeds requested {w}"
    lp = compute_labels(p, "full")
    if not edge_monotone(lp):
        return f"seed {seed}: edge monotonicity violated"
    delta_star, _ = minimal_error(p, alphabet)
    for delta in (delta_star, delta_star + 1, delta_star - Fraction(1, 2)):
        if delta < 0:
            continue
        lab = verify(p, alphabet, delta).valid
        exh = oracle.exhaustive_verify(p, alphabet, delta, max_inputs=max_inputs)
        if lab != exh:
            return f"seed {seed}: verifier and exhaustive oracle disagree at delta={delta}"
    return None


def _cmd_fuzz(args) -> int:
    budgets = _budgets()
    alphabet = _problem_from_flags(args)
    failures = 0
    for seed in range(args.seed, args.seed + args.seeds):
        problem = _fuzz_one(seed, args.n, args.w, alphabet, budgets["max_inputs"])
        if problem:
            failures += 1
            print(problem, file=sys.stderr)
    print(
        json.dumps(
            {
                "seeds": args.seeds,
                "first_seed": args.seed,
                "n": args.n,
                "w": args.w,
                "alphabet": alphabet.kind,
                "failures": failures,
            },
            sort_keys=True,
        )
    )
    return 0 if failures == 0 else 1


def _read_stream(path: str | None) -> list[int]:
    text = sys.stdin.read() if path in (None, "-") else open(path).read()
    return [int(tok) for tok in text.split()]


def _cmd_mg(args, with_query: bool) -> int:
    stream = _read_stream(args.input)
    summary = streaming.mg_run(stream, args.k, args.U)
    out = streaming.mg_finalize(summary)
    doc = {
        "n": out.n,
        "k": out.k,
        "U": out.U,
        "elements": list(out.elements),
        "estimates": list(out.estimates),
    }
    if with_query:
        doc["query"] = args.query
        doc["estimate"] = format_rational(streaming.to_approx_counts(out, args.query))
    return _json_out(doc)


def _cmd_plot_data(args) -> int:
    budgets = _budgets()
    writer = csv.writer(sys.stdout)
    writer.writerow(["series", "x", "y"])

    def emit(series: str, x, y: Fraction):
        writer.writerow([series, x, f"{float(y):.12g}"])

    if args.mode == "small-w":
        n = args.n
        for w in range(max(3, args.w_min), args.w_max + 1):
            if 10 * w > n:
                break
            emit("lower_bound", w, bounds_mod.lb_small_w(n, 2, w))
            gap = constructions.tribes_plan(n, w).gap
            emit("upper_bound", w, Fraction(n) / 2 - Fraction(gap, 2))
            if n <= budgets["frontier_n"] and w <= budgets["frontier_w"]:
                emit("oracle", w, oracle.frontier(n, w).delta_star)
    elif args.mode == "small-err":
        if args.delta_min > args.delta_max:
            raise SystemExit("empty sweep")
        n, k = args.n, args.k
        delta = args.delta_min
        while delta <= args.delta_max:
            emit("lower_bound", str(delta), Fraction(bounds_mod.min_consistent_width(n, k, delta)))
            emit(
                "upper_bound",
                str(delta),
                Fraction(constructions.rounded_counter_width_bound(n, k, delta)),
            )
            delta += args.delta_step
    else:  # frontier
        for n in range(1, args.n_max + 1):
            for w in range(1, min(args.w_max, budgets["frontier_w"]) + 1):
                point = oracle.frontier(n, w, max_n=budgets["frontier_n"])
                emit("oracle", f"{n}:{w}", point.delta_star)
                if w >= 3:
                    emit("lower_bound", f"{n}:{w}", bounds_mod.lb_small_w(n, 2, w))
                    if 10 * w <= n:
                        gap = constructions.tribes_plan(n, w).gap
                        emit("upper_bound", f"{n}:{w}", Fraction(n) / 2 - Fraction(gap, 2))
    return 0


def _rational_flag(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="robpcount",
        description="Build, verify and audit read-once branching programs "
        "for approximate counting.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="construct a program and print its serialization")
    b.add_argument("--kind", required=True, choices=["exact", "tribes", "rounded", "constant"])
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--k", type=int, default=2)
    b.add_argument("--w", type=int, default=3)
    b.add_argument("--delta", type=_rational_flag, default=Fraction(10))
    b.add_argument("--value", default="0", help="constant outputs, comma-separated rationals")
    b.add_argument("--tribes-outputs", choices=["symmetric", "optimal"], default="symmetric")
    b.add_argument("-o", "--output", default=None)

    v = sub.add_parser("validate", help="structural validation report")
    v.add_argument("-i", "--input", default=None)

    ver = sub.add_parser("verify", help="exact correctness certificate")
    ver.add_argument("-i", "--input", default=None)
    ver.add_argument("--problem", choices=["binary", "counter", "parallel"], required=True)
    ver.add_argument("--k", type=int, default=2)
    ver.add_argument("--delta", type=_rational_flag, required=True)

    lab = sub.add_parser("labels", help="per-vertex rectangle labels as CSV")
    lab.add_argument("-i", "--input", default=None)
    lab.add_argument("--mode", choices=["full", "potential"], default="full")

    aud = sub.add_parser("audit", help="potential growth/final audit as CSV")
    aud.add_argument("-i", "--input", default=None)
    aud.add_argument("--family", choices=["counter", "parallel"], default="counter")
    aud.add_argument("--check", choices=["growth", "final", "both"], default="growth")
    aud.add_argument("--delta", type=_rational_flag, default=None)

    bo = sub.add_parser("bounds", help="feasibility inequality report")
    bo.add_argument("--n", type=int, required=True)
    bo.add_argument("--k", type=int, required=True)
    bo.add_argument("--w", type=int, required=True)
    bo.add_argument("--delta", type=_rational_flag, required=True)

    sw = sub.add_parser("sweep", help="feasibility verdicts over a width range")
    sw.add_argument("--n", type=int, required=True)
    sw.add_argument("--k", type=int, required=True)
    sw.add_argument("--delta", type=_rational_flag, required=True)
    sw.add_argument("--w-min", type=int, default=1)
    sw.add_argument("--w-max", type=int, required=True)

    fr = sub.add_parser("frontier", help="exact width/error frontier as CSV")
    fr.add_argument("--n-max", type=int, required=True)
    fr.add_argument("--w-max", type=int, required=True)

    fz = sub.add_parser("fuzz", help="random-program property check")
    fz.add_argument("--seeds", type=int, default=100)
    fz.add_argument("--seed", type=int, default=0, help="first seed")
    fz.add_argument("--n", type=int, default=6)
    fz.add_argument("--w", type=int, default=3)
    fz.add_argument("--problem", choices=["binary", "counter", "parallel"], default="binary")
    fz.add_argument("--k", type=int, default=2)

    mg = sub.add_parser("mg", help="Misra-Gries heavy hitters over a stream")
    mg.add_argument("--k", type=int, required=True)
    mg.add_argument("--U", type=int, required=True)
    mg.add_argument("-i", "--input", default=None)

    mq = sub.add_parser("mg-query", help="heavy hitters plus one frequency estimate")
    mq.add_argument("--k", type=int, required=True)
    mq.add_argument("--U", type=int, required=True)
    mq.add_argument("--query", type=int, required=True)
    mq.add_argument("-i", "--input", default=None)

    pd = sub.add_parser("plot-data", help="envelope curves as (series, x, y) CSV")
    pd.add_argument("--mode", choices=["small-w", "small-err", "frontier"], required=True)
    pd.add_argument("--n", type=int, default=100)
    pd.add_argument("--k", type=int, default=2)
    pd.add_argument("--n-max", type=int, default=8)
    pd.add_argument("--w-min", type=int, default=3)
    pd.add_argument("--w-max", type=int, default=10)
    pd.add_argument("--delta-min", type=_rational_flag, default=Fraction(10))
    pd.add_argument("--delta-max", type=_rational_flag, default=Fraction(20))
    pd.add_argument("--delta-step", type=_rational_flag, default=Fraction(1))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "build": _cmd_build,
        "validate": _cmd_validate,
        "verify": _cmd_verify,
        "labels": _cmd_labels,
        "audit": _cmd_audit,
        "bounds": _cmd_bounds,
        "sweep": _cmd_sweep,
        "frontier": _cmd_frontier,
        "fuzz": _cmd_fuzz,
        "mg": lambda a: _cmd_mg(a, with_query=False),
        "mg-query": lambda a: _cmd_mg(a, with_query=True),
        "plot-data": _cmd_plot_data,
    }
    try:
        return handlers[args.command](args)
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
