"""Command line entry point: plan, simulate and compare."""
from __future__ import annotations

import argparse
import math
import os
import sys

from .errors import (
    DegenerateField,
    EntranceOffHeadland,
    FieldFileError,
    InterruptedLane,
    InvalidField,
    InvalidParams,
    PlanFieldMismatch,
    Stranded,
    TurnInfeasible,
    Unreachable,
    UnsupportedCase,
)
from .field import normalize
from .fieldio import format_capacity, parse_field_file, write_compare_csv
from .graph import build_graph, dump_graph
from .planners import PATTERNS, make_plan, realize_geometry, write_segments_csv
from .simulator import simulate

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_RUN = 0, 1, 2, 3

INPUT_ERRORS = (FieldFileError, InvalidField, DegenerateField, InterruptedLane,
                EntranceOffHeadland, InvalidParams)
RUN_ERRORS = (Unreachable, TurnInfeasible, Stranded, UnsupportedCase, PlanFieldMismatch)

DEFAULT_CAPACITIES = (math.inf, 5000.0, 2500.0, 1750.0)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def capacity_arg(text: str) -> float:
    if text.strip().lower() == "inf":
        return math.inf
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid capacity {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError("capacity must be positive or 'inf'")
    return value


def threshold_arg(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid threshold {text!r}") from None
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError("threshold must lie in [0, 1]")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fieldcover", description="Headland/lane coverage planning with depot returns.")
    sub = p.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--field", required=True, help="field file (YAML)")
        sp.add_argument("--pattern", choices=PATTERNS + ("all",), default="all")
        sp.add_argument("--out", default=None, help="output directory")
        sp.add_argument("--emit-segments", action="store_true",
                        help="write segment CSVs in field coordinates")
        sp.add_argument("--emit-graph", action="store_true", help="write the transition graph")

    common(sub.add_parser("plan", help="generate coverage plans"))
    for verb in ("simulate", "compare"):
        sp = sub.add_parser(verb, help=f"{verb} missions with depot returns")
        common(sp)
        sp.add_argument("--capacity", action="append", type=capacity_arg,
                        help="working meters per tank, or 'inf' (repeatable)")
        sp.add_argument("--threshold", type=threshold_arg, default=None,
                        help="fill fraction below which early returns are considered")
    return p


def _patterns(arg):
    return PATTERNS if arg == "all" else (arg,)


def _setup(args):
    spec = parse_field_file(args.field)
    nf, chain = normalize(spec)
    g = build_graph(nf)
    plans = {name: make_plan(g, name) for name in _patterns(args.pattern)}
    return nf, chain, g, plans


def _emit(args, chain, g, plans):
    if not (args.emit_segments or args.emit_graph):
        return
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    if args.emit_graph:
        with open(os.path.join(out, "graph.txt"), "w") as fh:
            fh.write(dump_graph(g))
    if args.emit_segments:
        for name, plan in plans.items():
            segs = realize_geometry(plan, g, chain)
            with open(os.path.join(out, f"{name}_segments.csv"), "w", newline="") as fh:
                write_segments_csv(segs, fh)


def cmd_plan(args) -> int:
    nf, chain, g, plans = _setup(args)
    print(f"lanes: {nf.n_lanes}  entrance class: {nf.entrance_class}")
    print(f"{'pattern':<10} {'D1_m':>14} {'working_m':>14}")
    for name, plan in plans.items():
        print(f"{name:<10} {plan.length:>14.4f} {plan.working_length:>14.4f}")
    _emit(args, chain, g, plans)
    return EXIT_OK


def _capacities(args):
    return tuple(args.capacity) if args.capacity else (math.inf,)


def cmd_simulate(args) -> int:
    nf, chain, g, plans = _setup(args)
    caps = _capacities(args)
    print(f"{'pattern':<10} {'capacity_m':>10} {'rho':>4} {'D_total_m':>14}")
    for name, plan in plans.items():
        for cap in caps:
            log = simulate(g, plan, cap, threshold=args.threshold)
            print(f"{name:<10} {format_capacity(cap):>10} {log.n_runs:>4} {log.total_length:>14.4f}")
            if args.out:
                os.makedirs(args.out, exist_ok=True)
                fname = f"mission_{name}_{format_capacity(cap)}.csv"
                log.write_csv(os.path.join(args.out, fname))
    _emit(args, chain, g, plans)
    return EXIT_OK


def compare_rows(g, plans, capacities, threshold=None):
    rows = []
    for name, plan in plans.items():
        for cap in capacities:
            try:
                log = simulate(g, plan, cap, threshold=threshold)
            except Stranded as exc:
                rows.append(dict(pattern=name, capacity_m=cap, error=str(exc)))
                continue
            rows.append(dict(pattern=name, capacity_m=cap, rho=log.n_runs,
                             D_total_m=log.total_length,
                             D_excess_m=log.total_length - plan.length))
    return rows


def cmd_compare(args) -> int:
    nf, chain, g, plans = _setup(args)
    caps = tuple(args.capacity) if args.capacity else DEFAULT_CAPACITIES
    rows = compare_rows(g, plans, caps, args.threshold)
    for r in rows:
        if r.get("error"):
            print(f"{r['pattern']} capacity {format_capacity(r['capacity_m'])}: {r['error']}",
                  file=sys.stderr)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "compare.csv"), "w", newline="") as fh:
            write_compare_csv(rows, fh)
    else:
        write_compare_csv(rows, sys.stdout)
    _emit(args, chain, g, plans)
    return EXIT_RUN if any(r.get("error") for r in rows) else EXIT_OK


COMMANDS = {"plan": cmd_plan, "simulate": cmd_simulate, "compare": cmd_compare}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.verb](args)
    except INPUT_ERRORS as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except RUN_ERRORS as exc:
        print(f"planning error: {exc}", file=sys.stderr)
        return EXIT_RUN


if __name__ == "__main__":
    sys.exit(main())
