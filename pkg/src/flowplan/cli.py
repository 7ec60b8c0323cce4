"""Command-line front end.

Exit codes: 0 success, 1 input error, 2 invalid plan, 3 infeasible or
unsupported (labeled) instance, 4 oracle size guard exceeded.
"""

from __future__ import annotations

import argparse
import sys
from typing import List, Optional, TextIO

from . import oracle, planner
from .formats import format_paths, format_plan, parse_escape, parse_instance, parse_plan, plan_footer
from .graph import GOAL_REPLACEMENT, LABELED, Plan, compute_ell, validate_plan

OK, INPUT_ERROR, INVALID_PLAN, INFEASIBLE, GUARD = 0, 1, 2, 3, 4

OBJECTIVES = ("feasible", "makespan", "distance", "arrival")


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="flowplan", description="Unlabeled multi-agent path planning via network flow.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="plan paths for an instance")
    s.add_argument("--objective", choices=OBJECTIVES, default="feasible")
    s.add_argument("--in", dest="infile", required=True)
    s.add_argument("--out", dest="outfile")
    s.add_argument("--horizon", type=int, help="time-step budget (default: the sufficient bound)")

    v = sub.add_parser("verify", help="check a plan file against an instance")
    v.add_argument("--in", dest="infile", required=True)
    v.add_argument("--plan", dest="planfile", required=True)

    e = sub.add_parser("escape", help="decide the escape problem")
    e.add_argument("--in", dest="infile", required=True)

    o = sub.add_parser("oracle", help="exact optimum by exhaustive search (tiny instances)")
    o.add_argument("--objective", choices=OBJECTIVES[1:], default="makespan")
    o.add_argument("--in", dest="infile", required=True)

    t = sub.add_parser("stats", help="print instance size and horizon bounds")
    t.add_argument("--in", dest="infile", required=True)
    return p


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _load(path: str):
    return parse_instance(_read(path))


def cmd_solve(args, out: TextIO) -> int:
    inst = _load(args.infile)
    if inst.mode == LABELED:
        print("labeled instances are not solved; use unlabeled or goal_replacement mode", file=out)
        return INFEASIBLE
    if args.horizon is not None and args.horizon < 1:
        raise InputError("--horizon must be positive")
    obj = args.objective
    try:
        if obj == "feasible":
            result = planner.solve_feasible(inst, args.horizon)
        elif obj == "makespan":
            result = planner.solve_min_makespan(inst, args.horizon)
        elif obj == "distance":
            if inst.mode == GOAL_REPLACEMENT:
                raise InputError("--objective distance needs an unlabeled instance")
            result = planner.solve_min_total_distance(inst, args.horizon)
        else:
            if inst.mode != GOAL_REPLACEMENT:
                raise InputError("--objective arrival needs mode goal_replacement")
            if args.horizon is not None:
                raise InputError("--horizon is not supported with --objective arrival")
            result = planner.solve_earliest_arrival(inst)
    except planner.Infeasible as exc:
        print(f"infeasible: {exc}", file=out)
        return INFEASIBLE
    text = format_plan(inst.graph, result.plan)
    if args.outfile:
        with open(args.outfile, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        print(plan_footer(result.plan), file=out)
    else:
        out.write(text)
    return OK


def cmd_verify(args, out: TextIO) -> int:
    inst = _load(args.infile)
    plan, footer = parse_plan(_read(args.planfile), inst.graph)
    if plan.n != inst.n:
        print(f"invalid: plan has {plan.n} paths for {inst.n} agents", file=out)
        return INVALID_PLAN
    by_start = {p[0]: p for p in plan.paths}
    missing = [s for s in inst.starts if s not in by_start]
    if missing:
        print(f"invalid: no path leaves start vertex {missing[0]}", file=out)
        return INVALID_PLAN
    ordered = Plan(tuple(by_start[s] for s in inst.starts))
    problems = validate_plan(inst, ordered)
    if problems:
        print(f"invalid: {problems[0]}", file=out)
        return INVALID_PLAN
    if footer is not None:
        actual = {
            "makespan": ordered.makespan,
            "total_distance": ordered.total_distance,
            "total_arrival": ordered.total_arrival,
        }
        for key, value in footer.items():
            if actual[key] != value:
                print(f"invalid: footer {key} {value} but the plan has {actual[key]}", file=out)
                return INVALID_PLAN
    print(f"valid: {plan_footer(ordered)}", file=out)
    return OK


def cmd_escape(args, out: TextIO) -> int:
    spec = parse_escape(_read(args.infile))
    result = planner.solve_escape(spec.graph, spec.evaders, spec.exits)
    if not result.feasible:
        print("infeasible", file=out)
        return INFEASIBLE
    print("feasible", file=out)
    if result.paths:
        print(format_paths(spec.graph, result.paths), file=out)
    return OK


def cmd_oracle(args, out: TextIO) -> int:
    inst = _load(args.infile)
    try:
        if args.objective == "arrival" and inst.mode == GOAL_REPLACEMENT:
            best = oracle.oracle_goal_replacement(inst)
            hist = " ".join(f"{t}:{c}" for t, c in sorted(best.histogram.items()))
            print(f"arrival {best.min_total_arrival}", file=out)
            print(f"makespan {best.min_makespan}", file=out)
            print(f"histogram {hist}", file=out)
            return OK
        if inst.mode == GOAL_REPLACEMENT:
            raise InputError("goal_replacement instances support only --objective arrival")
        if args.objective == "makespan":
            res = oracle.oracle_min_makespan(inst)
        elif args.objective == "distance":
            res = oracle.oracle_min_total_distance(inst)
        else:
            res = oracle.oracle_min_total_arrival(inst)
    except oracle.OracleGuardExceeded as exc:
        print(f"guard exceeded: {exc}", file=out)
        return GUARD
    if res.value is None:
        print("infeasible", file=out)
        return INFEASIBLE
    print(f"{args.objective} {res.value}", file=out)
    return OK


def cmd_stats(args, out: TextIO) -> int:
    inst = _load(args.infile)
    g = inst.graph
    rows = [
        ("mode", inst.mode),
        ("n", inst.n),
        ("V", g.vertex_count),
        ("E", g.edge_count),
        ("ell", compute_ell(inst)),
        ("horizon_bound", planner.horizon_bound(inst)),
        ("arrival_horizon_bound", planner.arrival_horizon_bound(inst.n, g.vertex_count)),
    ]
    for key, value in rows:
        print(f"{key} {value}", file=out)
    return OK


COMMANDS = {
    "solve": cmd_solve,
    "verify": cmd_verify,
    "escape": cmd_escape,
    "oracle": cmd_oracle,
    "stats": cmd_stats,
}


def run(argv: List[str], out: Optional[TextIO] = None, err: Optional[TextIO] = None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args, out)
    except (InputError, ValueError) as exc:
        print(f"error: {exc}", file=err)
        return INPUT_ERROR


def main(argv: Optional[List[str]] = None) -> None:
    sys.exit(run(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    main()
