"""Command-line interface: solve, bound, stats, export-dot, count-preorders.

JSON goes to standard output, diagnostics to standard error.  Exit codes:
0 success, 1 usage error, 2 input error, 3 resource-limit error.  All
algorithms are deterministic; the PREORDER_SEED environment variable is
reserved for future randomized variants and currently unused.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import sys
import time

from . import fileio
from .core import (
    Instance,
    Relation,
    decompose,
    evaluate_objective,
    make_report,
    positive_part_bound,
    transitivity_interval,
)
from .dicut import four_approx_preorder
from .exact import (
    Mode,
    SolverLimitError,
    branch_and_bound,
    brute_force_optimal,
    count_preorders,
    successive_cluster_then_order,
)
from .fixation import greedy_arc_fixation
from .insertion import greedy_arc_insertion
from .moving import greedy_moving
from .relax import cutting_plane_bound

__all__ = ["run_command", "main"]

ALGORITHMS = ("gdc", "gaf", "gai", "gm",
              "gdc+gai", "gdc+gm", "gaf+gai", "gaf+gm",
              "exact", "bnb")
MODES = ("preorder", "clustering", "partial-order", "successive")

_HEURISTIC_STAGES = {
    "gdc": four_approx_preorder,
    "gaf": greedy_arc_fixation,
    "gai": greedy_arc_insertion,
    "gm": greedy_moving,
}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="preordering",
                     description="Solvers and bounds for the maximum-value preordering problem")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_input_args(p, multiple=False):
        if multiple:
            p.add_argument("files", nargs="+", help="input file(s)")
        else:
            p.add_argument("file", help="input file")
        p.add_argument("--format", choices=("auto", "edges", "instance"), default="auto")
        p.add_argument("--values", choices=("unit", "offset"), default="unit",
                       help="value model for edge lists")
        p.add_argument("--offset", type=float, default=0.01,
                       help="offset d for the offset value model")
        p.add_argument("--nodes", type=int, default=None,
                       help="declared node count for edge lists")

    p_solve = sub.add_parser("solve", help="compute a preorder and report it")
    add_input_args(p_solve, multiple=True)
    p_solve.add_argument("--alg", choices=ALGORITHMS, default="gdc+gai")
    p_solve.add_argument("--mode", choices=MODES, default="preorder")
    p_solve.add_argument("--limit", type=int, default=None,
                         help="node limit override for exact solvers")
    p_solve.add_argument("--dot", default=None, help="also write a DOT file here")
    p_solve.add_argument("--jobs", type=int, default=1,
                         help="solve multiple files concurrently")

    p_bound = sub.add_parser("bound", help="LP cutting-plane upper bound")
    add_input_args(p_bound)
    p_bound.add_argument("--cuts", choices=("triangle", "ocw"), default="triangle")
    p_bound.add_argument("--max-walk-length", type=int, default=5)
    p_bound.add_argument("--mode", choices=MODES[:3], default="preorder")

    p_stats = sub.add_parser("stats", help="instance statistics")
    add_input_args(p_stats)

    p_dot = sub.add_parser("export-dot", help="solve and print DOT text")
    add_input_args(p_dot)
    p_dot.add_argument("--alg", choices=ALGORITHMS, default="gdc+gai")
    p_dot.add_argument("--limit", type=int, default=None)
    p_dot.add_argument("--output", default=None, help="write DOT here instead of stdout")

    p_count = sub.add_parser("count-preorders", help="count preorders on n labeled nodes")
    p_count.add_argument("--n", type=int, required=True)
    p_count.add_argument("--limit", type=int, default=6)
    return parser


def _load(args, path) -> Instance:
    return fileio.load_any(path, fmt=args.format, value_model=args.values,
                           offset=args.offset, nodes=args.nodes)


def _solve_instance(inst: Instance, alg: str, mode: Mode | str,
                    limit: int | None):
    """Run one algorithm; returns (relation, report, upper_bound or None)."""
    mode = Mode.from_string(mode) if isinstance(mode, str) else mode
    if alg in ("exact", "bnb"):
        start = time.perf_counter()
        if alg == "exact":
            value, rel = brute_force_optimal(inst, mode, limit=limit)
        else:
            value, rel = branch_and_bound(inst, mode, limit=limit)
        report = make_report(
            objective=value,
            bound_B=positive_part_bound(inst),
            upper_bound=value,
            wall_time=time.perf_counter() - start,
        )
        return rel, report, value
    stages = alg.split("+")
    rel = None
    reports = []
    for stage in stages:
        runner = _HEURISTIC_STAGES[stage]
        if stage in ("gdc", "gaf"):
            rel, rep = runner(inst)
        else:
            rel, rep = runner(inst, rel) if rel is not None else runner(inst)
        reports.append(rep)
    combined = make_report(
        objective=reports[-1].objective,
        bound_B=reports[-1].bound_B,
        iterations=sum(r.iterations for r in reports),
        wall_time=sum(r.wall_time for r in reports),
        trace=tuple(t for r in reports for t in r.trace),
    )
    return rel, combined, None


def _solve_successive(inst: Instance, alg: str, limit: int | None):
    def solver(instance, mode, stage_limit):
        stage_limit = stage_limit if stage_limit is not None else limit
        if alg == "bnb":
            return branch_and_bound(instance, mode, limit=stage_limit)
        return brute_force_optimal(instance, mode, limit=stage_limit)

    start = time.perf_counter()
    value, rel = successive_cluster_then_order(inst, solver=solver)
    report = make_report(
        objective=value,
        bound_B=positive_part_bound(inst),
        wall_time=time.perf_counter() - start,
    )
    return rel, report, None


def _report_json(inst, rel, report, *, algorithm, mode, upper_bound):
    clustered = decompose(rel)
    doc = {
        "algorithm": algorithm,
        "mode": mode,
        "n": inst.n,
        "objective": report.objective,
        "bound_B": report.bound_B,
    }
    if upper_bound is not None:
        doc["upper_bound"] = upper_bound
    doc["transitivity"] = [report.transitivity_lower, report.transitivity_upper]
    doc["iterations"] = report.iterations
    doc["classes"] = [list(c) for c in clustered.classes]
    doc["reduction"] = [list(arc) for arc in sorted(clustered.reduction)]
    if inst.labels is not None:
        doc["labels"] = list(inst.labels)
    doc["timing"] = {"wall_time": report.wall_time}
    return doc


def _solve_one_file(path, args):
    inst = _load(args, path)
    if args.mode == "successive":
        if args.alg not in ("exact", "bnb"):
            raise _UsageError("--mode successive requires --alg exact or bnb")
        rel, report, upper = _solve_successive(inst, args.alg, args.limit)
    elif args.alg in ("exact", "bnb"):
        rel, report, upper = _solve_instance(inst, args.alg, args.mode, args.limit)
    else:
        if args.mode != "preorder":
            raise _UsageError(f"--alg {args.alg} only supports --mode preorder")
        rel, report, upper = _solve_instance(inst, args.alg, args.mode, args.limit)
    doc = _report_json(inst, rel, report, algorithm=args.alg, mode=args.mode,
                       upper_bound=upper)
    return inst, rel, doc


def _pool_worker(payload):
    path, argv = payload
    parser = _build_parser()
    args = parser.parse_args(argv)
    _, _, doc = _solve_one_file(path, args)
    return path, doc


def _cmd_solve(args, argv) -> int:
    if args.dot is not None and len(args.files) > 1:
        raise _UsageError("--dot works with a single input file")
    if args.jobs > 1 and len(args.files) > 1:
        payloads = [(path, argv) for path in args.files]
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = dict(pool.map(_pool_worker, payloads))
        docs = {path: results[path] for path in args.files}
        print(json.dumps(docs, indent=2))
        return 0
    docs = {}
    for path in args.files:
        inst, rel, doc = _solve_one_file(path, args)
        docs[path] = doc
        if args.dot is not None:
            with open(args.dot, "w") as fh:
                fh.write(fileio.export_dot(rel, inst.labels))
    print(json.dumps(docs[args.files[0]] if len(args.files) == 1 else docs, indent=2))
    return 0


def _cmd_bound(args) -> int:
    inst = _load(args, args.file)
    result = cutting_plane_bound(
        inst,
        use_ocw=args.cuts == "ocw",
        mode=Mode.from_string(args.mode),
        max_walk_length=args.max_walk_length,
    )
    B = positive_part_bound(inst)
    upper = min(result.upper_bound, B) if B > 0 else max(result.upper_bound, 0.0)
    lo, hi = transitivity_interval(0.0, max(upper, 0.0), B)
    doc = {
        "cuts": args.cuts,
        "mode": args.mode,
        "n": inst.n,
        "bound_B": B,
        "upper_bound": result.upper_bound,
        "rounds": result.rounds,
        "converged": result.converged,
        "num_rows": result.num_rows,
        "transitivity_upper": hi,
    }
    print(json.dumps(doc, indent=2))
    return 0


def _cmd_stats(args) -> int:
    inst = _load(args, args.file)
    doc = {
        "n": inst.n,
        "pairs": inst.n * (inst.n - 1),
        "bound_B": positive_part_bound(inst),
    }
    print(json.dumps(doc, indent=2))
    return 0


def _cmd_export_dot(args) -> int:
    inst = _load(args, args.file)
    rel, _, _ = _solve_instance(inst, args.alg, "preorder", args.limit)
    text = fileio.export_dot(rel, inst.labels)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_count(args) -> int:
    count = count_preorders(args.n, limit=args.limit)
    print(json.dumps({"n": args.n, "count": count}, indent=2))
    return 0


def run_command(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "solve":
            return _cmd_solve(args, argv)
        if args.command == "bound":
            return _cmd_bound(args)
        if args.command == "stats":
            return _cmd_stats(args)
        if args.command == "export-dot":
            return _cmd_export_dot(args)
        if args.command == "count-preorders":
            return _cmd_count(args)
        raise _UsageError(f"unknown command {args.command!r}")
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # argparse --help
        return 0 if exc.code in (0, None) else 1
    except fileio.ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SolverLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))
