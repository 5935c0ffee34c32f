"""Command-line interface: ``lbpgrid {run,verify,lemmas,regions,tree,oracle}``.

Exit status is 0 when no violation was found, 1 otherwise, and 2 for usage
errors (argparse convention).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import random
import sys
import time
from pathlib import Path

from . import render
from .grid import BoundaryConfig, BoundaryFormatError, classify_boundary, make_grid
from .messages import estimates, first_stable_iteration, run
from .oracle import (CAP_DP, CAP_ENUM, SizeGuardError, brute_force_min_marginals,
                     dp_min_marginals, enumerate_min_marginals, local_solutions)
from .regions import closed_form_local_solutions, region_decomposition
from .sweep import RunReport, lemma_sweep, verify_sweep, write_rows_csv
from .trees import TreeSpecError, diameter, load_tree_spec, random_tree

log = logging.getLogger("lbpgrid")


def _boundary_arg(text: str) -> BoundaryConfig:
    try:
        return BoundaryConfig.from_string(text)
    except BoundaryFormatError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _dump_json(path, obj) -> None:
    if path:
        Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _emit_field(args, field, N, boundary=None) -> None:
    if args.render == "ascii":
        print(render.render_ascii(field, N, boundary), end="")
    elif args.render == "pgm":
        print(render.render_pgm(field, N), end="")


# --------------------------------------------------------------------------
# Commands


def cmd_run(args) -> int:
    x = args.boundary
    N = x.N
    n_max = args.n_max if args.n_max is not None else 2 * N + 10
    t0 = time.perf_counter()
    trace = run(x, n_max)
    est = estimates(trace.state(n_max))
    oracle = None
    if N <= args.cap_dp:
        oracle = local_solutions(dp_min_marginals(make_grid(N), x, args.cap_dp))
    rep = RunReport(x.to_string(), N, first_stable_iteration(trace), est, oracle,
                    oracle_method="dp" if oracle else "", seconds=time.perf_counter() - t0)
    one_run = classify_boundary(make_grid(N), x).one_run
    print(f"boundary {rep.boundary}  kind {classify_boundary(make_grid(N), x).kind}")
    print(f"first stable iteration: {rep.stable_from}")
    if oracle is not None:
        print(f"estimate at n={n_max} matches oracle: {rep.match}")
    _emit_field(args, est, N, x if args.render == "ascii" and args.show_ring else None)
    out = rep.to_json()
    out["trace"] = trace.to_json() if args.trace else None
    _dump_json(args.json, out)
    if args.figure:
        render.plot_convergence(trace, args.figure, oracle)
    if args.csv:
        curve = render.convergence_curve(trace, oracle)
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(list(curve))
            w.writerows(zip(*curve.values()))
    # the theorem only speaks about one-run boundaries
    bad = one_run and oracle is not None and n_max >= 2 * N and (
        not rep.match or rep.stable_from is None or rep.stable_from > 2 * N)
    return 1 if bad else 0


def cmd_verify(args) -> int:
    summaries, rows = [], []
    for N in args.N:
        s = verify_sweep(N, jobs=args.jobs, cap_enum=args.cap_enum, cap_dp=args.cap_dp,
                         dedup_symmetry=args.dedup_symmetry, rows=rows)
        summaries.append(s)
        hist = " ".join(f"{k}:{v}" for k, v in sorted(s.stable_histogram.items(), key=lambda kv: str(kv[0])))
        print(f"N={N} boundaries={s.tested} violations={len(s.violations)} "
              f"stable-at [{hist}] ({s.seconds:.1f}s)")
        for v in s.violations:
            print(f"  VIOLATION {v['boundary']}: {'; '.join(v['problems'])}")
    _dump_json(args.json, [s.to_json() for s in summaries])
    if args.csv:
        write_rows_csv(args.csv, rows, ["boundary", "stable_from", "ok", "problems", "seconds"])
    if args.figure:
        render.plot_stable_histogram({s.N: s.stable_histogram for s in summaries}, args.figure)
    return 0 if all(s.ok for s in summaries) else 1


def cmd_lemmas(args) -> int:
    summaries, rows = [], []
    for N in args.N:
        s = lemma_sweep(N, jobs=args.jobs, n0=args.n0, dedup_symmetry=args.dedup_symmetry, rows=rows)
        summaries.append(s)
        c = s.lemma_counts
        print(f"N={N} boundaries={s.tested} FC {c['fc_verified']}/{c['fc_instances']} "
              f"cut {c['cut_verified']}/{c['cut_instances']} "
              f"BC {c['bc_verified']}/{c['bc_instances']} (vacuous {c['bc_vacuous']}) "
              f"skipped {c['window_skipped']} cases {c['cases']} ({s.seconds:.1f}s)")
        for v in s.violations:
            print(f"  VIOLATION {v['boundary']}: {'; '.join(v['problems'][:3])}")
    _dump_json(args.json, [s.to_json() for s in summaries])
    if args.csv:
        write_rows_csv(args.csv, rows, ["boundary", "case", "stable_from", "fc_instances", "fc_verified",
                                        "cut_instances", "cut_verified", "bc_instances",
                                        "bc_verified", "bc_vacuous", "ok", "problems"])
    return 0 if all(s.ok for s in summaries) else 1


def cmd_regions(args) -> int:
    x = args.boundary
    g = make_grid(x.N)
    rs = classify_boundary(g, x)
    if not rs.one_run:
        print(f"degenerate: {rs.kind}")
        _dump_json(args.json, {"boundary": x.to_string(), "degenerate": rs.kind})
        return 0
    oracle = None
    if x.N <= args.cap_dp:
        oracle = local_solutions(dp_min_marginals(g, x, args.cap_dp))
    decomp = region_decomposition(g, x, oracle_field=oracle)
    closed = closed_form_local_solutions(decomp)
    for name, cls in decomp.classes.items():
        print(f"{name:12s} {sorted(map(tuple, cls))}")
    print(f"corner set: {sorted(decomp.corners)}")
    for d in decomp.diagnostics:
        print(f"note: {d}")
    _emit_field(args, closed, x.N, x if args.render == "ascii" and args.show_ring else None)
    agree = None if oracle is None else closed == oracle
    if agree is not None:
        print(f"closed form matches oracle: {agree}")
        for c in closed.mismatches(oracle):
            print(f"  DISAGREE at {tuple(c)}: closed form {closed[c]}, oracle {oracle[c]}")
    out = decomp.to_json()
    out.update({"boundary": x.to_string(), "field": closed.to_json(), "matches_oracle": agree})
    _dump_json(args.json, out)
    if args.figure:
        render.plot_regions(decomp, args.figure)
    return 0 if agree is not False else 1


def cmd_tree(args) -> int:
    if args.file:
        try:
            specs = [(args.file, load_tree_spec(args.file))]
        except TreeSpecError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
    else:
        rng = random.Random(args.seed)
        specs = [(f"random#{k}", random_tree(rng, args.max_nodes)) for k in range(args.random)]
    failures, reports, rows = 0, [], []
    for name, spec in specs:
        graph = spec.graph()
        d = diameter(spec)
        n_max = args.n_max if args.n_max is not None else d + 6
        trace = run(graph, max(n_max, d + 1))
        est = estimates(trace.state(d + 1))
        oracle = local_solutions(enumerate_min_marginals(graph))
        k = first_stable_iteration(trace)
        ok = est == oracle and k is not None and k <= d + 1
        failures += not ok
        reports.append({"tree": name, "diameter": d, "stable_from": k, "match": est == oracle,
                        "ok": ok, "estimates": est.to_json(), "oracle": oracle.to_json()})
        rows.append({"tree": name, "nodes": len(graph.topology.vertices), "diameter": d,
                     "stable_from": k, "ok": ok})
        if len(specs) == 1 or not ok:
            print(f"{name}: diameter {d}, stable from {k}, matches oracle {est == oracle}")
            for s in sorted(est.values, key=str):
                print(f"  {s}: estimate {est[s]:+d} oracle {oracle[s]:+d}")
    if len(specs) > 1:
        print(f"{len(specs)} trees, {failures} failures")
    _dump_json(args.json, reports)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            w.writerows(rows)
    return 1 if failures else 0


def cmd_oracle(args) -> int:
    x = args.boundary
    g = make_grid(x.N)
    try:
        if args.method == "enum":
            mm = brute_force_min_marginals(g, x, args.cap_enum)
        elif args.method == "dp":
            mm = dp_min_marginals(g, x, args.cap_dp)
        else:
            mm = dp_min_marginals(g, x, args.cap_dp)
            if x.N <= args.cap_enum and brute_force_min_marginals(g, x, args.cap_enum) != mm:
                print("enumeration and row-sweep oracles disagree", file=sys.stderr)
                return 1
    except SizeGuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    field = local_solutions(mm)
    print(f"global minimum odd bonds: {mm.global_minimum}")
    _emit_field(args, field, x.N, x if args.render == "ascii" and args.show_ring else None)
    _dump_json(args.json, {"boundary": x.to_string(), "min_marginals": mm.to_json(),
                           "field": field.to_json()})
    if args.figure:
        render.plot_field(field, x, args.figure)
    return 0


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", metavar="PATH", help="write a JSON report to PATH")
    common.add_argument("--csv", metavar="PATH", help="write delimited per-item rows to PATH")
    common.add_argument("--figure", metavar="PATH", help="render a matplotlib figure to PATH")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized sampling")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    common.add_argument("--n-max", type=int, default=None, help="iterations to run")
    common.add_argument("--render", choices=("ascii", "pgm", "none"), default="ascii")
    common.add_argument("--show-ring", action="store_true", help="draw the boundary in ASCII output")
    common.add_argument("--cap-enum", type=int, default=CAP_ENUM, help="largest N for enumeration")
    common.add_argument("--cap-dp", type=int, default=CAP_DP, help="largest N for the row sweep")
    common.add_argument("--dedup-symmetry", action="store_true",
                        help="sweep one boundary per symmetry class")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="lbpgrid", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("run", parents=[common], help="run LBP on one boundary")
    s.add_argument("boundary", type=_boundary_arg, help="e.g. B2:++----------")
    s.add_argument("--trace", action="store_true", help="include the full trace in --json")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("verify", parents=[common], help="check every one-run boundary at size N")
    s.add_argument("N", type=int, nargs="+")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("lemmas", parents=[common], help="check the FC/BC convergence lemmas")
    s.add_argument("N", type=int, nargs="+")
    s.add_argument("--n0", default="0", help="hypothesis time, an integer or 'auto'")
    s.set_defaults(func=cmd_lemmas)

    s = sub.add_parser("regions", parents=[common], help="region decomposition of a boundary")
    s.add_argument("boundary", type=_boundary_arg)
    s.set_defaults(func=cmd_regions)

    s = sub.add_parser("tree", parents=[common], help="run LBP on a tree spec or random trees")
    s.add_argument("file", nargs="?", help="tree spec file")
    s.add_argument("--random", type=int, default=30, help="random trees when no file is given")
    s.add_argument("--max-nodes", type=int, default=20)
    s.set_defaults(func=cmd_tree)

    s = sub.add_parser("oracle", parents=[common], help="exact min-marginals of a boundary")
    s.add_argument("boundary", type=_boundary_arg)
    s.add_argument("--method", choices=("auto", "enum", "dp"), default="auto")
    s.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    n0 = getattr(args, "n0", "0")
    if n0 != "auto" and not n0.isdigit():
        parser.error(f"--n0 must be a non-negative integer or 'auto', got {n0!r}")
    try:
        return args.func(args)
    except SizeGuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
