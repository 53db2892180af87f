"""Command-line front end: solve, generate, bench and auglag subcommands.

Solve reports and benchmark tables are emitted as delimited text; passing
--plot additionally renders the corresponding matplotlib figure next to the
data.  Exit code 0 means the solver certified (approximate) stationarity,
1 a solver failure (stall, iteration limit, unbounded), 2 a usage or
problem-format error.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .auglag import AuglagConfig, auglag_solve, nash1_problem
from .bench import (FAMILIES, CatalogProblem, default_start,
                    generate_quadratic)
from .core import ConfigError, PartitionedPoint, SolverConfig, project_feasible
from .driver import slpcc_solve
from .probio import (ProblemFormatError, catalog_doc, load_problem,
                     quadratic_doc, save_problem)

TRACE_FIELDS = ("iter", "fval", "chi", "delta", "step_type",
                "inner_iters", "bqp_iters")
BENCH_FIELDS = ("instance", "variant", "status", "objective", "outer_iters",
                "inner_iters", "bqp_iters", "chi")


def _env_seed():
    raw = os.environ.get("MPCC_SEED")
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"error: MPCC_SEED must be an integer, got {raw!r}")


def _write_trace(path, report):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_FIELDS)
        for r in report.iterates:
            writer.writerow([r.k, repr(r.f), repr(r.chi),
                             "" if r.delta is None else repr(r.delta),
                             r.step_type, r.inner_iters, r.bqp_iters])


def _solver_config(args, variant=None):
    kwargs = {}
    if args.sigma is not None:
        kwargs["sigma"] = args.sigma
    if args.delta_min is not None:
        kwargs["delta_min"] = args.delta_min
    if args.delta_bar0 is not None:
        kwargs["delta_bar0"] = args.delta_bar0
    if args.tol is not None:
        kwargs["stationarity_tol"] = args.tol
    if args.max_outer is not None:
        kwargs["max_outer"] = args.max_outer
    kwargs["variant"] = (variant or args.variant).replace("-", "_")
    return SolverConfig(**kwargs)


def _start_point(loaded, seed):
    prob = loaded.problem
    if loaded.x_init is not None:
        x0, x1, x2 = prob.split(loaded.x_init)
        return project_feasible(PartitionedPoint(x0, x1, x2), prob)
    if seed is not None:
        rng = np.random.default_rng(seed)
        raw = PartitionedPoint(rng.uniform(prob.l0, prob.u0),
                               rng.uniform(0.0, 1.0, prob.n1),
                               rng.uniform(0.0, 1.0, prob.n1))
        return project_feasible(raw, prob)
    return default_start(prob)


def cmd_solve(args) -> int:
    try:
        loaded = load_problem(args.problem)
    except (OSError, ProblemFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    seed = args.seed if args.seed is not None else _env_seed()
    try:
        cfg = _solver_config(args)
        report = slpcc_solve(loaded.problem, _start_point(loaded, seed), cfg)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"problem        : {loaded.problem.name or args.problem}")
    print(f"status         : {report.status}")
    print(f"objective      : {report.final_f:.10g}")
    print(f"stationarity   : {report.final_chi:.3e}")
    print(f"outer iters    : {report.outer_iters}")
    print(f"total inner    : {report.total_inner_iters}")
    print(f"bqp iters      : {report.bqp_iters}")
    if args.trace:
        _write_trace(args.trace, report)
        print(f"trace written  : {args.trace}")
    if args.plot:
        from .plots import render_solve_trace

        render_solve_trace(report.iterates, args.plot,
                           title=loaded.problem.name or str(args.problem))
        print(f"figure written : {args.plot}")
    return 0 if report.converged else 1


def cmd_generate(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    seed = getattr(args, "seed", None)
    if seed is None:
        seed = _env_seed()
    written = []
    if args.kind == "quad":
        base = 0 if seed is None else seed
        for k in range(args.count):
            inst = generate_quadratic(args.n, args.n, args.cls, base + k)
            path = out_dir / f"{args.n}-{args.cls}-{k}.json"
            save_problem(path, quadratic_doc(inst))
            written.append(path)
    else:
        try:
            cat = CatalogProblem(args.family, args.cls, args.n)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        path = out_dir / f"{args.n}-{args.family}{args.cls}.json"
        save_problem(path, catalog_doc(cat))
        written.append(path)
    for path in written:
        print(path)
    return 0


def _bench_one(task):
    """Worker: solve one instance file with one variant (process-safe).

    Per-instance failures are recorded as rows so the suite keeps going.
    """
    path, variant, tol, max_outer = task
    try:
        loaded = load_problem(path)
        cfg = SolverConfig(variant=variant, stationarity_tol=tol,
                           max_outer=max_outer)
        report = slpcc_solve(loaded.problem, _start_point(loaded, None), cfg)
    except (ProblemFormatError, ValueError, RuntimeError) as exc:
        return {"instance": Path(path).stem, "variant": variant,
                "status": f"error:{exc}", "objective": float("nan"),
                "outer_iters": 0, "inner_iters": 0, "bqp_iters": 0,
                "chi": float("nan")}
    return {
        "instance": Path(path).stem,
        "variant": variant,
        "status": report.status,
        "objective": report.final_f,
        "outer_iters": report.outer_iters,
        "inner_iters": report.total_inner_iters,
        "bqp_iters": report.bqp_iters,
        "chi": report.final_chi,
    }


def _format_bench_rows(rows, fmt):
    lines = []
    if fmt == "markdown":
        lines.append("| " + " | ".join(BENCH_FIELDS) + " |")
        lines.append("|" + "|".join("---" for _ in BENCH_FIELDS) + "|")
        for r in rows:
            lines.append("| " + " | ".join(_cell(r[k]) for k in BENCH_FIELDS) + " |")
    else:
        lines.append(",".join(BENCH_FIELDS))
        for r in rows:
            lines.append(",".join(_cell(r[k]) for k in BENCH_FIELDS))
    return "\n".join(lines) + "\n"


def _cell(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def cmd_bench(args) -> int:
    suite = sorted(Path(args.suite).glob("*.json"))
    tasks = [(str(p), variant, args.tol if args.tol is not None else 1e-10,
              args.max_outer or 1000)
             for p in suite for variant in ("plain", "cauchy")]
    if args.jobs > 1 and tasks:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_bench_one, tasks))
    else:
        rows = [_bench_one(task) for task in tasks]
    text = _format_bench_rows(rows, args.format)
    if args.out:
        Path(args.out).write_text(text)
        print(f"results written: {args.out}")
    else:
        sys.stdout.write(text)
    if rows:
        for variant in ("plain", "cauchy"):
            sub = [r for r in rows if r["variant"] == variant]
            if not sub:
                continue
            solved = [r for r in sub if r["status"] in ("b_stationary",
                                                        "tolerance_reached")]
            med = np.median([r["outer_iters"] for r in sub])
            mean_inner = np.mean([r["inner_iters"] for r in sub])
            print(f"# {variant}: {len(solved)}/{len(sub)} solved, "
                  f"median outer {med:g}, mean inner {mean_inner:.1f}")
    if args.plot and rows:
        from .plots import render_bench_summary

        render_bench_summary(rows, args.plot, title=str(args.suite))
        print(f"figure written : {args.plot}")
    return 0


def cmd_auglag(args) -> int:
    if args.problem != "nash1":
        print(f"error: unknown built-in problem {args.problem!r}", file=sys.stderr)
        return 2
    cfg = AuglagConfig(tol_feasibility=args.tol_feas,
                       tol_stationarity=args.tol_stat)
    report = auglag_solve(nash1_problem(), cfg, x_init=np.full(4, 10.0))
    print(f"status       : {report.status}")
    print(f"penalty      : {report.rho:g}")
    print(f"iterations   : {len(report.records)}")
    with np.printoptions(precision=8, suppress=True):
        print(f"x            : {report.x}")
        print(f"slacks g     : {report.s_g}")
        print(f"slacks h     : {report.s_h}")
    if report.records:
        last = report.records[-1]
        print(f"violation    : {last.violation:.3e}")
        print(f"stationarity : {last.stationarity:.3e}")
    if args.trace:
        with open(args.trace, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", "violation", "stationarity", "rho"])
            for r in report.records:
                writer.writerow([r.iteration, repr(r.violation),
                                 repr(r.stationarity), repr(r.rho)])
        print(f"trace written: {args.trace}")
    if args.plot:
        from .plots import render_auglag_trace

        render_auglag_trace(report.records, args.plot, title="nash1")
        print(f"figure written: {args.plot}")
    return 0 if report.status == "converged" else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slpcc",
        description="Trust-region solver for bound-constrained MPCCs")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve a problem file")
    p_solve.add_argument("problem", help="path to a problem JSON file")
    p_solve.add_argument("--variant", default="plain",
                         choices=["first-order", "plain", "cauchy"])
    p_solve.add_argument("--sigma", type=float, default=None)
    p_solve.add_argument("--delta-min", type=float, default=None)
    p_solve.add_argument("--delta-bar0", type=float, default=None)
    p_solve.add_argument("--tol", type=float, default=None,
                         help="stationarity tolerance")
    p_solve.add_argument("--max-outer", type=int, default=None)
    p_solve.add_argument("--seed", type=int, default=None,
                         help="random feasible start when the file has no x_init "
                              "(falls back to MPCC_SEED)")
    p_solve.add_argument("--trace", default=None, help="write per-iteration CSV")
    p_solve.add_argument("--plot", default=None, help="render trace figure (PNG)")
    p_solve.set_defaults(func=cmd_solve)

    p_gen = sub.add_parser("generate", help="generate benchmark instances")
    gen_sub = p_gen.add_subparsers(dest="kind", required=True)
    g_quad = gen_sub.add_parser("quad", help="random quadratic instances")
    g_quad.add_argument("--n", type=int, required=True,
                        help="n0 = n1 (problem has 3n variables)")
    g_quad.add_argument("--class", dest="cls", required=True,
                        choices=["ind", "psd"])
    g_quad.add_argument("--count", type=int, default=10)
    g_quad.add_argument("--seed", type=int, default=None)
    g_quad.add_argument("--out", default=".")
    g_quad.set_defaults(func=cmd_generate, kind="quad")
    g_cat = gen_sub.add_parser("catalog", help="nonlinear catalog instance")
    g_cat.add_argument("--family", required=True, choices=list(FAMILIES))
    g_cat.add_argument("--n", type=int, required=True)
    g_cat.add_argument("--class", dest="cls", type=int, required=True,
                       choices=[0, 1])
    g_cat.add_argument("--out", default=".")
    g_cat.set_defaults(func=cmd_generate, kind="catalog")

    p_bench = sub.add_parser("bench", help="run both variants over a suite")
    p_bench.add_argument("--suite", required=True,
                         help="directory of problem JSON files")
    p_bench.add_argument("--jobs", type=int, default=1)
    p_bench.add_argument("--tol", type=float, default=None)
    p_bench.add_argument("--max-outer", type=int, default=None)
    p_bench.add_argument("--out", default=None, help="write results table here")
    p_bench.add_argument("--format", default="csv", choices=["csv", "markdown"])
    p_bench.add_argument("--plot", default=None,
                         help="render iteration-count summary figure (PNG)")
    p_bench.set_defaults(func=cmd_bench)

    p_al = sub.add_parser("auglag", help="augmented Lagrangian outer method")
    p_al.add_argument("--problem", default="nash1")
    p_al.add_argument("--tol-feas", type=float, default=1e-8)
    p_al.add_argument("--tol-stat", type=float, default=1e-8)
    p_al.add_argument("--trace", default=None, help="write outer-iteration CSV")
    p_al.add_argument("--plot", default=None, help="render trace figure (PNG)")
    p_al.set_defaults(func=cmd_auglag)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
