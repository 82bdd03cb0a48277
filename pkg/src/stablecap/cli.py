"""Command-line entry point: generate, solve, bench and verify.

Exit codes: 0 success (or a clean verification), 1 bad input or a failed
verification, 2 a solve that hit its limits and returned an incumbent.
"""
from __future__ import annotations

import argparse
import csv
import itertools
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .instance import (PENALTY_MODES, Instance, InstanceError, Solution, check_allocation,
                       generate_random, load_instance, load_solution, save_instance,
                       save_solution)
from .matching import blocking_pairs, check_matching, da_student_optimal, objective_value

METHODS = ("cpm", "agg-lin", "nonagg-lin", "greedy", "lph", "oracle", "da")
EXACT_METHODS = ("cpm", "agg-lin", "nonagg-lin", "oracle")
BENCH_COLUMNS = ("instance_id", "n", "m", "B", "method", "objective", "gap_vs_best_exact",
                 "time_ms", "iterations", "cuts_added")
DESK_GRID = {"n": [50, 100, 200], "m": [5, 10, 15], "B": [0, 1, 5, 10], "seeds": 20}

EXIT_OK, EXIT_ERROR, EXIT_LIMIT = 0, 1, 2


class CliError(Exception):
    pass


@dataclass
class RunResult:
    solution: Solution
    status: str             # optimal | limit | heuristic
    iterations: int = 0
    cuts_added: int = 0


def run_method(inst: Instance, method: str, budget: Optional[int] = None, *,
               time_limit: Optional[float] = None, node_limit: Optional[int] = None,
               backend: str = "auto", trace: Optional[Callable[[str], None]] = None) -> RunResult:
    """Solve ``inst`` with one of METHODS and package the result."""
    B = inst.budget if budget is None else budget
    stats: dict = {"budget": B}
    iterations = cuts = 0
    if method == "cpm":
        from .cutting_plane import solve_cpm
        r = solve_cpm(inst, B, backend=backend, time_limit=time_limit,
                      node_limit=node_limit, trace=trace)
        mu, t, obj, status = r.assignment, r.t, r.objective, r.status
        iterations, cuts = r.stats.iterations, r.stats.cuts_added
        stats.update(iterations=iterations, cuts_added=cuts, nodes=r.stats.nodes,
                     mp_solve_time=round(r.stats.mp_solve_time, 6),
                     separation_time=round(r.stats.separation_time, 6))
    elif method in ("agg-lin", "nonagg-lin"):
        from .formulations import solve_compact
        r = solve_compact(inst, B, "agg" if method == "agg-lin" else "nonagg", backend,
                          time_limit, node_limit)
        mu, t, obj = r.assignment, r.t, r.objective
        status = "optimal" if r.status == "optimal" else "limit"
        stats.update(nodes=r.nodes)
    elif method in ("greedy", "lph"):
        from . import heuristics
        r = getattr(heuristics, method)(inst, B)
        mu, t, obj, status = r.assignment, r.t, r.objective, "heuristic"
        if method == "greedy":
            iterations = len(r.history) - 1
        else:
            stats["relaxed_objective"] = float(r.relaxed_objective)
    elif method == "oracle":
        from .oracle import solve_exhaustive
        mu, t, obj = solve_exhaustive(inst, B)
        status = "optimal"
    elif method == "da":
        t = inst.zero_allocation()
        mu = da_student_optimal(inst, t)
        obj, status = objective_value(inst, mu), "optimal"
    else:
        raise CliError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    stats["status"] = status
    return RunResult(Solution(tuple(t), tuple(mu), obj, method, stats), status, iterations, cuts)


def verify_solution(inst: Instance, sol: Solution) -> list[str]:
    """Every problem found in ``sol``; empty means feasible, stable and consistent."""
    budget = sol.stats.get("budget", inst.budget)
    problems = []
    try:
        check_allocation(inst, sol.t, budget)
    except InstanceError as exc:
        return [f"allocation: {exc}"]
    problems += check_matching(inst, sol.t, sol.assignment)
    if problems:
        return problems
    for s, c in blocking_pairs(inst, sol.t, sol.assignment):
        problems.append(f"blocking pair: student {s} and school {c}")
    obj = objective_value(inst, sol.assignment)
    if obj != sol.objective:
        problems.append(f"objective recorded as {sol.objective}, recomputed {obj}")
    return problems


# --- bench ----------------------------------------------------------------

def parse_grid(spec: str) -> dict:
    """``desk`` or ``n=50,100;m=5;B=0,1;seeds=3`` (optional ``seed0``)."""
    if spec == "desk":
        return dict(DESK_GRID, seed0=0)
    grid = dict(DESK_GRID, seed0=0)
    for part in filter(None, spec.split(";")):
        key, _, val = part.partition("=")
        key = key.strip()
        if key in ("n", "m", "B"):
            grid[key] = [int(v) for v in val.split(",")]
        elif key in ("seeds", "seed0"):
            grid[key] = int(val)
        else:
            raise CliError(f"unknown grid key {key!r}")
    return grid


def grid_cells(grid: dict):
    for n, m, B in itertools.product(grid["n"], grid["m"], grid["B"]):
        for seed in range(grid["seed0"], grid["seed0"] + grid["seeds"]):
            yield n, m, B, seed


def _bench_cell(args) -> list[dict]:
    (n, m, B, seed), methods, penalty, time_limit, node_limit = args
    inst = generate_random(n, m, seed, budget=B, penalty=penalty)
    iid = f"n{n}_m{m}_B{B}_s{seed}"
    rows = []
    for method in methods:
        t0 = time.perf_counter()
        r = run_method(inst, method, B, time_limit=time_limit, node_limit=node_limit)
        ms = (time.perf_counter() - t0) * 1000
        rows.append({"instance_id": iid, "n": n, "m": m, "B": B, "method": method,
                     "objective": r.solution.objective, "time_ms": f"{ms:.1f}",
                     "iterations": r.iterations, "cuts_added": r.cuts_added,
                     "_optimal": method in EXACT_METHODS and r.status == "optimal"})
    exact = [row["objective"] for row in rows if row["_optimal"]]
    best = min(exact) if exact else None
    for row in rows:
        del row["_optimal"]
        if best is None or best == 0:
            row["gap_vs_best_exact"] = ""
        else:
            row["gap_vs_best_exact"] = f"{float((row['objective'] - best) / abs(best)):.6f}"
        row["objective"] = str(row["objective"])
    return rows


def run_bench(grid: dict, methods: Sequence[str], penalty: str = "access", workers: int = 1,
              time_limit: Optional[float] = None, node_limit: Optional[int] = None) -> list[dict]:
    """Rows of the benchmark table, in grid order regardless of ``workers``."""
    for mth in methods:
        if mth not in METHODS:
            raise CliError(f"unknown method {mth!r}")
    jobs = [(cell, tuple(methods), penalty, time_limit, node_limit) for cell in grid_cells(grid)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            chunks = list(pool.map(_bench_cell, jobs))
    else:
        chunks = [_bench_cell(j) for j in jobs]
    return [row for chunk in chunks for row in chunk]


def write_bench_csv(rows: list[dict], out) -> None:
    w = csv.DictWriter(out, fieldnames=BENCH_COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)


# --- commands -------------------------------------------------------------

def cmd_generate(a) -> int:
    inst = generate_random(a.students, a.schools, a.seed, complete_prefs=not a.partial,
                           budget=a.budget, penalty=a.penalty)
    save_instance(inst, a.out)
    return EXIT_OK


def _load_bounds(path: str, m: int) -> tuple:
    with open(path) as fh:
        data = json.load(fh)
    bounds = data["bounds"] if isinstance(data, dict) else data
    if len(bounds) != m:
        raise InstanceError(f"bounds file has {len(bounds)} entries for {m} schools")
    return tuple(None if b is None else int(b) for b in bounds)


def cmd_solve(a) -> int:
    if a.method not in METHODS:
        raise CliError(f"unknown method {a.method!r}; choose from {', '.join(METHODS)}")
    inst = load_instance(a.instance)
    if a.bounds:
        inst = inst.with_bounds(_load_bounds(a.bounds, inst.n_schools))
    trace = (lambda line: print(line, file=sys.stderr)) if a.trace else None
    r = run_method(inst, a.method, a.budget, time_limit=a.time_limit,
                   node_limit=a.node_limit, trace=trace)
    if a.out:
        save_solution(r.solution, a.out)
    else:
        json.dump(r.solution.to_dict(), sys.stdout, sort_keys=True, indent=1)
        print()
    return EXIT_LIMIT if r.status == "limit" else EXIT_OK


def cmd_bench(a) -> int:
    rows = run_bench(parse_grid(a.grid), [s.strip() for s in a.methods.split(",") if s.strip()],
                     a.penalty, a.workers, a.time_limit, a.node_limit)
    if a.out == "-":
        write_bench_csv(rows, sys.stdout)
    else:
        with open(a.out, "w", newline="") as fh:
            write_bench_csv(rows, fh)
    return EXIT_OK


def cmd_verify(a) -> int:
    inst = load_instance(a.instance)
    if a.bounds:
        inst = inst.with_bounds(_load_bounds(a.bounds, inst.n_schools))
    problems = verify_solution(inst, load_solution(a.solution))
    for p in problems:
        print(p)
    if not problems:
        print("ok")
    return EXIT_ERROR if problems else EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="stablecap", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write a random instance")
    g.add_argument("--students", type=int, required=True)
    g.add_argument("--schools", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--budget", type=int, default=0)
    g.add_argument("--penalty", choices=PENALTY_MODES[:3], default="access")
    g.add_argument("--partial", action="store_true", help="random-length preference lists")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="solve an instance")
    s.add_argument("--instance", required=True)
    s.add_argument("--method", required=True, help="|".join(METHODS))
    s.add_argument("--budget", type=int)
    s.add_argument("--bounds", help="JSON file with per-school extra-seat bounds")
    s.add_argument("--out")
    s.add_argument("--trace", action="store_true", help="per-iteration CSV on stderr (cpm)")
    s.add_argument("--time-limit", type=float)
    s.add_argument("--node-limit", type=int)
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bench", help="run methods over a grid of random instances")
    b.add_argument("--grid", default="desk")
    b.add_argument("--methods", default="cpm,greedy,lph")
    b.add_argument("--penalty", choices=PENALTY_MODES[:3], default="access")
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--time-limit", type=float)
    b.add_argument("--node-limit", type=int)
    b.add_argument("--out", default="-")
    b.set_defaults(func=cmd_bench)

    v = sub.add_parser("verify", help="check a solution against its instance")
    v.add_argument("--instance", required=True)
    v.add_argument("--solution", required=True)
    v.add_argument("--bounds")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, InstanceError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
