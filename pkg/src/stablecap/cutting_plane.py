"""Cutting-plane method over comb inequalities."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from numbers import Real
from typing import Callable, Optional

from .combs import (Comb, SeparationStats, initial_cut_pool, separate,
                    separate_all_schools, to_fractions)
from .formulations import build_bbcap_main, comb_row
from .instance import Allocation, Assignment, Instance
from .lp import solve_mip
from .matching import da_student_optimal, objective_value


@dataclass
class CpmStats:
    iterations: int = 0
    cuts_added: int = 0
    mp_solve_time: float = 0.0
    separation_time: float = 0.0
    final_objective: Optional[Real] = None
    mp_bounds: list[float] = field(default_factory=list)
    nodes: int = 0
    fallback_separations: int = 0


@dataclass
class CpmResult:
    assignment: Assignment
    t: Allocation
    objective: Real
    status: str                  # optimal | limit
    stats: CpmStats
    cuts: list[Comb] = field(default_factory=list)


TRACE_HEADER = "iteration,cuts_added,pool_size,mp_bound,t"


def solve_cpm(inst: Instance, budget: Optional[int] = None, *, init_pool: bool = True,
              backend: str = "auto", time_limit: Optional[float] = None,
              node_limit: Optional[int] = None, max_iterations: int = 10_000,
              trace: Optional[Callable[[str], None]] = None) -> CpmResult:
    """Solve the capacity-expansion problem exactly by adding violated combs.

    Each round solves the main program over the current cut pool, decodes
    the allocation, runs DA on it and separates the most violated combs of
    the schools where the fractional and DA assignments disagree.  The loop
    stops when nothing new is found.
    """
    B = inst.budget if budget is None else budget
    stats = CpmStats()
    pool: list[Comb] = initial_cut_pool(inst) if init_pool else []
    seen = set(pool)
    model, vm = build_bbcap_main(inst, B, pool)
    start = time.monotonic()
    status = "optimal"
    t_star: Allocation = inst.zero_allocation()
    if trace:
        trace(TRACE_HEADER)
    while True:
        if stats.iterations >= max_iterations:
            status = "limit"
            break
        remaining = None if time_limit is None else max(0.0, time_limit - (time.monotonic() - start))
        t0 = time.monotonic()
        sol = solve_mip(model, time_limit=remaining, node_limit=node_limit, backend=backend)
        stats.mp_solve_time += time.monotonic() - t0
        stats.iterations += 1
        stats.nodes += sol.nodes
        if sol.status != "optimal":
            if sol.status == "limit":
                status = "limit"
                if sol.x is not None:
                    t_star = vm.allocation(sol.x, inst.n_schools)
                break
            raise RuntimeError(f"main program {sol.status}")
        stats.mp_bounds.append(sol.objective)
        t_star = vm.allocation(sol.x, inst.n_schools)
        mu = da_student_optimal(inst, t_star)
        x = to_fractions(vm.x_values(sol.x))
        t0 = time.monotonic()
        sep = SeparationStats()
        cuts = [cb for cb in separate(inst, x, t_star, mu, sep) if cb not in seen]
        if not cuts and sol.objective < objective_value(inst, mu) - 1e-6:
            # x is not yet the DA matching: search every school's full comb family
            stats.fallback_separations += 1
            cuts = [cb for cb in separate_all_schools(inst, x, t_star, sep) if cb not in seen]
        stats.separation_time += time.monotonic() - t0
        if trace:
            trace(f"{stats.iterations},{len(cuts)},{len(pool)},{sol.objective:.6f},"
                  + " ".join(map(str, t_star)))
        if not cuts:
            break
        for cb in cuts:
            seen.add(cb)
            pool.append(cb)
            model.add_constr(*comb_row(inst, vm, cb))
        stats.cuts_added += len(cuts)
    mu = da_student_optimal(inst, t_star)
    obj = objective_value(inst, mu)
    stats.final_objective = obj
    return CpmResult(mu, t_star, obj, status, stats, pool)
