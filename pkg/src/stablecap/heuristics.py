"""Greedy seat-by-seat allocation and the flow-relaxation heuristic."""
from __future__ import annotations

from dataclasses import dataclass, field
from numbers import Real
from typing import Optional

from .flow import solve_relaxed
from .instance import Allocation, Assignment, Instance
from .matching import da_student_optimal, objective_value


@dataclass
class HeuristicResult:
    assignment: Assignment
    t: Allocation
    objective: Real
    history: list[Real] = field(default_factory=list)   # f after each committed seat
    relaxed_objective: Optional[Real] = None


def greedy(inst: Instance, budget: Optional[int] = None) -> HeuristicResult:
    """Give each seat to the school whose extra seat lowers f the most.

    Ties go to the lowest school id.  Stops early when no single seat
    strictly improves the objective.
    """
    B = inst.budget if budget is None else budget
    t = [0] * inst.n_schools
    mu = da_student_optimal(inst, t)
    cur = objective_value(inst, mu)
    history = [cur]
    for _ in range(B):
        best = None
        for c in range(inst.n_schools):
            b = inst.bounds[c]
            if b is not None and t[c] >= b:
                continue
            t[c] += 1
            cand = da_student_optimal(inst, t)
            v = objective_value(inst, cand)
            t[c] -= 1
            if best is None or v < best[0]:
                best = (v, c, cand)
        if best is None or best[0] >= cur:
            break
        cur, c, mu = best
        t[c] += 1
        history.append(cur)
    return HeuristicResult(mu, tuple(t), cur, history)


def lph(inst: Instance, budget: Optional[int] = None) -> HeuristicResult:
    """Allocation from the stability-free min-cost flow, then DA on it."""
    _, t, relaxed = solve_relaxed(inst, budget)
    mu = da_student_optimal(inst, t)
    return HeuristicResult(mu, t, objective_value(inst, mu), [], relaxed)
