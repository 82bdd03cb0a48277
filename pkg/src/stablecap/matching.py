"""Deferred acceptance, stability checks and the value function f(t)."""
from __future__ import annotations

import heapq
from fractions import Fraction
from numbers import Real
from typing import Mapping, Optional, Sequence

from .instance import Allocation, Assignment, Instance

# Fractional assignment: (student, school or None) -> value, nonzero entries only.
FracAssign = Mapping[tuple[int, Optional[int]], Real]


def _caps(inst: Instance, t: Optional[Sequence[int]]) -> list[int]:
    if t is None:
        return list(inst.capacities)
    return [q + tc for q, tc in zip(inst.capacities, t)]


def da_student_optimal(inst: Instance, t: Optional[Sequence[int]] = None,
                       trace: Optional[list[str]] = None) -> Assignment:
    """Student-proposing deferred acceptance on the market with capacities q + t.

    Proposals are processed round by round in ascending student id.  If
    ``trace`` is a list, one line per proposal/rejection is appended to it.
    """
    caps = _caps(inst, t)
    n = inst.n_students
    nxt = [0] * n
    # per school: min-heap of (-priority position, student) so the worst held is on top
    held: list[list[tuple[int, int]]] = [[] for _ in range(inst.n_schools)]
    free = list(range(n))
    rnd = 0
    while free:
        rnd += 1
        rejected = []
        for s in free:
            pl = inst.prefs[s]
            if nxt[s] >= len(pl):
                continue
            c = pl[nxt[s]]
            nxt[s] += 1
            if trace is not None:
                trace.append(f"round {rnd}: s{s} -> c{c}")
            heap = held[c]
            heapq.heappush(heap, (-inst.priority(c, s), s))
            if len(heap) > caps[c]:
                _, out = heapq.heappop(heap)
                rejected.append(out)
                if trace is not None:
                    trace.append(f"round {rnd}: c{c} rejects s{out}")
        free = sorted(s for s in rejected if nxt[s] < len(inst.prefs[s]))
    assign: list[Optional[int]] = [None] * n
    for c, heap in enumerate(held):
        for _, s in heap:
            assign[s] = c
    return tuple(assign)


def da_school_optimal(inst: Instance, t: Optional[Sequence[int]] = None) -> Assignment:
    """School-proposing deferred acceptance on the market with capacities q + t."""
    caps = _caps(inst, t)
    m = inst.n_schools
    nxt = [0] * m
    count = [0] * m
    assign: list[Optional[int]] = [None] * inst.n_students
    active = [c for c in range(m)]
    while active:
        again = set()
        for c in active:
            pr = inst.priorities[c]
            while count[c] < caps[c] and nxt[c] < len(pr):
                s = pr[nxt[c]]
                nxt[c] += 1
                cur = assign[s]
                if cur is None or inst.prefers(s, c, cur):
                    if cur is not None:
                        count[cur] -= 1
                        again.add(cur)
                    assign[s] = c
                    count[c] += 1
        active = sorted(again)
    return tuple(assign)


def objective_value(inst: Instance, mu: Assignment) -> Real:
    """Sum of ranks of assigned students plus penalties of unassigned ones."""
    return sum(inst.cost(s, c) for s, c in enumerate(mu))


def f_of_t(inst: Instance, t: Optional[Sequence[int]] = None) -> Real:
    return objective_value(inst, da_student_optimal(inst, t))


def cardinality(mu: Assignment) -> int:
    return sum(1 for c in mu if c is not None)


def school_loads(inst: Instance, mu: Assignment) -> list[int]:
    load = [0] * inst.n_schools
    for c in mu:
        if c is not None:
            load[c] += 1
    return load


def blocking_pairs(inst: Instance, t: Optional[Sequence[int]], mu: Assignment) -> list[tuple[int, int]]:
    """All (s, c) with s preferring c to mu(s) and c having room or a worse admit."""
    caps = _caps(inst, t)
    members: list[list[int]] = [[] for _ in range(inst.n_schools)]
    for s, c in enumerate(mu):
        if c is not None:
            members[c].append(s)
    worst = [max((inst.priority(c, s) for s in members[c]), default=0)
             for c in range(inst.n_schools)]
    out = []
    for s, pl in enumerate(mu):
        for c in inst.prefs[s]:
            if c == mu[s]:
                break
            if len(members[c]) < caps[c] or inst.priority(c, s) < worst[c]:
                out.append((s, c))
    return out


def is_stable(inst: Instance, t: Optional[Sequence[int]], mu: Assignment) -> bool:
    return not blocking_pairs(inst, t, mu)


def check_matching(inst: Instance, t: Optional[Sequence[int]], mu: Assignment) -> list[str]:
    """Feasibility problems of ``mu`` under capacities q + t (empty if none)."""
    problems = []
    if len(mu) != inst.n_students:
        return [f"assignment has {len(mu)} entries for {inst.n_students} students"]
    for s, c in enumerate(mu):
        if c is not None and inst.rank(s, c) is None:
            problems.append(f"student {s} assigned to unlisted school {c}")
    caps = _caps(inst, t)
    for c, load in enumerate(school_loads(inst, mu)):
        if load > caps[c]:
            problems.append(f"school {c} holds {load} students, capacity {caps[c]}")
    return problems


def matching_to_frac(mu: Assignment) -> dict[tuple[int, Optional[int]], Fraction]:
    return {(s, c): Fraction(1) for s, c in enumerate(mu)}


def column_sums(inst: Instance, x: FracAssign) -> list[Real]:
    col = [0] * inst.n_schools
    for (s, c), v in x.items():
        if c is not None:
            col[c] += v
    return col


def fractional_blocking_pairs(inst: Instance, t: Optional[Sequence[int]], x: FracAssign,
                              eps: float = 1e-9) -> list[tuple[int, int]]:
    """Pairs (s, c) that block the fractional assignment ``x``.

    (s, c) blocks when s puts positive weight on something worse than c and
    c is either under-subscribed or puts positive weight on a student it
    ranks below s.
    """
    caps = _caps(inst, t)
    col = column_sums(inst, x)
    worst_pos = [0] * inst.n_schools
    worst_rank = [0] * inst.n_students   # rank of the worst positive option, inf for None
    for (s, c), v in x.items():
        if v <= eps:
            continue
        if c is None:
            worst_rank[s] = float("inf")
        else:
            worst_pos[c] = max(worst_pos[c], inst.priority(c, s))
            worst_rank[s] = max(worst_rank[s], inst.rank(s, c))
    out = []
    for s, pl in enumerate(inst.prefs):
        for r, c in enumerate(pl, start=1):
            if r >= worst_rank[s]:
                break
            under = col[c] < caps[c] - eps
            if under or inst.priority(c, s) < worst_pos[c]:
                out.append((s, c))
    return out
