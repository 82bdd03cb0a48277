"""Generalized comb inequalities and their separation.

A comb for school ``c`` at expansion ``k`` has a base student ``b`` with at
least ``q_c + k - 1`` students ahead of it in ``c``'s priority list.  Its
shaft is every pair ``(s, c)`` with ``s`` at or above ``b``; its teeth are
``q_c + k`` students of the shaft (the base among them), each contributing
the pairs of schools it strictly prefers to ``c``.  A stable assignment for
capacity ``q_c + k`` puts at least ``q_c + k`` units of weight on every such
comb.
"""
from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from typing import Iterator, Mapping, Optional, Sequence

from .instance import Assignment, Instance
from .matching import FracAssign, column_sums


@dataclass(frozen=True, order=True)
class Comb:
    school: int
    k: int
    base: int
    teeth: tuple[int, ...]      # sorted student ids, includes base

    def pairs(self, inst: Instance) -> set[tuple[int, int]]:
        c = self.school
        pr = inst.priorities[c]
        shaft = pr[:inst.priority(c, self.base)]
        out = {(s, c) for s in shaft}
        for s in self.teeth:
            for c2 in inst.prefs[s][:inst.rank(s, c) - 1]:
                out.add((s, c2))
        return out

    def problems(self, inst: Instance) -> list[str]:
        """Violations of the structural comb conditions (empty if valid)."""
        c = self.school
        out = []
        pos = inst.priority(c, self.base)
        if pos is None:
            return [f"base {self.base} does not apply to school {c}"]
        cap = inst.capacities[c] + self.k
        if pos - 1 < cap - 1:
            out.append(f"base {self.base} has {pos - 1} students ahead, needs {cap - 1}")
        if len(set(self.teeth)) != cap:
            out.append(f"{len(set(self.teeth))} teeth, expected {cap}")
        if self.base not in self.teeth:
            out.append("base tooth missing")
        for s in self.teeth:
            p = inst.priority(c, s)
            if p is None or p > pos:
                out.append(f"tooth {s} lies outside the shaft")
        return out

    def to_dict(self) -> dict:
        return {"school": self.school, "k": self.k, "base": self.base, "teeth": list(self.teeth)}


def make_comb(school: int, k: int, base: int, teeth) -> Comb:
    return Comb(school, k, base, tuple(sorted(set(teeth))))


def tooth_value(inst: Instance, x: FracAssign, s: int, c: int, include_base: bool = False) -> Real:
    r = inst.rank(s, c)
    v = sum(x.get((s, c2), 0) for c2 in inst.prefs[s][:r - 1])
    if include_base:
        v += x.get((s, c), 0)
    return v


def comb_value(inst: Instance, x: FracAssign, comb: Comb) -> Real:
    return sum(x.get(p, 0) for p in comb.pairs(inst))


def _caps(inst: Instance, t: Optional[Sequence[int]]) -> list[int]:
    t = t or [0] * inst.n_schools
    return [q + tc for q, tc in zip(inst.capacities, t)]


@dataclass
class SeparationStats:
    ops: int = 0
    schools_scanned: int = 0
    per_school_ops: dict[int, int] = field(default_factory=dict)


def block_set(inst: Instance, x: FracAssign, t: Optional[Sequence[int]], mu: Assignment,
              stats: Optional[SeparationStats] = None) -> list[int]:
    """Schools full in both ``x`` and ``mu`` with at least one exceeding student."""
    caps = _caps(inst, t)
    col = [0] * inst.n_schools
    exceeding = [False] * inst.n_schools
    for (s, c), v in x.items():
        if c is None or v <= 0:
            continue
        col[c] += v
        if mu[s] != c:
            exceeding[c] = True
    load = [0] * inst.n_schools
    for c in mu:
        if c is not None:
            load[c] += 1
    if stats is not None:
        stats.ops += len(x) + len(mu)
    return [c for c in range(inst.n_schools)
            if exceeding[c] and col[c] == caps[c] and load[c] == caps[c]]


def _min_comb_for_school(inst: Instance, x: FracAssign, c: int, cap: int, k: int,
                         upto: Optional[int], stats: Optional[SeparationStats]):
    """Least-valued comb of school c with cap teeth, bases scanned down to ``upto``.

    The teeth set is kept as the ``cap`` smallest tooth values seen so far
    (max-heap keyed by value, earlier priority treated as larger on ties).
    A new base ``s'`` then yields the best comb based at ``s'`` by swapping
    it for the largest tooth in the set.
    """
    pr = inst.priorities[c]
    last = len(pr) - 1 if upto is None else inst.priority(c, upto) - 1
    heap: list[tuple[Real, int, int]] = []       # (-v, position, student)
    sum_t = 0
    shaft = 0
    best_val = None
    best = None
    ops = 0
    for pos in range(last + 1):
        s = pr[pos]
        shaft += x.get((s, c), 0)
        r = inst.rank(s, c)
        v = 0
        for c2 in inst.prefs[s][:r - 1]:
            v += x.get((s, c2), 0)
        ops += r
        if len(heap) < cap:
            heapq.heappush(heap, (-v, pos, s))
            sum_t += v
            ops += 1
            if len(heap) == cap:
                best_val = shaft + sum_t
                best = (s, [e[2] for e in heap])
                ops += cap
            continue
        v_star = -heap[0][0]
        if v < v_star:
            cand = shaft + sum_t - v_star + v
            heapq.heapreplace(heap, (-v, pos, s))
            sum_t += v - v_star
            ops += 2
            if cand < best_val:
                best_val = cand
                best = (s, [e[2] for e in heap])
                ops += cap
    if stats is not None:
        stats.ops += ops
        stats.per_school_ops[c] = stats.per_school_ops.get(c, 0) + ops
        stats.schools_scanned += 1
    if best is None:
        return None, None
    return make_comb(c, k, best[0], best[1]), best_val


def separate(inst: Instance, x: FracAssign, t: Optional[Sequence[int]], mu: Assignment,
             stats: Optional[SeparationStats] = None) -> list[Comb]:
    """Most violated comb of every school in block(x), when it is violated.

    ``x`` should hold exact values (Fractions); ``mu`` is the student-optimal
    stable matching for capacities q + t.
    """
    t = tuple(t) if t is not None else inst.zero_allocation()
    caps = _caps(inst, t)
    out = []
    for c in block_set(inst, x, t, mu, stats):
        pr = inst.priorities[c]
        low = max(pos for pos, s in enumerate(pr) if x.get((s, c), 0) > 0)
        comb, val = _min_comb_for_school(inst, x, c, caps[c], t[c], pr[low], stats)
        if comb is not None and val < caps[c]:
            out.append(comb)
    return out


def separate_all_schools(inst: Instance, x: FracAssign, t: Optional[Sequence[int]],
                         stats: Optional[SeparationStats] = None) -> list[Comb]:
    """Least-valued violated comb of every school, scanning whole priority lists."""
    t = tuple(t) if t is not None else inst.zero_allocation()
    caps = _caps(inst, t)
    out = []
    for c in range(inst.n_schools):
        if caps[c] == 0:
            continue
        comb, val = _min_comb_for_school(inst, x, c, caps[c], t[c], None, stats)
        if comb is not None and val < caps[c]:
            out.append(comb)
    return out


def min_comb(inst: Instance, x: FracAssign, c: int, k: int):
    """(comb, value) of the least-valued comb in the family of c at expansion k."""
    cap = inst.capacities[c] + k
    if cap == 0:
        return None, None
    return _min_comb_for_school(inst, x, c, cap, k, None, None)


def enumerate_combs(inst: Instance, c: int, k: int) -> Iterator[Comb]:
    """Every comb of school c at expansion k (exponential; for tiny instances)."""
    cap = inst.capacities[c] + k
    if cap == 0:
        return
    pr = inst.priorities[c]
    for pos in range(cap - 1, len(pr)):
        for rest in itertools.combinations(pr[:pos], cap - 1):
            yield make_comb(c, k, pr[pos], rest + (pr[pos],))


def initial_cut_pool(inst: Instance, mu0: Optional[Assignment] = None) -> list[Comb]:
    """One zero-expansion comb per school that is full in DA with no extra seats.

    The comb is based at the lowest-priority admitted student and has its
    teeth at all admitted students.
    """
    if mu0 is None:
        from .matching import da_student_optimal
        mu0 = da_student_optimal(inst, None)
    members: list[list[int]] = [[] for _ in range(inst.n_schools)]
    for s, c in enumerate(mu0):
        if c is not None:
            members[c].append(s)
    out = []
    for c, mem in enumerate(members):
        q = inst.capacities[c]
        if q == 0 or len(mem) != q:
            continue
        base = max(mem, key=lambda s: inst.priority(c, s))
        out.append(make_comb(c, 0, base, mem))
    return out


def to_fractions(values: Mapping[tuple[int, Optional[int]], float], limit: int = 10**6
                 ) -> dict[tuple[int, Optional[int]], Fraction]:
    """Snap solver output onto a rational grid, dropping zeros."""
    out = {}
    for key, v in values.items():
        f = Fraction(v).limit_denominator(limit)
        if f != 0:
            out[key] = f
    return out
