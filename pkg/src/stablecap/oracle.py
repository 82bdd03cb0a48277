"""Brute-force ground truth for tiny instances."""
from __future__ import annotations

import itertools
import math
from numbers import Real
from typing import Iterator, Optional

from .instance import Allocation, Assignment, Instance
from .matching import cardinality, da_student_optimal, is_stable, objective_value

MAX_ALLOCATIONS = 10**6
MAX_STABLE_STUDENTS = 8
MAX_STABLE_SCHOOLS = 3


class OracleLimitError(RuntimeError):
    pass


def _caps(inst: Instance, B: int) -> list[int]:
    return [B if b is None else min(B, b) for b in inst.bounds]


def enumerate_allocations(inst: Instance, budget: Optional[int] = None) -> Iterator[Allocation]:
    """Every t with sum(t) <= B and t_c <= b_c, in lexicographic order."""
    B = inst.budget if budget is None else budget
    caps = _caps(inst, B)
    m = inst.n_schools

    def rec(c: int, left: int, prefix: list[int]):
        if c == m:
            yield tuple(prefix)
            return
        for v in range(min(left, caps[c]) + 1):
            prefix.append(v)
            yield from rec(c + 1, left - v, prefix)
            prefix.pop()

    yield from rec(0, B, [])


def count_allocations(inst: Instance, budget: Optional[int] = None) -> int:
    """Number of feasible allocations (dynamic program, no enumeration)."""
    B = inst.budget if budget is None else budget
    ways = [1] + [0] * B                        # ways[j]: allocations using exactly j seats
    for cap in _caps(inst, B):
        new = [0] * (B + 1)
        for j, w in enumerate(ways):
            if w:
                for v in range(min(cap, B - j) + 1):
                    new[j + v] += w
        ways = new
    return sum(ways)


def solve_exhaustive(inst: Instance, budget: Optional[int] = None
                     ) -> tuple[Assignment, Allocation, Real]:
    """min_t f(t) by sweeping all allocations; ties go to the lexicographically smallest t."""
    if count_allocations(inst, budget) > MAX_ALLOCATIONS:
        raise OracleLimitError("too many allocations for exhaustive search")
    best = None
    for t in enumerate_allocations(inst, budget):
        mu = da_student_optimal(inst, t)
        v = objective_value(inst, mu)
        if best is None or v < best[2]:
            best = (mu, t, v)
    return best


def all_assignments(inst: Instance) -> Iterator[Assignment]:
    options = [list(pl) + [None] for pl in inst.prefs]
    for combo in itertools.product(*options):
        yield combo


def stable_set_bruteforce(inst: Instance, t: Optional[Allocation] = None) -> list[Assignment]:
    """All stable matchings of the market with capacities q + t."""
    if inst.n_students > MAX_STABLE_STUDENTS or inst.n_schools > MAX_STABLE_SCHOOLS:
        raise OracleLimitError("brute-force stable set limited to n <= 8, m <= 3")
    caps = list(inst.capacities) if t is None else [q + v for q, v in zip(inst.capacities, t)]
    out = []
    for mu in all_assignments(inst):
        load = [0] * inst.n_schools
        ok = True
        for c in mu:
            if c is not None:
                load[c] += 1
                if load[c] > caps[c]:
                    ok = False
                    break
        if ok and is_stable(inst, t, mu):
            out.append(mu)
    return out


def min_rank_stable(inst: Instance, t: Optional[Allocation] = None) -> tuple[Assignment, Real]:
    """Stable matching minimizing the rank sum, by enumeration."""
    best = None
    for mu in stable_set_bruteforce(inst, t):
        v = sum(inst.rank(s, c) for s, c in enumerate(mu) if c is not None)
        if best is None or v < best[1]:
            best = (mu, v)
    return best


def optimal_allocations(inst: Instance, budget: Optional[int] = None):
    """(optimal value, list of (t, DA matching)) over all optimal allocations."""
    if count_allocations(inst, budget) > MAX_ALLOCATIONS:
        raise OracleLimitError("too many allocations for exhaustive search")
    best = None
    winners = []
    for t in enumerate_allocations(inst, budget):
        mu = da_student_optimal(inst, t)
        v = objective_value(inst, mu)
        if best is None or v < best:
            best, winners = v, [(t, mu)]
        elif v == best:
            winners.append((t, mu))
    return best, winners


def cardinality_extremes(inst: Instance, budget: Optional[int] = None) -> tuple[int, int]:
    """(min, max) number of matched students among optimal allocations."""
    _, winners = optimal_allocations(inst, budget)
    cards = [cardinality(mu) for _, mu in winners]
    return min(cards), max(cards)


def max_da_cardinality(inst: Instance, budget: Optional[int] = None) -> int:
    """Largest number of matched students DA reaches over all feasible t."""
    return max(cardinality(da_student_optimal(inst, t)) for t in enumerate_allocations(inst, budget))


def min_da_cardinality(inst: Instance, budget: Optional[int] = None) -> int:
    return min(cardinality(da_student_optimal(inst, t)) for t in enumerate_allocations(inst, budget))


def stars_and_bars(m: int, B: int) -> int:
    return sum(math.comb(j + m - 1, m - 1) for j in range(B + 1))
