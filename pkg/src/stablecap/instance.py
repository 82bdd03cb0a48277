"""Market instances, allocations, matchings and their JSON forms.

Students and schools are dense 0-based integer ids.  An unassigned student is
represented by ``None`` wherever a school id is expected.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from numbers import Real
from typing import Optional, Sequence

import numpy as np

Allocation = tuple[int, ...]
Assignment = tuple[Optional[int], ...]

PENALTY_MODES = ("access", "improve", "min_cardinality", "constant")


class InstanceError(ValueError):
    """Raised when an instance violates one of its structural invariants."""


@dataclass(frozen=True)
class Instance:
    """A school-choice market with a budget of extra seats.

    ``prefs[s]`` lists schools from most to least preferred; anything not
    listed is worse than being unassigned.  ``priorities[c]`` ranks exactly
    the students that list ``c``.  ``bounds[c]`` caps the extra seats of
    ``c`` (``None`` means no cap besides the budget).
    """

    prefs: tuple[tuple[int, ...], ...]
    priorities: tuple[tuple[int, ...], ...]
    capacities: tuple[int, ...]
    budget: int = 0
    penalties: tuple[Real, ...] = ()
    bounds: tuple[Optional[int], ...] = ()

    def __post_init__(self):
        n, m = len(self.prefs), len(self.priorities)
        if not self.penalties:
            object.__setattr__(self, "penalties", tuple(m + 1 for _ in range(n)))
        if not self.bounds:
            object.__setattr__(self, "bounds", tuple(None for _ in range(m)))
        self.validate()

    @property
    def n_students(self) -> int:
        return len(self.prefs)

    @property
    def n_schools(self) -> int:
        return len(self.priorities)

    def validate(self) -> None:
        n, m = self.n_students, self.n_schools
        if n == 0:
            raise InstanceError("no students")
        if len(self.capacities) != m:
            raise InstanceError("capacities length differs from number of schools")
        if len(self.penalties) != n:
            raise InstanceError("penalties length differs from number of students")
        if len(self.bounds) != m:
            raise InstanceError("bounds length differs from number of schools")
        if self.budget < 0:
            raise InstanceError("negative budget")
        for c, q in enumerate(self.capacities):
            if q < 0:
                raise InstanceError(f"negative capacity at school {c}")
        for c, b in enumerate(self.bounds):
            if b is not None and b < 0:
                raise InstanceError(f"negative bound at school {c}")
        listed = [set() for _ in range(m)]
        for s, pl in enumerate(self.prefs):
            if len(set(pl)) != len(pl):
                raise InstanceError(f"duplicate pref in list of student {s}")
            for c in pl:
                if not 0 <= c < m:
                    raise InstanceError(f"student {s} lists unknown school {c}")
                listed[c].add(s)
        for c, pr in enumerate(self.priorities):
            if len(set(pr)) != len(pr):
                raise InstanceError(f"duplicate student in priority of school {c}")
            ranked = set(pr)
            if ranked != listed[c]:
                extra = sorted(ranked - listed[c])
                if extra:
                    raise InstanceError(
                        f"unranked applicant: school {c} ranks students {extra} "
                        "that do not list it")
                missing = sorted(listed[c] - ranked)
                raise InstanceError(
                    f"unranked applicant: school {c} does not rank applicants {missing}")

    @cached_property
    def _student_rank(self) -> list[dict[int, int]]:
        return [{c: i + 1 for i, c in enumerate(pl)} for pl in self.prefs]

    @cached_property
    def _school_rank(self) -> list[dict[int, int]]:
        return [{s: i + 1 for i, s in enumerate(pr)} for pr in self.priorities]

    def rank(self, s: int, c: Optional[int]) -> Optional[int]:
        """1-based position of ``c`` in the list of ``s``; None if not listed."""
        if c is None:
            return None
        return self._student_rank[s].get(c)

    def priority(self, c: int, s: int) -> Optional[int]:
        """1-based position of ``s`` in the priority order of ``c``."""
        return self._school_rank[c].get(s)

    def applicants(self, c: int) -> tuple[int, ...]:
        return self.priorities[c]

    def prefers(self, s: int, a: Optional[int], b: Optional[int]) -> bool:
        """True when student ``s`` strictly prefers ``a`` to ``b``."""
        ra = self._student_rank[s].get(a) if a is not None else None
        rb = self._student_rank[s].get(b) if b is not None else None
        if ra is None:
            return False
        return rb is None or ra < rb

    def cost(self, s: int, c: Optional[int]) -> Real:
        """Objective contribution of placing ``s`` at ``c`` (or leaving it out)."""
        if c is None:
            return self.penalties[s]
        return self._student_rank[s][c]

    def bound(self, c: int) -> int:
        """Largest admissible number of extra seats for school ``c``."""
        b = self.bounds[c]
        return self.budget if b is None else min(self.budget, b)

    def with_budget(self, budget: int) -> "Instance":
        return Instance(self.prefs, self.priorities, self.capacities, budget,
                        self.penalties, self.bounds)

    def with_penalties(self, penalties: Sequence[Real]) -> "Instance":
        return Instance(self.prefs, self.priorities, self.capacities, self.budget,
                        tuple(penalties), self.bounds)

    def with_bounds(self, bounds: Sequence[Optional[int]]) -> "Instance":
        return Instance(self.prefs, self.priorities, self.capacities, self.budget,
                        self.penalties, tuple(bounds))

    def zero_allocation(self) -> Allocation:
        return (0,) * self.n_schools


def check_allocation(inst: Instance, t: Sequence[int], budget: Optional[int] = None) -> None:
    """Raise InstanceError unless ``t`` is a feasible allocation for ``inst``."""
    budget = inst.budget if budget is None else budget
    if len(t) != inst.n_schools:
        raise InstanceError("allocation length differs from number of schools")
    if any(v < 0 for v in t):
        raise InstanceError("negative extra seats")
    if sum(t) > budget:
        raise InstanceError(f"allocation uses {sum(t)} seats, budget is {budget}")
    for c, v in enumerate(t):
        b = inst.bounds[c]
        if b is not None and v > b:
            raise InstanceError(f"school {c} gets {v} extra seats, bound is {b}")


def penalty_preset(inst: Instance, mode: str, value: Optional[Real] = None) -> tuple[Real, ...]:
    """Per-student penalties for leaving a student unassigned.

    ``access`` charges |C|+1, ``improve`` charges |list|+1, ``min_cardinality``
    charges |S|*(1 - longest list), ``constant`` charges ``value``.
    """
    n, m = inst.n_students, inst.n_schools
    if mode == "access":
        return tuple(m + 1 for _ in range(n))
    if mode == "improve":
        return tuple(len(pl) + 1 for pl in inst.prefs)
    if mode == "min_cardinality":
        xi = max(len(pl) for pl in inst.prefs)
        return tuple(n * (1 - xi) for _ in range(n))
    if mode == "constant":
        if value is None:
            raise ValueError("constant penalty needs a value")
        return tuple(value for _ in range(n))
    raise ValueError(f"unknown penalty mode {mode!r}")


def generate_random(n: int, m: int, seed: int, complete_prefs: bool = True,
                    budget: int = 0, penalty: str = "access") -> Instance:
    """Random market: uniform preferences, capacities summing to ``n``.

    Every school gets one seat, then the remaining ``n - m`` seats go to
    independently and uniformly drawn schools.  Randomness comes from numpy's
    PCG64 seeded with ``seed``, so instances are reproducible.
    """
    if m < 1 or n < m:
        raise ValueError(f"need n >= m >= 1, got n={n}, m={m}")
    rng = np.random.Generator(np.random.PCG64(seed))
    prefs = []
    for _ in range(n):
        order = rng.permutation(m)
        length = m if complete_prefs else int(rng.integers(1, m + 1))
        prefs.append(tuple(int(c) for c in order[:length]))
    caps = np.ones(m, dtype=np.int64)
    caps += np.bincount(rng.integers(0, m, size=n - m), minlength=m)
    applicants = [[] for _ in range(m)]
    for s, pl in enumerate(prefs):
        for c in pl:
            applicants[c].append(s)
    priorities = []
    for c in range(m):
        order = rng.permutation(len(applicants[c]))
        priorities.append(tuple(applicants[c][i] for i in order))
    inst = Instance(tuple(prefs), tuple(priorities), tuple(int(q) for q in caps), budget)
    return inst.with_penalties(penalty_preset(inst, penalty))


# --- JSON -----------------------------------------------------------------

def _num_to_json(v: Real):
    if isinstance(v, Fraction):
        return int(v) if v.denominator == 1 else str(v)
    if isinstance(v, float) and v.is_integer():
        return int(v)
    return v


def _num_from_json(v) -> Real:
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, bool):
        raise InstanceError("penalty must be a number")
    return v


def instance_to_dict(inst: Instance) -> dict:
    schools = []
    for c in range(inst.n_schools):
        entry = {"priority": list(inst.priorities[c]), "capacity": inst.capacities[c]}
        if inst.bounds[c] is not None:
            entry["bound"] = inst.bounds[c]
        schools.append(entry)
    return {
        "students": [{"prefs": list(pl)} for pl in inst.prefs],
        "schools": schools,
        "budget": inst.budget,
        "penalties": {"values": [_num_to_json(v) for v in inst.penalties]},
    }


def instance_from_dict(data: dict) -> Instance:
    try:
        students = data["students"]
        schools = data["schools"]
    except (KeyError, TypeError) as exc:
        raise InstanceError(f"missing field {exc}") from None
    if not students:
        raise InstanceError("no students")
    prefs = tuple(tuple(int(c) for c in st["prefs"]) for st in students)
    priorities = tuple(tuple(int(s) for s in sc["priority"]) for sc in schools)
    caps = tuple(int(sc["capacity"]) for sc in schools)
    bounds = tuple(sc.get("bound") for sc in schools)
    inst = Instance(prefs, priorities, caps, int(data.get("budget", 0)), (), bounds)
    pen = data.get("penalties", {"mode": "access"})
    if "values" in pen:
        values = tuple(_num_from_json(v) for v in pen["values"])
        return inst.with_penalties(values)
    return inst.with_penalties(penalty_preset(inst, pen["mode"], pen.get("value")))


def dumps_instance(inst: Instance) -> str:
    return json.dumps(instance_to_dict(inst), sort_keys=True, indent=1) + "\n"


def save_instance(inst: Instance, path: str | os.PathLike) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_instance(inst))


def load_instance(path: str | os.PathLike) -> Instance:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InstanceError(f"parse error: {exc}") from exc
    return instance_from_dict(data)


@dataclass
class Solution:
    """Solver output as written to disk."""

    t: Allocation
    assignment: Assignment
    objective: Real
    method: str
    stats: dict

    def to_dict(self) -> dict:
        return {
            "t": list(self.t),
            "assignment": list(self.assignment),
            "objective": _num_to_json(self.objective),
            "method": self.method,
            "stats": self.stats,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Solution":
        return cls(
            t=tuple(int(v) for v in data["t"]),
            assignment=tuple(None if c is None else int(c) for c in data["assignment"]),
            objective=_num_from_json(data["objective"]),
            method=data.get("method", ""),
            stats=data.get("stats", {}),
        )


def save_solution(sol: Solution, path: str | os.PathLike) -> None:
    with open(path, "w") as fh:
        json.dump(sol.to_dict(), fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_solution(path: str | os.PathLike) -> Solution:
    with open(path) as fh:
        return Solution.from_dict(json.load(fh))


def save_allocation(t: Allocation, path: str | os.PathLike) -> None:
    with open(path, "w") as fh:
        json.dump({"t": list(t)}, fh)
        fh.write("\n")


def load_allocation(path: str | os.PathLike) -> Allocation:
    with open(path) as fh:
        return tuple(int(v) for v in json.load(fh)["t"])


def save_matching(mu: Assignment, path: str | os.PathLike) -> None:
    with open(path, "w") as fh:
        json.dump({"assignment": list(mu)}, fh)
        fh.write("\n")


def load_matching(path: str | os.PathLike) -> Assignment:
    with open(path) as fh:
        return tuple(None if c is None else int(c) for c in json.load(fh)["assignment"])
