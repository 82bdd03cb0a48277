"""Builders turning an Instance into linear models.

Three models are provided:

* the aggregated linearization, one auxiliary ``alpha[s, c]`` per feasible
  pair standing for ``t_c * sum_{c' >=_s c} x[s, c']``;
* the non-aggregated linearization, one ``beta[s, c, c']`` per pair and
  per school ``c'`` the student likes at least as much as ``c``, standing
  for ``t_c * x[s, c']``;
* the comb main program, with continuous ``x``, a unary expansion ``y`` of
  the extra seats and one row per comb in a cut pool.

The unassigned option is an explicit column ``x[s, None]`` with unlimited
capacity.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .combs import Comb, initial_cut_pool  # noqa: F401  (re-exported)
from .instance import Allocation, Assignment, Instance
from .lp import EQ, GE, LE, Model, relax  # noqa: F401  (re-exported)


@dataclass
class VarMap:
    x: dict[tuple[int, Optional[int]], int] = field(default_factory=dict)
    t: dict[int, int] = field(default_factory=dict)
    y: dict[tuple[int, int], int] = field(default_factory=dict)
    alpha: dict[tuple[int, int], int] = field(default_factory=dict)
    beta: dict[tuple[int, int, int], int] = field(default_factory=dict)
    budget: int = 0

    def x_values(self, sol: np.ndarray) -> dict[tuple[int, Optional[int]], float]:
        return {k: float(sol[j]) for k, j in self.x.items() if abs(sol[j]) > 1e-12}

    def allocation(self, sol: np.ndarray, n_schools: int) -> Allocation:
        """Decode t from either the t variables or the unary expansion."""
        if self.t:
            return tuple(int(round(sol[self.t[c]])) for c in range(n_schools))
        t = []
        for c in range(n_schools):
            ks = [(sol[j], k) for (cc, k), j in self.y.items() if cc == c]
            t.append(max(ks)[1] if ks else 0)
        return tuple(t)

    def assignment(self, sol: np.ndarray, n_students: int) -> Assignment:
        """Integral x decoded to an assignment (largest entry per student)."""
        best: dict[int, tuple[float, Optional[int]]] = {}
        for (s, c), j in self.x.items():
            v = sol[j]
            if s not in best or v > best[s][0]:
                best[s] = (v, c)
        return tuple(best[s][1] for s in range(n_students))


def _cost(v) -> float:
    return float(v) if not isinstance(v, Fraction) else v.numerator / v.denominator


def _budget(inst: Instance, budget: Optional[int]) -> int:
    return inst.budget if budget is None else int(budget)


def _school_cap(inst: Instance, c: int, B: int) -> int:
    b = inst.bounds[c]
    return B if b is None else min(B, b)


def _assignment_block(inst: Instance, m: Model, vm: VarMap, integral_x: bool) -> None:
    for s, pl in enumerate(inst.prefs):
        for r, c in enumerate(pl, start=1):
            vm.x[(s, c)] = m.add_var(0, 1, integral_x, r, f"x_{s}_{c}")
        vm.x[(s, None)] = m.add_var(0, 1, integral_x, _cost(inst.penalties[s]), f"x_{s}_e")
    for s, pl in enumerate(inst.prefs):
        row = {vm.x[(s, c)]: 1 for c in pl}
        row[vm.x[(s, None)]] = 1
        m.add_constr(row, EQ, 1, f"assign_{s}")


def _p_z(inst: Instance, B: int, integral_x: bool = True) -> tuple[Model, VarMap]:
    """Assignment, capacity and budget rows with integer t."""
    m = Model()
    vm = VarMap(budget=B)
    _assignment_block(inst, m, vm, integral_x)
    for c in range(inst.n_schools):
        vm.t[c] = m.add_var(0, _school_cap(inst, c, B), True, 0, f"t_{c}")
    for c in range(inst.n_schools):
        row = {vm.x[(s, c)]: 1 for s in inst.priorities[c]}
        row[vm.t[c]] = -1
        m.add_constr(row, LE, inst.capacities[c], f"cap_{c}")
    m.add_constr({vm.t[c]: 1 for c in range(inst.n_schools)}, LE, B, "budget")
    return m, vm


def _stability_terms(inst: Instance, vm: VarMap, s: int, c: int) -> tuple[list[int], dict[int, float]]:
    """(weakly better x columns of s, stability row pieces) for pair (s, c)."""
    r = inst.rank(s, c)
    better = [vm.x[(s, c2)] for c2 in inst.prefs[s][:r]]
    q = inst.capacities[c]
    row: dict[int, float] = {}
    for j in better:
        row[j] = row.get(j, 0) - q
    for s2 in inst.priorities[c][:inst.priority(c, s) - 1]:
        j = vm.x[(s2, c)]
        row[j] = row.get(j, 0) - 1
    return better, row


def build_agg_lin(inst: Instance, budget: Optional[int] = None) -> tuple[Model, VarMap]:
    """Aggregated linearization with binary x and integer t."""
    B = _budget(inst, budget)
    m, vm = _p_z(inst, B)
    for s, pl in enumerate(inst.prefs):
        for c in pl:
            a = m.add_var(0, np.inf, False, 0, f"a_{s}_{c}")
            vm.alpha[(s, c)] = a
            better, row = _stability_terms(inst, vm, s, c)
            row[vm.t[c]] = row.get(vm.t[c], 0) + 1
            row[a] = -1
            m.add_constr(row, LE, -inst.capacities[c], f"stab_{s}_{c}")
            mc = {a: -1, vm.t[c]: 1}
            for j in better:
                mc[j] = B
            m.add_constr(mc, LE, B, f"mc1_{s}_{c}")
            m.add_constr({a: 1, vm.t[c]: -1}, LE, 0, f"mc2_{s}_{c}")
            mc3 = {a: 1}
            for j in better:
                mc3[j] = -B
            m.add_constr(mc3, LE, 0, f"mc3_{s}_{c}")
    return m, vm


def build_nonagg_lin(inst: Instance, budget: Optional[int] = None) -> tuple[Model, VarMap]:
    """Non-aggregated linearization with binary x and integer t."""
    B = _budget(inst, budget)
    m, vm = _p_z(inst, B)
    for s, pl in enumerate(inst.prefs):
        for c in pl:
            better, row = _stability_terms(inst, vm, s, c)
            row[vm.t[c]] = row.get(vm.t[c], 0) + 1
            for c2 in pl[:inst.rank(s, c)]:
                b = m.add_var(0, np.inf, False, 0, f"b_{s}_{c}_{c2}")
                vm.beta[(s, c, c2)] = b
                row[b] = -1
                xj = vm.x[(s, c2)]
                m.add_constr({b: -1, vm.t[c]: 1, xj: B}, LE, B, f"mc1_{s}_{c}_{c2}")
                m.add_constr({b: 1, vm.t[c]: -1}, LE, 0, f"mc2_{s}_{c}_{c2}")
                m.add_constr({b: 1, xj: -B}, LE, 0, f"mc3_{s}_{c}_{c2}")
            m.add_constr(row, LE, -inst.capacities[c], f"stab_{s}_{c}")
    return m, vm


def comb_row(inst: Instance, vm: VarMap, comb: Comb) -> tuple[dict[int, float], str, float, str]:
    """Row ``sum_{pairs in comb} x - k * y[c, k] >= q_c`` for the main program."""
    if comb.k > vm.budget:
        raise ValueError(f"comb at expansion {comb.k} exceeds budget {vm.budget}")
    row: dict[int, float] = {vm.x[p]: 1 for p in sorted(comb.pairs(inst))}
    if comb.k:
        row[vm.y[(comb.school, comb.k)]] = -comb.k
    name = f"comb_{comb.school}_{comb.k}_{comb.base}_" + "_".join(map(str, comb.teeth))
    return row, GE, inst.capacities[comb.school], name


def build_bbcap_main(inst: Instance, budget: Optional[int] = None,
                     cut_pool: Iterable[Comb] = ()) -> tuple[Model, VarMap]:
    """Comb main program with continuous x and binary unary expansion y."""
    B = _budget(inst, budget)
    m = Model()
    vm = VarMap(budget=B)
    _assignment_block(inst, m, vm, False)
    for c in range(inst.n_schools):
        hi = _school_cap(inst, c, B)
        for k in range(B + 1):
            vm.y[(c, k)] = m.add_var(0, 1 if k <= hi else 0, True, 0, f"y_{c}_{k}")
    for c in range(inst.n_schools):
        row = {vm.x[(s, c)]: 1 for s in inst.priorities[c]}
        for k in range(1, B + 1):
            row[vm.y[(c, k)]] = -k
        m.add_constr(row, LE, inst.capacities[c], f"cap_{c}")
        m.add_constr({vm.y[(c, k)]: 1 for k in range(B + 1)}, EQ, 1, f"unary_{c}")
    m.add_constr({vm.y[(c, k)]: k for c in range(inst.n_schools) for k in range(1, B + 1)},
                 LE, B, "budget")
    for comb in cut_pool:
        m.add_constr(*comb_row(inst, vm, comb))
    return m, vm


def fix_allocation(m: Model, vm: VarMap, t: Sequence[int]) -> Model:
    """Copy of a model with the allocation pinned to ``t``."""
    out = m.copy()
    if vm.t:
        for c, j in vm.t.items():
            out.lb[j] = out.ub[j] = float(t[c])
    for (c, k), j in vm.y.items():
        v = 1.0 if k == t[c] else 0.0
        out.lb[j] = out.ub[j] = v
    return out


@dataclass
class CompactResult:
    assignment: Assignment
    t: Allocation
    objective: object
    status: str
    mip_objective: Optional[float]
    nodes: int


def solve_compact(inst: Instance, budget: Optional[int] = None, kind: str = "agg",
                  backend: str = "auto", time_limit: Optional[float] = None,
                  node_limit: Optional[int] = None) -> CompactResult:
    """Solve the aggregated (``agg``) or non-aggregated (``nonagg``) model as a MIP."""
    from .lp import solve_mip
    from .matching import objective_value
    build = {"agg": build_agg_lin, "nonagg": build_nonagg_lin}[kind]
    m, vm = build(inst, budget)
    sol = solve_mip(m, time_limit=time_limit, node_limit=node_limit, backend=backend)
    if sol.x is None:
        raise RuntimeError(f"compact model returned {sol.status} without a solution")
    mu = vm.assignment(sol.x, inst.n_students)
    t = vm.allocation(sol.x, inst.n_schools)
    return CompactResult(mu, t, objective_value(inst, mu), sol.status, sol.objective, sol.nodes)
