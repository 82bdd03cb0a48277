import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from stablecap.fixtures import load_fixture
from stablecap.formulations import build_agg_lin, build_nonagg_lin
from stablecap.lp import (EQ, GE, LE, Model, add_constraints, relax, solve_lp, solve_mip,
                          to_lp_string)


def test_trivial_lp():
    m = Model()
    x = m.add_var(0, 10, False, 1)
    m.add_constr({x: 1}, GE, 2)
    sol = solve_lp(m)
    assert sol.status == "optimal" and sol.objective == pytest.approx(2)


def test_infeasible_and_unbounded():
    m = Model()
    x = m.add_var(0, 1)
    m.add_constr({x: 1}, GE, 2)
    assert solve_lp(m).status == "infeasible"
    assert solve_mip(m).status == "infeasible"
    u = Model()
    y = u.add_var(0, math.inf, False, -1)
    u.add_constr({y: 1}, GE, 1)
    assert solve_lp(u).status == "unbounded"


def test_bad_model_input():
    m = Model()
    with pytest.raises(ValueError):
        m.add_var(2, 1)
    m.add_var()
    with pytest.raises(ValueError):
        m.add_constr({5: 1}, LE, 1)
    with pytest.raises(ValueError):
        m.add_constr({0: 1}, "<", 1)
    m.integer[0] = True
    with pytest.raises(ValueError):
        solve_mip(m)


def _random_lp(rng, n, k):
    m = Model()
    for _ in range(n):
        m.add_var(float(rng.integers(-2, 1)), float(rng.integers(1, 4)), False,
                  float(rng.integers(-5, 6)))
    for _ in range(k):
        coef = {j: float(v) for j, v in enumerate(rng.integers(-3, 4, size=n)) if v}
        m.add_constr(coef, [LE, GE, EQ][int(rng.integers(0, 3))] if k > 1 else LE,
                     float(rng.integers(-3, 5)))
    return m


def _vertex_enumeration(m):
    """Best objective over all basic solutions of the bounded polyhedron."""
    A, b, senses, c = m.dense()
    n = m.n_vars
    rows = [(A[i], b[i]) for i in range(m.n_rows)]
    rows += [(np.eye(n)[j], m.lb[j]) for j in range(n)] + [(np.eye(n)[j], m.ub[j]) for j in range(n)]
    best = None
    for pick in itertools.combinations(range(len(rows)), n):
        M = np.array([rows[i][0] for i in pick])
        if abs(np.linalg.det(M)) < 1e-9:
            continue
        x = np.linalg.solve(M, np.array([rows[i][1] for i in pick]))
        if not m.violations(x, 1e-7):
            v = m.objective(x)
            best = v if best is None else min(best, v)
    return best


@pytest.mark.parametrize("seed", range(40))
def test_random_lp_against_vertices(seed):
    rng = np.random.default_rng(seed)
    m = _random_lp(rng, int(rng.integers(1, 5)), int(rng.integers(1, 5)))
    ref = _vertex_enumeration(m)
    sol = solve_lp(m)
    if ref is None:
        assert sol.status == "infeasible"
    else:
        assert sol.status == "optimal"
        assert sol.objective == pytest.approx(ref, abs=1e-6)
        assert m.violations(sol.x) == []
        hi = solve_lp(m, backend="highs")
        assert hi.objective == pytest.approx(ref, abs=1e-6)


def _dual_objective(m, y):
    A, b, senses, c = m.dense()
    d = c - A.T @ y
    lb, ub = np.array(m.lb), np.array(m.ub)
    return float(b @ y + np.sum(np.where(d > 0, d * lb, d * ub)))


@pytest.mark.parametrize("seed", range(40))
def test_duality_gap_zero(seed):
    rng = np.random.default_rng(100 + seed)
    m = _random_lp(rng, int(rng.integers(1, 6)), int(rng.integers(1, 6)))
    sol = solve_lp(m)
    if sol.status != "optimal":
        return
    y = sol.duals
    for r, yi in zip(m.rows, y):
        if r.sense == LE:
            assert yi <= 1e-7
        elif r.sense == GE:
            assert yi >= -1e-7
    assert _dual_objective(m, y) == pytest.approx(sol.objective, abs=1e-6)


def test_knapsack_vs_enumeration():
    w, v, cap = [3, 4, 2], [4, 5, 3], 6
    m = Model()
    xs = [m.add_var(0, 1, True, -vi) for vi in v]
    m.add_constr(dict(zip(xs, w)), LE, cap)
    sol = solve_mip(m)
    best = max(sum(vi * b for vi, b in zip(v, bits)) for bits in itertools.product((0, 1), repeat=3)
               if sum(wi * b for wi, b in zip(w, bits)) <= cap)
    assert -sol.objective == pytest.approx(best) == 8
    assert solve_mip(m, backend="highs").objective == pytest.approx(-8)


def test_integral_lp_needs_no_branching():
    m = Model()
    x = [[m.add_var(0, 1, True, c) for c in row] for row in ([3, 1], [2, 4])]
    for i in range(2):
        m.add_constr({x[i][0]: 1, x[i][1]: 1}, EQ, 1)
        m.add_constr({x[0][i]: 1, x[1][i]: 1}, EQ, 1)
    sol = solve_mip(m)
    assert sol.nodes == 1 and sol.objective == pytest.approx(3)


def test_add_satisfied_cut_keeps_optimum():
    m, _ = build_agg_lin(load_fixture("b1"))
    base = solve_mip(m).objective
    m2 = add_constraints(m, [({0: 1}, LE, 1, "slack")])
    assert m2.n_rows == m.n_rows + 1 and solve_mip(m2).objective == pytest.approx(base)


def test_node_limit_reports_limit():
    rng = np.random.default_rng(5)
    m = Model()
    w = rng.integers(5, 30, size=25)
    xs = [m.add_var(0, 1, True, -float(v)) for v in rng.integers(5, 30, size=25)]
    m.add_constr(dict(zip(xs, map(float, w))), LE, float(w.sum() // 2) + 0.5)
    sol = solve_mip(m, node_limit=3)
    assert sol.status == "limit"
    if sol.x is not None:
        assert sol.bound <= sol.objective + 1e-9


def test_determinism():
    m, _ = build_nonagg_lin(load_fixture("b3"))
    a, b = solve_mip(m), solve_mip(m)
    assert a.nodes == b.nodes and np.array_equal(a.x, b.x)


def test_mip_never_beats_relaxation():
    for name in ("b1", "b3", "b4"):
        m, _ = build_agg_lin(load_fixture(name))
        assert solve_lp(relax(m)).objective <= solve_mip(m).objective + 1e-7


def test_relax_identity_on_continuous():
    m = Model()
    m.add_var(0, 1)
    assert relax(m) == m


def test_lp_text_export():
    m = Model()
    x = m.add_var(0, 3, True, 2, "x")
    y = m.add_var(0, math.inf, False, -1, "y")
    m.add_constr({x: 1, y: -1}, GE, -2, "c0")
    text = to_lp_string(m)
    assert text.splitlines()[:4] == ["Minimize", " obj: 2 x - 1 y", "Subject To", " c0: 1 x - 1 y >= -2"]
    assert " 0 <= y <= +inf" in text and "General\n x" in text and text.endswith("End\n")


@given(st.integers(0, 10**6))
def test_native_and_highs_agree_on_random_mips(seed):
    rng = np.random.default_rng(seed)
    m = _random_lp(rng, int(rng.integers(1, 5)), int(rng.integers(1, 4)))
    for j in range(m.n_vars):
        m.integer[j] = bool(rng.integers(0, 2))
    a, b = solve_mip(m), solve_mip(m, backend="highs")
    assert a.status == b.status
    if a.status == "optimal":
        assert a.objective == pytest.approx(b.objective, abs=1e-6, rel=1e-6)  # HiGHS feasibility slack
