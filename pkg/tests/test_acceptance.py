"""End-to-end acceptance checks, one test per numbered criterion.

Each test records a one-line verdict that the terminal summary prints as
``[PASS]`` / ``[FAIL]`` lines (see ``conftest.py``).  Run directly with
``python tests/test_acceptance.py`` for the same lines without pytest.
"""
import statistics
import time

import numpy as np
import pytest

from stablecap.cli import run_method
from stablecap.combs import Comb, SeparationStats, comb_value, separate
from stablecap.cutting_plane import solve_cpm
from stablecap.fixtures import load_fixture
from stablecap.flow import solve_relaxed
from stablecap.formulations import build_agg_lin, build_nonagg_lin, build_bbcap_main, relax
from stablecap.heuristics import greedy, lph
from stablecap.instance import Instance, generate_random, penalty_preset
from stablecap.lp import solve_lp, solve_mip
from stablecap.matching import (blocking_pairs, cardinality, da_school_optimal,
                                da_student_optimal, f_of_t, matching_to_frac)
from stablecap.oracle import (cardinality_extremes, count_allocations, enumerate_allocations,
                              max_da_cardinality, min_rank_stable, optimal_allocations,
                              solve_exhaustive, stable_set_bruteforce)

RESULTS: dict[int, tuple[bool, str]] = {}


def record(n: int, ok: bool, detail: str) -> None:
    RESULTS[n] = (bool(ok), detail)
    assert ok, f"criterion {n}: {detail}"


def _suite(count, seed, n_range, m_range, B_range):
    rng = np.random.default_rng(seed)
    for i in range(count):
        m = int(rng.integers(m_range[0], m_range[1] + 1))
        n = int(rng.integers(max(m, n_range[0]), n_range[1] + 1))
        B = int(rng.integers(B_range[0], B_range[1] + 1))
        mode = ("access", "improve")[i % 2]
        yield generate_random(n, m, int(rng.integers(2**31)), complete_prefs=i % 3 != 0,
                              budget=B, penalty=mode)


def test_01_exact_methods_agree():
    start = time.monotonic()
    mismatches = []
    insts = list(_suite(100, 1, (5, 60), (2, 8), (0, 4)))
    for k, inst in enumerate(insts):
        vals = {mth: run_method(inst, mth).solution.objective
                for mth in ("cpm", "agg-lin", "nonagg-lin", "oracle")}
        if len(set(vals.values())) != 1:
            mismatches.append((k, vals))
    secs = time.monotonic() - start
    record(1, not mismatches and secs < 300,
           f"100 instances (n<=60, m<=8, B<=4), {len(mismatches)} mismatches, {secs:.0f}s")


def test_02_b1():
    inst = load_fixture("b1")
    r0, r1 = solve_cpm(inst, 0), solve_cpm(inst, 1)
    _, winners = optimal_allocations(inst, 1)
    ts = sorted(t for t, _ in winners)
    ok = r0.objective == 6 and r1.objective == 5 and ts == [(0, 1, 0), (1, 0, 0)] \
        and r1.t in ts
    record(2, ok, f"B=0 -> {r0.objective}, B=1 -> {r1.objective}, optimal t {ts}")


def test_03_b3_relaxation_gap():
    inst = load_fixture("b3")
    agg = solve_lp(relax(build_agg_lin(inst)[0])).objective
    non = solve_lp(relax(build_nonagg_lin(inst)[0])).objective
    record(3, agg - non > 0.05, f"relaxed agg {agg:.4f} > non-agg {non:.4f} "
                                f"(shifted by -n: {agg - 6:.4f} / {non - 6:.4f})")


def test_04_b5_single_comb():
    inst = load_fixture("b5")
    m, vm = build_bbcap_main(inst)
    sol = solve_mip(m)
    t = vm.allocation(sol.x, inst.n_schools)
    x = matching_to_frac(vm.assignment(sol.x, inst.n_students))
    cuts = separate(inst, x, t, da_student_optimal(inst, t))
    r = solve_cpm(inst, init_pool=False)
    ok = cuts == [Comb(0, 0, 1, (1,))] and comb_value(inst, x, cuts[0]) == 0 \
        and r.stats.iterations == 2 and r.cuts == cuts and r.objective == 7
    record(4, ok, f"first separation {cuts}, cpm stopped after {r.stats.iterations} MP solves")


def test_05_b6_value_zero_comb():
    inst = load_fixture("b6")
    x = matching_to_frac((0, 0, 5, 5, 1, 2, 3, 4))
    cuts = separate(inst, x, None, da_student_optimal(inst))
    ok = Comb(5, 0, 1, (0, 1)) in cuts and comb_value(inst, x, Comb(5, 0, 1, (0, 1))) == 0
    record(5, ok, f"separate returned {cuts}")


def test_06_da_min_rank_and_rural_hospital():
    bad_rank = bad_rh = 0
    rng = np.random.default_rng(6)
    for i in range(50):
        m = int(rng.integers(1, 4))
        n = int(rng.integers(m, 9))
        inst = generate_random(n, m, int(rng.integers(2**31)), complete_prefs=i % 2 == 0)
        mu = da_student_optimal(inst)
        rank = lambda mm: sum(inst.rank(s, c) for s, c in enumerate(mm) if c is not None)
        if rank(mu) != min_rank_stable(inst)[1]:
            bad_rank += 1
        sets = {frozenset(s for s, c in enumerate(mm) if c is not None)
                for mm in stable_set_bruteforce(inst) + [da_school_optimal(inst)]}
        bad_rh += len(sets) != 1
    record(6, bad_rank == 0 and bad_rh == 0,
           f"50 instances: {bad_rank} rank-sum failures, {bad_rh} rural-hospital failures")


def test_07_penalty_regimes():
    fails = []
    rng = np.random.default_rng(7)
    for i in range(30):
        m = int(rng.integers(2, 6))
        n = int(rng.integers(m + 2, 25))
        B = int(rng.integers(1, 4))
        inst = generate_random(n, m, int(rng.integers(2**31)), complete_prefs=False, budget=B)
        low = inst.with_penalties(penalty_preset(inst, "min_cardinality"))
        got = cardinality(solve_cpm(low).assignment)
        if got != cardinality_extremes(low)[0]:
            fails.append((i, "min", got))
        high = inst.with_penalties(penalty_preset(inst, "constant", sum(map(len, inst.prefs)) + 1))
        got = cardinality(solve_cpm(high).assignment)
        if got != max_da_cardinality(high):
            fails.append((i, "max", got))
    record(7, not fails, f"30 instances, failures {fails}")


def test_08_manipulation():
    tr, mp = load_fixture("prop2_truthful"), load_fixture("prop2_manipulated")
    a, b = solve_cpm(tr), solve_cpm(mp)
    ok = a.t == (1, 0, 0, 0, 0) and a.assignment[2] == 0 \
        and b.t == (0, 0, 0, 1, 0) and b.assignment[4] == 3 \
        and tr.prefers(4, b.assignment[4], a.assignment[4])
    record(8, ok, f"truthful t={a.t} s3->{a.assignment[2]}, misreport t={b.t} s2'->{b.assignment[4]}")


def test_09_neither_sub_nor_supermodular():
    t, tp, join, meet = (1, 0, 0, 0, 0), (0, 1, 0, 0, 0), (1, 1, 0, 0, 0), (0,) * 5
    vals = {}
    for name in ("prop1_sub", "prop1_sup"):
        inst = load_fixture(name)
        vals[name] = (f_of_t(inst, join) + f_of_t(inst, meet), f_of_t(inst, t) + f_of_t(inst, tp))
    (a, b), (c, d) = vals["prop1_sub"], vals["prop1_sup"]
    record(9, a > b and c < d, f"f(join)+f(meet) vs f(t)+f(t'): {a} > {b} and {c} < {d}")


def _exact(inst):
    if count_allocations(inst) <= 20_000:
        return solve_exhaustive(inst)[2]
    return run_method(inst, "agg-lin").solution.objective


def test_10_heuristics_on_desk_grid():
    start = time.monotonic()
    below = []
    gaps = {"greedy": [], "lph": []}
    for n in (50, 100, 200):
        for m in (5, 10, 15):
            for B in (0, 1, 5, 10):
                for seed in range(20):
                    inst = generate_random(n, m, seed, budget=B)
                    opt = _exact(inst)
                    for name, h in (("greedy", greedy), ("lph", lph)):
                        v = h(inst).objective
                        if v < opt:
                            below.append((n, m, B, seed, name))
                        if B >= 10 and m >= 10:
                            gaps[name].append((v - opt) / opt)
    med = {k: statistics.median(v) for k, v in gaps.items()}
    secs = time.monotonic() - start
    record(10, not below and med["lph"] <= med["greedy"],
           f"720 instances, {len(below)} below optimum; B>=10,m>=10 median gap "
           f"lph {med['lph']:.4%} vs greedy {med['greedy']:.4%} ({secs:.0f}s)")


def test_11_monotone_f():
    bad = []
    rng = np.random.default_rng(11)
    for i in range(50):
        m = int(rng.integers(2, 7))
        n = int(rng.integers(m, 40))
        inst = generate_random(n, m, int(rng.integers(2**31)), complete_prefs=i % 2 == 0,
                               penalty="improve")
        for t in enumerate_allocations(inst, 2):
            ft = f_of_t(inst, t)
            for c in range(m):
                t2 = list(t)
                t2[c] += 1
                if f_of_t(inst, t2) > ft:
                    bad.append((i, t, c))
    record(11, not bad, f"50 instances, {len(bad)} increasing steps")


def _scaling_instance(n, seed, m=10, q=4):
    rng = np.random.default_rng(seed)
    prefs = tuple(tuple(int(c) for c in rng.permutation(m)) for _ in range(n))
    pri = tuple(tuple(int(s) for s in rng.permutation(n)) for _ in range(m))
    inst = Instance(prefs, pri, (q,) * m, 2)
    return inst.with_penalties(penalty_preset(inst, "access"))


def test_12_separation_scaling():
    ns = [100, 200, 400, 800]
    ops = []
    for n in ns:
        total = 0
        for seed in range(5):
            inst = _scaling_instance(n, 1000 * n + seed)
            assign, t, _ = solve_relaxed(inst)
            mu = da_student_optimal(inst, t)
            stats = SeparationStats()
            separate(inst, matching_to_frac(assign), t, mu, stats)
            total += stats.ops
        ops.append(total)
    slope = float(np.polyfit(np.log(ns), np.log(ops), 1)[0])
    record(12, 0.8 <= slope <= 1.2, f"ops {ops} over n={ns}, log-log slope {slope:.3f}")


def test_13_school_bounds():
    bad = []
    rng = np.random.default_rng(13)
    for i in range(20):
        m = int(rng.integers(2, 5))
        n = int(rng.integers(m + 4, 30))
        inst = generate_random(n, m, int(rng.integers(2**31)), complete_prefs=i % 2 == 0,
                               budget=int(rng.integers(3, 7)))
        free = solve_cpm(inst)
        capped = solve_cpm(inst.with_bounds([2] * m))
        if capped.objective < free.objective or max(capped.t) > 2 \
                or blocking_pairs(inst, capped.t, capped.assignment):
            bad.append(i)
        if max(free.t) <= 2 and capped.objective != free.objective:
            bad.append(i)
    record(13, not bad, f"20 instances, failures at {bad}")


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_"):
            try:
                fn()
            except AssertionError:
                pass
    for n in sorted(RESULTS):
        ok, detail = RESULTS[n]
        print(f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}")
