import math

import pytest
from hypothesis import given, strategies as st

from stablecap.fixtures import load_fixture
from stablecap.instance import Instance, generate_random
from stablecap.matching import cardinality, da_school_optimal, da_student_optimal
from stablecap.oracle import (OracleLimitError, cardinality_extremes, count_allocations,
                              enumerate_allocations, max_da_cardinality, min_rank_stable,
                              optimal_allocations, solve_exhaustive, stable_set_bruteforce,
                              stars_and_bars)

from conftest import markets, tiny


def test_enumerate_small():
    inst = tiny([[0], [1]], [[0], [1]], [1, 1], budget=1)
    assert list(enumerate_allocations(inst)) == [(0, 0), (0, 1), (1, 0)]


def test_enumerate_with_bounds():
    inst = load_fixture("b1").with_bounds([1, 1, 1])
    assert len(list(enumerate_allocations(inst, 2))) == 7 == count_allocations(inst, 2)


def test_closed_form_m4_b3():
    inst = generate_random(8, 4, 0)
    assert count_allocations(inst, 3) == 35 == stars_and_bars(4, 3)
    assert len(set(enumerate_allocations(inst, 3))) == 35


@given(st.integers(1, 5), st.integers(0, 4))
def test_count_matches_formula(m, B):
    inst = generate_random(m, m, 0)
    assert count_allocations(inst, B) == len(list(enumerate_allocations(inst, B))) \
        == sum(math.comb(j + m - 1, m - 1) for j in range(B + 1))


def test_exhaustive_b1():
    inst = load_fixture("b1")
    mu, t, v = solve_exhaustive(inst, 1)
    assert v == 5 and t == (0, 1, 0)        # lexicographically smallest optimum
    assert solve_exhaustive(inst, 0)[2] == 6


def test_exhaustive_guard():
    inst = generate_random(200, 15, 0)
    with pytest.raises(OracleLimitError):
        solve_exhaustive(inst, 12)


def test_stable_set_b1():
    inst = load_fixture("b1")
    stable = stable_set_bruteforce(inst)
    mu = da_student_optimal(inst)
    assert mu in stable and min_rank_stable(inst)[0] == mu


def test_stable_set_guard():
    with pytest.raises(OracleLimitError):
        stable_set_bruteforce(generate_random(9, 3, 0))
    with pytest.raises(OracleLimitError):
        stable_set_bruteforce(generate_random(8, 4, 0))


@given(markets(max_students=8, max_schools=3))
def test_rural_hospital_over_stable_set(inst):
    sets = {frozenset(s for s, c in enumerate(mu) if c is not None)
            for mu in stable_set_bruteforce(inst)}
    assert len(sets) == 1
    so = da_school_optimal(inst)
    assert sets == {frozenset(s for s, c in enumerate(so) if c is not None)}


def test_cardinality_extremes_b0_equal():
    inst = load_fixture("b6")
    lo, hi = cardinality_extremes(inst, 0)
    assert lo == hi == cardinality(da_student_optimal(inst))


def test_optimal_allocations_b1():
    best, winners = optimal_allocations(load_fixture("b1"), 1)
    assert best == 5 and sorted(t for t, _ in winners) == [(0, 1, 0), (1, 0, 0)]


def test_max_da_cardinality():
    inst = load_fixture("a43_before")
    assert max_da_cardinality(inst) == 8
