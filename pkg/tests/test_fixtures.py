import pytest

from stablecap.cutting_plane import solve_cpm
from stablecap.fixtures import load_fixture, names
from stablecap.matching import da_student_optimal
from stablecap.oracle import optimal_allocations


def test_fixture_list():
    assert names() == sorted(["a43_after", "a43_before", "b1", "b3", "b4", "b5", "b6",
                              "prop1_sub", "prop1_sup", "prop2_manipulated", "prop2_truthful"])
    with pytest.raises(KeyError):
        load_fixture("nope")


def test_priority_upgrade_hurts_the_favoured_student():
    before, after = load_fixture("a43_before"), load_fixture("a43_after")
    a, b = solve_cpm(before), solve_cpm(after)
    assert a.t[0] == 1 and b.t[3] == 1
    # s3 now outranks s2 at c2 yet ends at a worse school
    assert after.priority(1, 2) < after.priority(1, 1) and before.priority(1, 1) < before.priority(1, 2)
    assert before.prefers(2, a.assignment[2], b.assignment[2])
    assert len(optimal_allocations(before)[1]) == len(optimal_allocations(after)[1]) == 1


def test_b4_matchings():
    inst = load_fixture("b4")
    assert da_student_optimal(inst) == (2, 0, 3)
    assert solve_cpm(inst, init_pool=False).objective == 5


@pytest.mark.parametrize("name", names())
def test_every_fixture_solves_to_oracle_value(name):
    inst = load_fixture(name)
    assert solve_cpm(inst).objective == optimal_allocations(inst)[0]
