"""Regenerate the JSON fixtures shipped in stablecap/fixtures."""
from pathlib import Path

from stablecap.instance import Instance, penalty_preset, save_instance

OUT = Path(__file__).resolve().parent.parent / "src" / "stablecap" / "fixtures"


def market(prefs, priorities, caps, budget, penalty="access", value=None):
    inst = Instance(tuple(map(tuple, prefs)), tuple(map(tuple, priorities)), tuple(caps), budget)
    return inst.with_penalties(penalty_preset(inst, penalty, value))


def fixtures():
    yield "b1", market([(0, 1, 2), (1, 0, 2), (0, 2, 1), (1, 2, 0)],
                       [(0, 1, 2, 3)] * 3, (1, 1, 2), 1)
    yield "b3", market([(2, 3, 0, 1), (1, 0, 3, 2), (1, 0, 3, 2), (0, 2, 1, 3),
                        (2, 0, 3, 1), (0, 2, 3, 1)],
                       [(0, 2, 1, 4, 5, 3), (3, 0, 5, 4, 1, 2), (1, 0, 4, 5, 2, 3),
                        (5, 2, 1, 3, 4, 0)], (1, 1, 2, 2), 1)
    yield "b4", market([(0, 3, 2, 1), (0, 1, 2, 3), (3, 0, 1, 2)],
                       [(1, 0, 2), (1, 0, 2), (0, 1, 2), (2, 0, 1)], (1, 1, 1, 1), 0)
    yield "b5", market([(0, 3, 2, 1, 4, 5), (0, 1, 2, 3, 4, 5), (3, 0, 4, 5, 1, 2),
                        (4, 0, 3, 5, 1, 2), (3, 4, 5, 0, 1, 2)],
                       [(1, 0, 2, 3, 4), (1, 0, 2, 3, 4), (0, 1, 2, 3, 4), (2, 3, 4, 0, 1),
                        (3, 2, 4, 0, 1), (4, 0, 1, 2, 3)], (1,) * 6, 1)
    yield "b6", market([(5, 0, 1, 2, 3, 4)] * 2 + [(5, 1, 2, 3, 4, 0)] * 2
                       + [(1, 2, 3, 4, 0, 5), (2, 1, 3, 4, 0, 5), (3, 1, 2, 4, 0, 5),
                          (4, 1, 2, 3, 0, 5)],
                       [tuple(range(8)), (4, 5, 6, 7, 0, 1, 2, 3), (5, 4, 6, 7, 0, 1, 2, 3),
                        (6, 5, 4, 7, 0, 1, 2, 3), (6, 5, 4, 7, 0, 1, 2, 3), tuple(range(8))],
                       (2, 1, 1, 1, 1, 2), 0)
    yield "prop1_sub", market([(0, 1, 3), (1, 2), (1, 4, 3), (4,)],
                              [(0,), (1, 2, 0), (1,), (2, 0), (3, 2)], (0, 1, 1, 1, 1), 2)
    yield "prop1_sup", market([(0, 2), (1, 3), (2, 3, 4), (4,)],
                              [(0,), (1,), (0, 2), (1, 2), (3, 2)], (0, 0, 1, 1, 1), 2,
                              "constant", -1)
    truthful = [(0,), (1,), (0, 1, 2), (3,), (3, 4)]
    yield "prop2_truthful", market(truthful, [(0, 2), (1, 2), (2,), (3, 4), (4,)],
                                   (1,) * 5, 1)
    yield "prop2_manipulated", market(truthful[:4] + [(3, 0, 1, 4, 2)],
                                      [(0, 2, 4), (1, 2, 4), (2, 4), (3, 4), (4,)],
                                      (1,) * 5, 1)
    a43 = [(0, 2), (1, 2), (0, 1), (3,), (3, 4), (4, 5), (5, 6), (6, 7)]
    tail = [(3, 4), (4, 5), (5, 6), (6, 7), (7,)]
    yield "a43_before", market(a43, [(0, 2), (1, 2), (0, 1)] + tail, (1,) * 8, 1)
    yield "a43_after", market(a43, [(0, 2), (2, 1), (0, 1)] + tail, (1,) * 8, 1)


if __name__ == "__main__":
    OUT.mkdir(exist_ok=True)
    for name, inst in fixtures():
        save_instance(inst, OUT / f"{name}.json")
        print("wrote", name)
