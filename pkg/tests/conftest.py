import os

from hypothesis import HealthCheck, settings, strategies as st

from stablecap.instance import Instance, generate_random, penalty_preset

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=400, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@st.composite
def markets(draw, max_students=7, max_schools=3, max_budget=2, partial=True):
    """Small random markets built from a drawn seed plus drawn shape."""
    m = draw(st.integers(1, max_schools))
    n = draw(st.integers(m, max(m, max_students)))
    seed = draw(st.integers(0, 10**6))
    B = draw(st.integers(0, max_budget))
    mode = draw(st.sampled_from(["access", "improve"]))
    return generate_random(n, m, seed, complete_prefs=not partial or draw(st.booleans()),
                           budget=B, penalty=mode)


def tiny(prefs, priorities, caps, budget=0, penalty="access"):
    inst = Instance(tuple(map(tuple, prefs)), tuple(map(tuple, priorities)), tuple(caps), budget)
    return inst.with_penalties(penalty_preset(inst, penalty))


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        ok, detail = mod.RESULTS[n]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}")
