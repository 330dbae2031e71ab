import numpy as np
import pytest
from hypothesis import strategies as st

from gamom_uc.instances import load_case1, load_case2, load_case2_schedule
from gamom_uc.model import UCInstance, UnitSpec


@pytest.fixture(scope="session")
def case1():
    return load_case1()


@pytest.fixture(scope="session")
def case2():
    return load_case2()


@pytest.fixture(scope="session")
def table5():
    return load_case2_schedule()


def make_unit(**kw):
    base = dict(id="U", cost_a=0.0, cost_b=10.0, cost_c=0.0, p_min=10.0, p_max=100.0,
                ramp_up=100.0, ramp_down=100.0, ramp_per_min=10.0, min_up=1, min_down=1,
                cold_hours=0, startup_hot=0.0, startup_cold=0.0, initial_state=-1,
                initial_power=0.0)
    base.update(kw)
    return UnitSpec(**base)


@st.composite
def units_st(draw, idx=0):
    p_min = draw(st.floats(0, 100, allow_nan=False).map(lambda x: round(x, 1)))
    p_max = p_min + draw(st.floats(1, 300).map(lambda x: round(x, 1)))
    min_up = draw(st.integers(1, 4))
    min_down = draw(st.integers(1, 4))
    hot = draw(st.floats(0, 500).map(lambda x: round(x, 1)))
    on = draw(st.booleans())
    init = draw(st.integers(1, 6)) * (1 if on else -1)
    return UnitSpec(
        id=f"G{idx}", cost_a=draw(st.floats(0, 500).map(lambda x: round(x, 2))),
        cost_b=draw(st.floats(5, 40).map(lambda x: round(x, 3))),
        cost_c=draw(st.sampled_from([0.0, 0.0005, 0.002, 0.007])),
        p_min=p_min, p_max=p_max,
        ramp_up=draw(st.floats(5, 300).map(lambda x: round(x, 1))),
        ramp_down=draw(st.floats(5, 300).map(lambda x: round(x, 1))),
        ramp_per_min=draw(st.floats(0, 10).map(lambda x: round(x, 2))),
        min_up=min_up, min_down=min_down, cold_hours=draw(st.integers(0, 4)),
        startup_hot=hot, startup_cold=hot * draw(st.sampled_from([1.0, 2.0])),
        initial_state=init,
        initial_power=draw(st.floats(p_min, p_max).map(lambda x: min(max(round(x, 1), p_min), p_max)))
        if on else 0.0,
    )


@st.composite
def instances_st(draw, max_units=4, max_hours=8, reserve=True, exact=None):
    n = draw(st.integers(1, max_units))
    T = draw(st.integers(1, max_hours))
    units = [draw(units_st(idx=k)) for k in range(n)]
    cap = sum(u.p_max for u in units)
    demand = draw(st.lists(st.floats(0, 1.1 * cap).map(lambda x: round(x, 1)), min_size=T, max_size=T))
    if exact is None:
        exact = draw(st.booleans())
    return UCInstance(
        units=units, demand=demand,
        reserve_up_fraction=draw(st.sampled_from([0.0, 0.05, 0.1])) if reserve else 0.0,
        reserve_down_fraction=draw(st.sampled_from([0.0, 0.05])) if reserve else 0.0,
        balance_mode="Exact" if exact else "AtLeast",
    )


def genome_st(instance):
    n = instance.n_units * instance.horizon
    return st.lists(st.integers(0, 1), min_size=n, max_size=n).map(
        lambda b: np.array(b, dtype=np.uint8).reshape(instance.shape))


@st.composite
def instance_and_genome(draw, **kw):
    inst = draw(instances_st(**kw))
    return inst, draw(genome_st(inst))


VERDICTS = pytest.StashKey[list]()


@pytest.fixture
def verdict(request):
    """Record one pass/fail line for the acceptance summary."""
    lines = request.config.stash.setdefault(VERDICTS, [])

    def record(name, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
        print(line)
        lines.append(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(VERDICTS, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
