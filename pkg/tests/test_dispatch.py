import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import instance_and_genome, make_unit, units_st
from reference import check
from gamom_uc import _kernels
from gamom_uc.dispatch import HourBounds, dispatch_hour, dispatch_schedule, ramp_bounds
from gamom_uc.model import UCInstance, evaluate, fuel_cost
from gamom_uc.oracle import dispatch_grid_oracle


def test_ramp_bounds_examples(case2):
    u1, u3 = case2.units[0], case2.units[2]
    assert ramp_bounds(u3, True, 60.0) == (20, 125)
    assert ramp_bounds(u1, False, 0.0) == (150, 455)
    assert ramp_bounds(u1, True, 455.0) == (227.5, 455)


def test_ramp_bounds_rejects_empty_window():
    u = make_unit(p_min=50.0, p_max=100.0, ramp_down=5.0)
    with pytest.raises(ValueError):
        ramp_bounds(u, True, 200.0)


def test_two_quadratic_units_one_clamped(case2):
    u3, u4 = case2.units[2], case2.units[3]
    res = dispatch_hour([(u3, HourBounds(20, 130)), (u4, HourBounds(20, 130))], 200.0)
    assert res.allocation == pytest.approx([130.0, 70.0], abs=1e-9)
    assert res.shortfall == 0
    # unclamped equal-lambda point would put unit 3 above its limit
    lam_p3 = (16.5 - 16.2 + 2 * 0.00211 * 200) / (2 * 0.002 + 2 * 0.00211)
    assert lam_p3 > 130


def test_linear_units_merit_order(case1):
    dg1, dg2 = case1.units[0], case1.units[1]
    res = dispatch_hour([(dg1, HourBounds(dg1.p_min, dg1.p_max)),
                         (dg2, HourBounds(dg2.p_min, dg2.p_max))], 120.0)
    assert res.allocation == pytest.approx([80.0, 40.0])
    assert fuel_cost(dg1, 80.0) + fuel_cost(dg2, 40.0) == pytest.approx(16.0)


def test_single_unit_at_capacity_and_no_units():
    u = make_unit(p_min=10.0, p_max=100.0)
    res = dispatch_hour([(u, HourBounds(10, 100))], 100.0)
    assert res.allocation == pytest.approx([100.0]) and res.shortfall == 0
    res = dispatch_hour([], 100.0)
    assert res.shortfall == 100.0 and len(res.allocation) == 0


def test_saturation_reports_shortfall_and_overgeneration():
    us = [(make_unit(cost_b=b), HourBounds(10, 100)) for b in (10.0, 20.0)]
    hi = dispatch_hour(us, 250.0)
    assert hi.allocation == pytest.approx([100, 100]) and hi.shortfall == pytest.approx(50)
    lo = dispatch_hour(us, 5.0)
    assert lo.allocation == pytest.approx([10, 10]) and lo.overgeneration == pytest.approx(15)


def test_table5_schedule_dispatches_without_violation(case2, table5):
    d = dispatch_schedule(case2, table5)
    assert (d.shortfall <= 1e-6).all()
    assert (d.reserve_up_short <= 1e-6).all()
    cost, report = evaluate(case2, table5, d)
    assert report.is_feasible, list(report.items())
    fuel, su, sd, pen, viol = check(case2, table5.tolist(), d.power.tolist())
    assert all(not v for v in viol.values())
    assert cost.total == pytest.approx(fuel + su + sd, rel=1e-12)


def test_floor_and_single_unit_schedules(case2):
    units = case2.units[:3]
    floor = sum(u.p_min for u in units)
    inst = UCInstance(units=units, demand=[floor] * 5)
    d = dispatch_schedule(inst, np.ones((3, 5), int))
    assert d.power == pytest.approx(np.array([[u.p_min] * 5 for u in units]))
    u1 = case2.units[0]
    inst = UCInstance(units=[u1], demand=[455.0] * 24)
    d = dispatch_schedule(inst, np.ones((1, 24), int))
    assert d.power == pytest.approx(np.full((1, 24), 455.0))


def test_reserve_aware_hour_holds_back_headroom():
    cheap = make_unit(cost_b=10.0, p_min=0.0, p_max=100.0, ramp_per_min=10.0)
    dear = make_unit(cost_b=30.0, p_min=0.0, p_max=100.0, ramp_per_min=1.0)
    pair = [(cheap, HourBounds(0, 100)), (dear, HourBounds(0, 100))]
    plain = dispatch_hour(pair, 100.0)
    assert plain.allocation == pytest.approx([100.0, 0.0])
    held = dispatch_hour(pair, 100.0, reserve_up=20.0)
    assert held.allocation == pytest.approx([90.0, 10.0])
    up = min(100 - 90, 100) + min(100 - 10, 10)
    assert up == pytest.approx(20.0)


# ---------------------------------------------------------------- oracle agreement

def _kkt_ok(units, bounds, alloc, tol=1e-4):
    free = [k for k, (bd, p) in enumerate(zip(bounds, alloc))
            if units[k].cost_c > 0 and bd.lo + 1e-6 < p < bd.hi - 1e-6]
    mc = [units[k].cost_b + 2 * units[k].cost_c * alloc[k] for k in free]
    return all(abs(a - b) <= tol for a in mc for b in mc)


def test_grid_oracle_examples(case2):
    u3, u4 = case2.units[2], case2.units[3]
    pair = [(u3, HourBounds(20, 130)), (u4, HourBounds(20, 130))]
    grid = dispatch_grid_oracle(pair, 200.0, 0.01)
    ed = dispatch_hour(pair, 200.0)
    ed_cost = fuel_cost(u3, ed.allocation[0]) + fuel_cost(u4, ed.allocation[1])
    assert grid.cost == pytest.approx(ed_cost, rel=5e-4)
    one = dispatch_grid_oracle([(u3, HourBounds(20, 130))], 70.0, 0.01)
    assert one.allocation == pytest.approx([70.0])
    sat = dispatch_grid_oracle(pair, 500.0, 0.01)
    assert sat.allocation == pytest.approx([130, 130])
    with pytest.raises(ValueError):
        dispatch_grid_oracle(pair * 2, 100.0, 0.01)


def random_table_hour(rng, case2):
    k = int(rng.integers(1, 4))
    idx = rng.choice(10, size=k, replace=False)
    units = [case2.units[i] for i in idx]
    pairs = []
    for u in units:
        if rng.random() < 0.5:
            bd = HourBounds(u.p_min, u.p_max)
        else:
            bd = ramp_bounds(u, True, float(rng.uniform(u.p_min, u.p_max)))
        pairs.append((u, bd))
    lo = sum(bd.lo for _, bd in pairs)
    hi = sum(bd.hi for _, bd in pairs)
    return pairs, float(rng.uniform(lo, hi))


def test_dispatch_matches_grid_oracle_on_random_hours(case2):
    rng = np.random.default_rng(6)
    for _ in range(50):
        pairs, demand = random_table_hour(rng, case2)
        units = [u for u, _ in pairs]
        ed = dispatch_hour(pairs, demand)
        cost = sum(fuel_cost(u, p) for u, p in zip(units, ed.allocation))
        grid = dispatch_grid_oracle(pairs, demand, 0.01)
        assert grid.feasible
        assert cost <= grid.cost * (1 + 1e-9)
        assert abs(cost - grid.cost) <= 5e-4 * grid.cost
        assert _kkt_ok(units, [bd for _, bd in pairs], ed.allocation)


@settings(max_examples=1000, deadline=None)
@given(st.lists(units_st(), min_size=1, max_size=5), st.floats(0, 1), st.integers(0, 2**32 - 1))
def test_balance_and_bounds(units, frac, seed):
    rng = np.random.default_rng(seed)
    pairs = []
    for u in units:
        a, b = sorted(rng.uniform(u.p_min, u.p_max, size=2))
        pairs.append((u, HourBounds(a, b)))
    lo = sum(bd.lo for _, bd in pairs)
    hi = sum(bd.hi for _, bd in pairs)
    demand = lo + frac * (hi - lo)
    res = dispatch_hour(pairs, demand)
    assert abs(res.allocation.sum() - demand) <= 1e-6
    for (u, bd), p in zip(pairs, res.allocation):
        assert bd.lo - 1e-9 <= p <= bd.hi + 1e-9
    assert _kkt_ok(units, [bd for _, bd in pairs], res.allocation)


@settings(max_examples=1000, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 50), st.floats(0, 0.01), st.floats(0, 300)), min_size=1, max_size=6),
       st.floats(0, 200), st.floats(0, 100))
def test_supply_non_decreasing_in_price(pieces, lam, step):
    g = np.array([p[0] for p in pieces])
    h = np.array([p[1] for p in pieces])
    w = np.array([p[2] for p in pieces])
    for right in (False, True):
        assert _kernels._supply(g, h, w, lam, right) <= _kernels._supply(g, h, w, lam + step, right) + 1e-9


@settings(max_examples=1000, deadline=None)
@given(instance_and_genome())
def test_dispatch_never_breaks_ramp_on_on_pairs(case):
    inst, bits = case
    d = dispatch_schedule(inst, bits)
    _, report = evaluate(inst, bits, d)
    assert report.ramp == []
    assert report.capacity == []
    assert (d.power[bits == 0] == 0).all() and (d.power >= 0).all()


def test_reserve_aware_dispatch_matches_grid_oracle(case2):
    rng = np.random.default_rng(11)
    checked = 0
    while checked < 20:
        pairs, demand = random_table_hour(rng, case2)
        if len(pairs) < 2:
            continue
        need = float(rng.uniform(0.02, 0.15)) * demand
        grid = dispatch_grid_oracle(pairs, demand, 0.05, reserve_up=need)
        if not grid.feasible:
            continue
        units = [u for u, _ in pairs]
        ed = dispatch_hour(pairs, demand, reserve_up=need)
        cost = sum(fuel_cost(u, p) for u, p in zip(units, ed.allocation))
        up = sum(min(u.p_max - p, 10 * u.ramp_per_min) for u, p in zip(units, ed.allocation))
        assert up >= need - 1e-6
        assert abs(ed.allocation.sum() - demand) <= 1e-6
        assert cost <= grid.cost * (1 + 1e-9)
        assert abs(cost - grid.cost) <= 5e-4 * grid.cost
        checked += 1
