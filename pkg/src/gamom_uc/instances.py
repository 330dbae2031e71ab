"""Shipped instances and a generator of small random ones."""
from __future__ import annotations

from importlib import resources

import numpy as np

from .model import UCInstance, UnitSpec, load_instance

CASE1 = "case1_3unit.json"
CASE2 = "case2_10unit.json"
CASE2_SCHEDULE = "case2_table5_schedule.csv"


def data_path(name: str):
    return resources.files("gamom_uc") / "data" / name


def load_case1() -> UCInstance:
    return load_instance(data_path(CASE1))


def load_case2() -> UCInstance:
    return load_instance(data_path(CASE2))


def load_case2_schedule() -> np.ndarray:
    from .files import read_schedule_csv
    return read_schedule_csv(data_path(CASE2_SCHEDULE), load_case2())


def _reachable(units, horizon: int) -> np.ndarray:
    """Per-hour capacity that can actually be online: units still held OFF by
    their min-down time count for nothing, initially ON units are limited by
    ramping up from their initial output."""
    cap = np.zeros(horizon)
    for u in units:
        for t in range(horizon):
            if u.initial_state < 0:
                if t >= u.min_down + u.initial_state:
                    cap[t] += u.p_max
            else:
                cap[t] += min(u.p_max, u.initial_power + (t + 1) * u.ramp_up)
    return cap


def random_instance(rng: np.random.Generator, n_units: int = 3, horizon: int = 6,
                    reserve_up: float = 0.0) -> UCInstance:
    """A small instance whose units are perturbed copies of the ten-unit set.

    Cost coefficients and startup costs are scaled by a factor in [0.8, 1.2],
    min up/down times are capped at half the horizon so that cycling stays
    possible, and demand moves between 30% and 80% of installed capacity.
    """
    templates = load_case2().units
    units = []
    for k in range(n_units):
        t = templates[int(rng.integers(len(templates)))]
        s = rng.uniform(0.8, 1.2, size=3)
        cap = max(1, horizon // 2)
        min_up, min_down = min(t.min_up, cap), min(t.min_down, cap)
        if rng.random() < 0.5:
            init, p0 = int(rng.integers(1, min_up + 2)), float(rng.uniform(t.p_min, t.p_max))
        else:
            init, p0 = -int(rng.integers(1, min_down + 2)), 0.0
        units.append(UnitSpec(
            id=f"G{k + 1}", cost_a=t.cost_a * s[0], cost_b=t.cost_b * s[1], cost_c=t.cost_c * s[2],
            p_min=t.p_min, p_max=t.p_max, ramp_up=t.ramp_up, ramp_down=t.ramp_down,
            ramp_per_min=t.ramp_per_min, min_up=min_up, min_down=min_down,
            cold_hours=min(t.cold_hours, cap), startup_hot=t.startup_hot * s[2],
            startup_cold=t.startup_cold * s[2], initial_state=init, initial_power=p0))
    total = sum(u.p_max for u in units)
    shape = np.sin(np.linspace(0.0, np.pi, horizon)) * rng.uniform(0.5, 1.0) + rng.uniform(0, 0.2, horizon)
    frac = 0.3 + 0.5 * (shape - shape.min()) / max(np.ptp(shape), 1e-12)
    demand = np.round(np.minimum(frac * total, 0.8 * _reachable(units, horizon)), 1)
    return UCInstance(units=units, demand=demand, reserve_up_fraction=reserve_up)

