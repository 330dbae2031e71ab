"""Deterministic repair of commitment matrices.

Pass A makes every unit's ON/OFF runs respect minimum up and down times.
Pass B commits extra units, cheapest full-load average cost first, in hours
whose committed capacity cannot cover demand plus spinning reserve.  In Exact
balance mode it also decommits units in hours where the committed minimum
outputs already exceed demand.  Every change made by Pass B keeps Pass A
satisfied.

Genomes that are already feasible are returned unchanged: the capacity tests
of Pass B are necessary conditions of feasibility and Pass A only touches
min up/down violations.
"""
from __future__ import annotations

import numpy as np

from .model import TOL, UCInstance, as_commitment, fuel_cost


def fix_min_up_down(row: list, min_up: int, min_down: int, initial_state: int) -> list:
    """Left-to-right run fix for one unit, in place.

    Short ON runs are extended to the right, short OFF runs are switched back
    ON, except the OFF run that began before hour 1, which delays the start.
    """
    state = 1 if initial_state > 0 else 0
    run = abs(initial_state)
    run_start = -run
    prev_on_start = 0
    for t in range(len(row)):
        if row[t] == state:
            run += 1
            continue
        if state == 1:
            if run < min_up:
                row[t] = 1
                run += 1
                continue
            prev_on_start = run_start
        elif run < min_down:
            if run_start < 0:
                row[t] = 0
                run += 1
                continue
            for k in range(run_start, t):
                row[k] = 1
            state = 1
            run_start = prev_on_start
            run = t - run_start + 1
            continue
        state = row[t]
        run = 1
        run_start = t
    return row


def runs_valid(row: list, min_up: int, min_down: int, initial_state: int) -> bool:
    state = 1 if initial_state > 0 else 0
    run = abs(initial_state)
    for bit in row:
        if bit == state:
            run += 1
            continue
        if run < (min_up if state else min_down):
            return False
        state = bit
        run = 1
    return True


def priority_order(instance: UCInstance) -> list:
    """Unit indices by full-load average cost, cheapest first (ties by index)."""
    return sorted(range(instance.n_units),
                  key=lambda i: (fuel_cost(instance.units[i], instance.units[i].p_max)
                                 / instance.units[i].p_max, i))


class Repairer:
    """Precomputed repair for one instance; call it on genomes."""

    def __init__(self, instance: UCInstance):
        self.instance = instance
        units = instance.units
        self.order = priority_order(instance)
        self.pmax = [u.p_max for u in units]
        self.pmin = [u.p_min for u in units]
        window = instance.reserve_window_min
        self.deliverable = [min(u.p_max - u.p_min, window * u.ramp_per_min) for u in units]
        self.exact = instance.balance_mode.value == "Exact"
        # hours before which a unit that starts OFF may not be started
        self.locked_off = [max(0, u.min_down + u.initial_state) if u.initial_state < 0 else 0
                           for u in units]
        up, dn = instance.reserve_up_fraction, instance.reserve_down_fraction
        self.need_cap = [d * (1.0 + up) for d in instance.demand]
        self.need_res = [max(up, dn) * d for d in instance.demand]

    def _fix(self, rows, i):
        u = self.instance.units[i]
        fix_min_up_down(rows[i], u.min_up, u.min_down, u.initial_state)

    def _short(self, rows, t):
        cap = res = 0.0
        for i, row in enumerate(rows):
            if row[t]:
                cap += self.pmax[i]
                res += self.deliverable[i]
        return cap < self.need_cap[t] - TOL or res < self.need_res[t] - TOL

    def _commit_pass(self, rows) -> bool:
        changed = False
        for t in range(self.instance.horizon):
            while self._short(rows, t):
                pick = next((i for i in self.order
                             if not rows[i][t] and t >= self.locked_off[i]), None)
                if pick is None:
                    break
                rows[pick][t] = 1
                self._fix(rows, pick)
                changed = True
        return changed

    def _decommit_pass(self, rows) -> bool:
        changed = False
        units = self.instance.units
        for t, d in enumerate(self.instance.demand):
            while sum(self.pmin[i] for i, row in enumerate(rows) if row[t]) > d + TOL:
                for i in reversed(self.order):
                    if not rows[i][t]:
                        continue
                    trial = list(rows[i])
                    trial[t] = 0
                    u = units[i]
                    if not runs_valid(trial, u.min_up, u.min_down, u.initial_state):
                        continue
                    rows[i][t] = 0
                    if self._short(rows, t):
                        rows[i][t] = 1
                        continue
                    changed = True
                    break
                else:
                    break
        return changed

    def __call__(self, genome) -> np.ndarray:
        rows = as_commitment(genome, self.instance).tolist()
        for i in range(len(rows)):
            self._fix(rows, i)
        while True:
            changed = self._commit_pass(rows)
            if self.exact:
                changed = self._decommit_pass(rows) or changed
            if not changed:
                break
        return np.array(rows, dtype=np.uint8).reshape(self.instance.shape)


def repair(genome, instance: UCInstance) -> np.ndarray:
    return Repairer(instance)(genome)
