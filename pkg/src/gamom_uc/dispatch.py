"""Economic dispatch of a fixed commitment.

Hours are dispatched one after another; each hour's output window comes from
the unit limits narrowed by the ramp rates around the previous hour's output.
"""
from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from . import _kernels
from .model import DispatchMatrix, UCInstance, UnitSpec, as_commitment


class HourBounds(NamedTuple):
    lo: float
    hi: float


class HourDispatch(NamedTuple):
    allocation: np.ndarray
    shortfall: float
    overgeneration: float


def ramp_bounds(unit: UnitSpec, prev_on: bool, prev_power: float) -> HourBounds:
    """Output window of an ON unit given its previous-hour status and output.

    Ramp limits only bind when the unit was already ON; a unit that just
    started may take any value in its capacity range.
    """
    if not prev_on:
        return HourBounds(unit.p_min, unit.p_max)
    lo = max(unit.p_min, prev_power - unit.ramp_down)
    hi = min(unit.p_max, prev_power + unit.ramp_up)
    if lo > hi:
        raise ValueError(f"unit {unit.id}: empty ramp window [{lo}, {hi}] from {prev_power}")
    return HourBounds(lo, hi)


def dispatch_hour(on_units: Sequence, demand: float, reserve_up: float = 0.0,
                  reserve_down: float = 0.0, reserve_window_min: float = 10.0) -> HourDispatch:
    """Minimum-fuel split of ``demand`` over ``(UnitSpec, HourBounds)`` pairs.

    With the default zero reserve requirements this is plain equal-marginal-cost
    dispatch.  Reserve requirements (MW) are honoured when the capacity allows,
    using each unit's ``reserve_window_min * ramp_per_min`` deliverable reserve.
    """
    units = [u for u, _ in on_units]
    bounds = [bd for _, bd in on_units]
    b = np.array([u.cost_b for u in units], dtype=float)
    c = np.array([u.cost_c for u in units], dtype=float)
    lo = np.array([bd.lo for bd in bounds], dtype=float)
    hi = np.array([bd.hi for bd in bounds], dtype=float)
    pmin = np.array([u.p_min for u in units], dtype=float)
    pmax = np.array([u.p_max for u in units], dtype=float)
    rres = np.array([u.ramp_per_min for u in units], dtype=float) * reserve_window_min
    p = np.empty(len(units))
    short, over = _kernels.dispatch_hour(b, c, lo, hi, pmin, pmax, rres,
                                         float(demand), float(reserve_up), float(reserve_down), p)
    return HourDispatch(p, short, over)


def dispatch_schedule(instance: UCInstance, commitment) -> DispatchMatrix:
    bits = as_commitment(commitment, instance)
    return _dispatch_bits(instance, bits)


def _dispatch_bits(instance: UCInstance, bits: np.ndarray) -> DispatchMatrix:
    arr = instance.arrays
    n, T = instance.shape
    power = np.empty((n, T))
    short, over, rup, rdn = np.empty(T), np.empty(T), np.empty(T), np.empty(T)
    _kernels.dispatch_schedule(arr.b, arr.c, arr.pmin, arr.pmax, arr.ru, arr.rd, arr.rres,
                               arr.init_state, arr.init_power, arr.demand,
                               arr.up_frac, arr.dn_frac, bits, power, short, over, rup, rdn)
    return DispatchMatrix(power=power, shortfall=short, reserve_up_short=rup,
                          reserve_down_short=rdn, overgeneration=over)
