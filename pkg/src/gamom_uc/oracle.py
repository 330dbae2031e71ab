"""Exhaustive ground truth for desk-scale instances."""
from __future__ import annotations

import itertools
import logging
from typing import NamedTuple, Sequence

import numpy as np

from . import _kernels
from .dispatch import HourBounds, _dispatch_bits
from .model import EvaluatedSchedule, UCInstance, UnitSpec, evaluate

logger = logging.getLogger(__name__)

MAX_BITS = 24
_CHUNK = 1 << 20


class OracleTooLarge(ValueError):
    pass


class OracleResult(NamedTuple):
    schedule: EvaluatedSchedule
    code: int
    feasible_found: bool


def code_to_commitment(code: int, shape) -> np.ndarray:
    n, T = shape
    n_bits = n * T
    flat = [(code >> (n_bits - 1 - k)) & 1 for k in range(n_bits)]
    return np.array(flat, dtype=np.uint8).reshape(shape)


def commitment_to_code(bits) -> int:
    code = 0
    for b in np.asarray(bits).ravel():
        code = (code << 1) | int(b)
    return code


def enumerate_optimal(instance: UCInstance, progress=None) -> OracleResult:
    """Minimum-fitness commitment over all ``2**(N*T)`` matrices.

    Ties resolve to the smallest matrix read as a binary number (row-major,
    first unit's first hour most significant).  When no matrix is feasible the
    least-penalty one is returned with ``feasible_found = False``.
    """
    n_bits = instance.n_units * instance.horizon
    if n_bits > MAX_BITS:
        raise OracleTooLarge(f"oracle is capped at {MAX_BITS} commitment bits; "
                             f"instance has {instance.n_units}x{instance.horizon} = {n_bits}")
    args = instance.arrays.evaluation_args()
    best_code, best_total = -1, np.inf
    total = 1 << n_bits
    for start in range(0, total, _CHUNK):
        stop = min(total, start + _CHUNK)
        code, tot, _ = _kernels.enumerate_range(*args, instance.n_units, instance.horizon, start, stop)
        if tot < best_total:
            best_code, best_total = code, tot
        if progress is not None:
            progress(stop, total)
        elif total > _CHUNK:
            logger.info("oracle: %d / %d matrices", stop, total)
    bits = code_to_commitment(best_code, instance.shape)
    dispatch = _dispatch_bits(instance, bits)
    cost, report = evaluate(instance, bits, dispatch)
    return OracleResult(EvaluatedSchedule(bits, dispatch, cost, report), best_code, report.is_feasible)


class GridResult(NamedTuple):
    allocation: np.ndarray
    cost: float
    feasible: bool


def dispatch_grid_oracle(on_units: Sequence, demand: float, grid: float,
                         reserve_up: float = 0.0, reserve_down: float = 0.0,
                         reserve_window_min: float = 10.0) -> GridResult:
    """Brute-force hourly dispatch over a discretised box, for at most 3 units.

    All but the last unit are scanned on ``grid``-spaced points of their
    window; the last unit takes the remaining demand, so balance holds
    exactly whenever the remainder fits its window.  Saturated cases (demand
    outside ``[sum lo, sum hi]``) return every unit at the nearer bound.
    """
    if len(on_units) > 3:
        raise ValueError("grid oracle handles at most 3 units")
    if grid <= 0:
        raise ValueError("grid step must be positive")
    units = [u for u, _ in on_units]
    bounds = [HourBounds(*bd) for _, bd in on_units]
    if not units:
        return GridResult(np.zeros(0), 0.0, demand <= 0)
    lo = np.array([bd.lo for bd in bounds])
    hi = np.array([bd.hi for bd in bounds])
    if demand >= hi.sum():
        return GridResult(hi, _fuel(units, hi), True)
    if demand <= lo.sum():
        return GridResult(lo, _fuel(units, lo), True)

    rres = np.array([u.ramp_per_min * reserve_window_min for u in units])
    pmin = np.array([u.p_min for u in units])
    pmax = np.array([u.p_max for u in units])
    axes = [np.append(np.arange(bd.lo, bd.hi, grid), bd.hi) for bd in bounds[:-1]]
    # the last free axis is scanned as a vector, the others point by point
    outer = axes[:-1]
    inner = axes[-1] if axes else np.zeros(1)
    best, best_cost = None, np.inf
    for head in itertools.product(*outer):
        cols = [np.full(inner.shape, x) for x in head]
        if axes:
            cols.append(inner)
        rest = demand - sum(cols) if cols else np.full(1, demand)
        ok = (rest >= bounds[-1].lo - 1e-9) & (rest <= bounds[-1].hi + 1e-9)
        cols.append(np.clip(rest, bounds[-1].lo, bounds[-1].hi))
        p = np.vstack(cols)
        if reserve_up > 0:
            ok &= np.minimum(pmax[:, None] - p, rres[:, None]).sum(axis=0) >= reserve_up - 1e-9
        if reserve_down > 0:
            ok &= np.minimum(p - pmin[:, None], rres[:, None]).sum(axis=0) >= reserve_down - 1e-9
        if not ok.any():
            continue
        cost = sum(u.cost_a + u.cost_b * p[k] + u.cost_c * p[k] ** 2 for k, u in enumerate(units))
        cost = np.where(ok, cost, np.inf)
        j = int(np.argmin(cost))
        if cost[j] < best_cost:
            best, best_cost = p[:, j].copy(), float(cost[j])
    if best is None:
        return GridResult(np.full(len(units), np.nan), np.inf, False)
    return GridResult(best, best_cost, True)


def _fuel(units: Sequence[UnitSpec], p) -> float:
    return float(sum(u.cost_a + u.cost_b * x + u.cost_c * x * x for u, x in zip(units, p)))
