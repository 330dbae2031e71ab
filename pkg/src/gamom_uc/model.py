"""Unit-commitment problem data, cost formulas and the schedule checker."""
from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field, fields
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import NamedTuple, Optional

import numpy as np

from . import _kernels

logger = logging.getLogger(__name__)

TOL = _kernels.TOL


class BalanceMode(str, Enum):
    AT_LEAST = "AtLeast"
    EXACT = "Exact"


@dataclass(frozen=True)
class UnitSpec:
    """Economic and technical data of one generating unit.

    ``initial_state`` counts hours already spent in the current status before
    hour 1: positive means ON, negative means OFF.
    """

    id: str
    cost_a: float
    cost_b: float
    cost_c: float
    p_min: float
    p_max: float
    ramp_up: float
    ramp_down: float
    ramp_per_min: float
    min_up: int
    min_down: int
    cold_hours: int
    startup_hot: float
    startup_cold: float
    initial_state: int
    initial_power: float = 0.0
    shutdown_cost: float = 0.0


@dataclass(frozen=True)
class UCInstance:
    units: tuple
    demand: tuple
    reserve_up_fraction: float = 0.0
    reserve_down_fraction: float = 0.0
    reserve_window_min: float = 10.0
    penalty_weight: float = 1e5
    balance_mode: BalanceMode = BalanceMode.AT_LEAST
    # accepted and carried through file round trips, never interpreted
    network: Optional[dict] = field(default=None, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "units", tuple(self.units))
        object.__setattr__(self, "demand", tuple(float(d) for d in self.demand))
        object.__setattr__(self, "balance_mode", BalanceMode(self.balance_mode))

    @property
    def n_units(self) -> int:
        return len(self.units)

    @property
    def horizon(self) -> int:
        return len(self.demand)

    @property
    def shape(self) -> tuple:
        return (self.n_units, self.horizon)

    @cached_property
    def arrays(self) -> "UnitArrays":
        return UnitArrays.from_instance(self)


class UnitArrays(NamedTuple):
    """Column view of an instance in the order the compiled kernels expect."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    pmin: np.ndarray
    pmax: np.ndarray
    ru: np.ndarray
    rd: np.ndarray
    rres: np.ndarray
    min_up: np.ndarray
    min_down: np.ndarray
    cold: np.ndarray
    su_hot: np.ndarray
    su_cold: np.ndarray
    sd_cost: np.ndarray
    init_state: np.ndarray
    init_power: np.ndarray
    demand: np.ndarray
    up_frac: float
    dn_frac: float
    weight: float
    exact: bool

    @classmethod
    def from_instance(cls, inst: UCInstance) -> "UnitArrays":
        def col(name, dtype=np.float64):
            return np.ascontiguousarray([getattr(u, name) for u in inst.units], dtype=dtype)

        return cls(
            a=col("cost_a"), b=col("cost_b"), c=col("cost_c"),
            pmin=col("p_min"), pmax=col("p_max"),
            ru=col("ramp_up"), rd=col("ramp_down"),
            rres=col("ramp_per_min") * float(inst.reserve_window_min),
            min_up=col("min_up", np.int64), min_down=col("min_down", np.int64),
            cold=col("cold_hours", np.int64),
            su_hot=col("startup_hot"), su_cold=col("startup_cold"), sd_cost=col("shutdown_cost"),
            init_state=col("initial_state", np.int64), init_power=col("initial_power"),
            demand=np.ascontiguousarray(inst.demand, dtype=np.float64),
            up_frac=float(inst.reserve_up_fraction), dn_frac=float(inst.reserve_down_fraction),
            weight=float(inst.penalty_weight),
            exact=inst.balance_mode is BalanceMode.EXACT,
        )

    def evaluation_args(self) -> tuple:
        return (self.a, self.b, self.c, self.pmin, self.pmax, self.ru, self.rd, self.rres,
                self.min_up, self.min_down, self.cold, self.su_hot, self.su_cold, self.sd_cost,
                self.init_state, self.init_power, self.demand,
                self.up_frac, self.dn_frac, self.weight, self.exact)


@dataclass(frozen=True)
class DispatchMatrix:
    power: np.ndarray
    shortfall: np.ndarray
    reserve_up_short: np.ndarray
    reserve_down_short: np.ndarray
    overgeneration: np.ndarray


@dataclass(frozen=True)
class CostBreakdown:
    fuel: float
    startup: float
    shutdown: float
    penalty: float
    total: float

    @classmethod
    def from_parts(cls, fuel, startup, shutdown, penalty) -> "CostBreakdown":
        return cls(fuel, startup, shutdown, penalty, fuel + startup + shutdown + penalty)


class Violation(NamedTuple):
    unit: Optional[int]  # None for system-wide constraints
    hour: int  # 0-based
    magnitude: float


CONSTRAINTS = ("balance", "capacity", "ramp", "min_up_down", "reserve_up", "reserve_down")


@dataclass
class ViolationReport:
    balance: list = field(default_factory=list)
    capacity: list = field(default_factory=list)
    ramp: list = field(default_factory=list)
    min_up_down: list = field(default_factory=list)
    reserve_up: list = field(default_factory=list)
    reserve_down: list = field(default_factory=list)

    @property
    def is_feasible(self) -> bool:
        return not any(getattr(self, name) for name in CONSTRAINTS)

    def items(self):
        for name in CONSTRAINTS:
            for v in getattr(self, name):
                yield name, v

    def counts(self) -> dict:
        return {name: len(getattr(self, name)) for name in CONSTRAINTS}


@dataclass(frozen=True)
class EvaluatedSchedule:
    commitment: np.ndarray
    dispatch: DispatchMatrix
    cost: CostBreakdown
    violations: ViolationReport

    @property
    def fitness(self) -> float:
        return self.cost.total

    @property
    def feasible(self) -> bool:
        return self.violations.is_feasible


class InputError(ValueError):
    """Rejected input: wrong dimensions or malformed data."""


def fuel_cost(unit: UnitSpec, p: float) -> float:
    return unit.cost_a + unit.cost_b * p + unit.cost_c * p * p


def startup_cost(unit: UnitSpec, down_hours: int) -> float:
    """Hot start while the unit has been off at most ``min_down + cold_hours``."""
    if down_hours <= unit.min_down + unit.cold_hours:
        return unit.startup_hot
    return unit.startup_cold


def as_commitment(bits, instance: UCInstance) -> np.ndarray:
    arr = np.asarray(bits)
    if arr.shape != instance.shape:
        raise InputError(f"commitment shape {arr.shape} does not match instance {instance.shape}")
    if not np.isin(arr, (0, 1)).all():
        raise InputError("commitment entries must be 0 or 1")
    return np.ascontiguousarray(arr, dtype=np.uint8)


def _run_evaluation(instance, commitment, power):
    arr = instance.arrays
    n, T = instance.shape
    bal, rup, rdn = np.empty(T), np.empty(T), np.empty(T)
    cap, ramp, mud = np.empty((n, T)), np.empty((n, T)), np.empty((n, T))
    fuel, su, sd, pen, count, _ = _kernels.evaluate_schedule(
        *arr.evaluation_args(), commitment, power, bal, cap, ramp, mud, rup, rdn)
    cost = CostBreakdown.from_parts(fuel, su, sd, pen)
    return cost, count, (bal, cap, ramp, mud, rup, rdn)


def evaluate(instance: UCInstance, commitment, dispatch: DispatchMatrix):
    """Cost breakdown and violation report of a dispatched schedule."""
    bits = as_commitment(commitment, instance)
    power = np.ascontiguousarray(dispatch.power, dtype=np.float64)
    if power.shape != instance.shape:
        raise InputError(f"dispatch shape {power.shape} does not match instance {instance.shape}")
    cost, _, (bal, cap, ramp, mud, rup, rdn) = _run_evaluation(instance, bits, power)

    report = ViolationReport()
    for name, vec in (("balance", bal), ("reserve_up", rup), ("reserve_down", rdn)):
        getattr(report, name).extend(Violation(None, int(t), float(vec[t])) for t in np.flatnonzero(vec))
    for name, grid in (("capacity", cap), ("ramp", ramp), ("min_up_down", mud)):
        getattr(report, name).extend(
            Violation(int(i), int(t), float(grid[i, t])) for i, t in zip(*np.nonzero(grid)))
    return cost, report


def count_startups(instance: UCInstance, commitment) -> int:
    """Number of OFF->ON transitions, hour 1 included when the unit starts OFF."""
    bits = as_commitment(commitment, instance)
    prev = (instance.arrays.init_state > 0).astype(np.uint8)[:, None]
    padded = np.concatenate([prev, bits], axis=1)
    return int(((padded[:, 1:] == 1) & (padded[:, :-1] == 0)).sum())


class Diagnostic(NamedTuple):
    level: str  # "error" or "warning"
    message: str


def validate_instance(instance: UCInstance) -> list:
    out = []

    def err(msg):
        out.append(Diagnostic("error", msg))

    if instance.horizon < 1:
        err("demand must cover at least one hour")
    for t, d in enumerate(instance.demand):
        if not d >= 0:
            err(f"hour {t + 1}: demand {d} is negative")
    if not instance.units:
        err("instance has no units")
    for name in ("reserve_up_fraction", "reserve_down_fraction"):
        v = getattr(instance, name)
        if not 0.0 <= v <= 1.0:
            err(f"{name} = {v} outside [0, 1]")
    if instance.reserve_window_min < 0:
        err("reserve_window_min must be non-negative")
    if instance.penalty_weight < 0:
        err("penalty_weight must be non-negative")

    for u in instance.units:
        tag = f"unit {u.id}"
        if not 0 <= u.p_min <= u.p_max:
            err(f"{tag}: need 0 <= p_min <= p_max (got {u.p_min}, {u.p_max})")
        if u.p_max <= 0:
            err(f"{tag}: p_max must be positive")
        for name in ("ramp_up", "ramp_down", "ramp_per_min"):
            if getattr(u, name) < 0:
                err(f"{tag}: {name} is negative")
        if u.min_up < 1 or u.min_down < 1:
            err(f"{tag}: min_up and min_down must be at least 1")
        if u.cold_hours < 0:
            err(f"{tag}: cold_hours is negative")
        if not u.startup_cold >= u.startup_hot >= 0:
            err(f"{tag}: need startup_cold >= startup_hot >= 0")
        if u.shutdown_cost < 0:
            err(f"{tag}: shutdown_cost is negative")
        if u.initial_state == 0:
            err(f"{tag}: initial_state must be non-zero")
        elif u.initial_state > 0 and not u.p_min <= u.initial_power <= u.p_max:
            err(f"{tag}: initial_power {u.initial_power} outside [p_min, p_max]")
        elif u.initial_state < 0 and u.initial_power != 0:
            err(f"{tag}: initial_power must be 0 for a unit that starts OFF")

    cap = sum(u.p_max for u in instance.units)
    for t, d in enumerate(instance.demand):
        if d > cap:
            out.append(Diagnostic("warning", f"hour {t + 1}: demand {d} exceeds total capacity {cap}"))
    return out


# ---------------------------------------------------------------- file format

_UNIT_FIELDS = [f.name for f in fields(UnitSpec)]


def instance_from_dict(doc: dict) -> UCInstance:
    try:
        units = [UnitSpec(**{k: u[k] for k in _UNIT_FIELDS if k in u}) for u in doc["units"]]
        reserve = doc.get("reserve", {})
        return UCInstance(
            units=units,
            demand=doc["demand"],
            reserve_up_fraction=reserve.get("up_fraction", 0.0),
            reserve_down_fraction=reserve.get("down_fraction", 0.0),
            reserve_window_min=reserve.get("window_min", 10.0),
            penalty_weight=doc.get("penalty_weight", 1e5),
            balance_mode=doc.get("balance_mode", "AtLeast"),
            network=doc.get("network"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed instance document: {exc}") from exc


def instance_to_dict(instance: UCInstance) -> dict:
    doc = {
        "units": [asdict(u) for u in instance.units],
        "demand": list(instance.demand),
        "reserve": {
            "up_fraction": instance.reserve_up_fraction,
            "down_fraction": instance.reserve_down_fraction,
            "window_min": instance.reserve_window_min,
        },
        "penalty_weight": instance.penalty_weight,
        "balance_mode": instance.balance_mode.value,
    }
    if instance.network is not None:
        doc["network"] = instance.network
    return doc


def load_instance(path) -> UCInstance:
    path = Path(path)
    with path.open() as fh:
        doc = json.load(fh)
    return instance_from_dict(doc)


def save_instance(instance: UCInstance, path) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(instance), indent=2) + "\n")
