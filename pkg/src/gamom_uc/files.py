"""CSV and JSON formats shared by solvers, the oracle and the checker.

Numbers are written in fixed notation with six decimals; every CSV has a
header row.  Files are written to a temporary sibling and renamed into place
so a reader never sees a half-written file.
"""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .model import CostBreakdown, InputError, UCInstance, ViolationReport


def fmt(x: float) -> str:
    return f"{float(x):.6f}"


def write_atomic(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _table(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def schedule_csv(instance: UCInstance, commitment) -> str:
    """Hours down, units across: the layout of a day-ahead status table."""
    bits = np.asarray(commitment)
    ids = [u.id for u in instance.units]
    return _table(["hour"] + ids, [[t + 1] + [int(b) for b in bits[:, t]] for t in range(bits.shape[1])])


def read_schedule_csv(path, instance: UCInstance) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise InputError(f"{path}: empty schedule file")
    header, body = rows[0], [r for r in rows[1:] if r]
    n, T = instance.shape
    if len(header) != n + 1 or len(body) != T:
        raise InputError(f"{path}: schedule is {len(body)} hours x {len(header) - 1} units, "
                         f"instance needs {T} x {n}")
    ids = [u.id for u in instance.units]
    if header[1:] != ids:
        raise InputError(f"{path}: unit columns {header[1:]} do not match instance ids {ids}")
    if len(set(map(len, body))) != 1:
        raise InputError(f"{path}: ragged rows")
    try:
        bits = np.array([[int(v) for v in r[1:]] for r in body], dtype=np.int64).T
    except ValueError as exc:
        raise InputError(f"{path}: non-integer schedule entry ({exc})") from exc
    if not np.isin(bits, (0, 1)).all():
        raise InputError(f"{path}: schedule entries must be 0 or 1")
    return np.ascontiguousarray(bits, dtype=np.uint8)


def dispatch_csv(instance: UCInstance, power) -> str:
    ids = [u.id for u in instance.units]
    power = np.asarray(power)
    return _table(["hour"] + ids, [[t + 1] + [fmt(p) for p in power[:, t]] for t in range(power.shape[1])])


def read_dispatch_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return np.array([[float(v) for v in r[1:]] for r in rows[1:] if r]).T


def cost_document(instance: UCInstance, cost: CostBreakdown, report: ViolationReport) -> dict:
    ids = [u.id for u in instance.units]
    return {
        "cost": {k: round(v, 6) for k, v in asdict(cost).items()},
        "feasible": report.is_feasible,
        "violation_counts": report.counts(),
        "violations": [
            {"constraint": name, "unit": None if v.unit is None else ids[v.unit],
             "hour": v.hour + 1, "magnitude": round(v.magnitude, 6)}
            for name, v in report.items()
        ],
    }


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def trace_csv(trace) -> str:
    return _table(["generation", "evaluations", "best_cost"],
                  [[p.generation, p.evaluations, fmt(p.best_cost)] for p in trace])


def read_trace_csv(path) -> list:
    with open(path, newline="") as fh:
        return [(int(r["generation"]), int(r["evaluations"]), float(r["best_cost"]))
                for r in csv.DictReader(fh)]


@dataclass
class RunRecord:
    algorithm: str
    seed: int
    best_cost: float
    feasible: bool
    evaluations_used: int
    wall_time: float
    trace_path: str
    budget: int = None
    stop_reason: str = ""


def write_outputs(out_dir, instance: UCInstance, schedule, trace, record: RunRecord = None) -> dict:
    """Write schedule, dispatch, cost and trace files; returns the cost document."""
    out = Path(out_dir)
    doc = cost_document(instance, schedule.cost, schedule.violations)
    write_atomic(out / "schedule.csv", schedule_csv(instance, schedule.commitment))
    write_atomic(out / "dispatch.csv", dispatch_csv(instance, schedule.dispatch.power))
    write_atomic(out / "cost.json", dumps(doc))
    write_atomic(out / "trace.csv", trace_csv(trace))
    if record is not None:
        write_atomic(out / "run.json", dumps(asdict(record)))
    return doc


SUMMARY_HEADER = ["algorithm", "runs", "best", "worst", "median", "mean", "feasible_rate"]


def summary_rows(records: list) -> list:
    by_algo = {}
    for r in records:
        by_algo.setdefault(r.algorithm, []).append(r)
    rows = []
    for algo, runs in by_algo.items():
        costs = np.array([r.best_cost for r in runs])
        rows.append([algo, len(runs), fmt(costs.min()), fmt(costs.max()), fmt(np.median(costs)),
                     fmt(costs.mean()), fmt(np.mean([r.feasible for r in runs]))])
    return rows


def summary_csv(records: list) -> str:
    return _table(SUMMARY_HEADER, summary_rows(records))


def read_summary_csv(path) -> dict:
    with open(path, newline="") as fh:
        return {r["algorithm"]: r for r in csv.DictReader(fh)}

