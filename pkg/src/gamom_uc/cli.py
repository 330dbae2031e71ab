"""Command-line front end.

Exit status: 0 when the reported schedule is feasible, 2 when it is not,
1 on usage or data errors.  ``GAMOM_UC_OUT`` overrides the output directory.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

from . import baselines, gamom, oracle
from .files import (RunRecord, cost_document, dumps, read_schedule_csv, summary_csv,
                    write_atomic, write_outputs)
from .dispatch import dispatch_schedule
from .evolution import TracePoint
from .model import InputError, evaluate, load_instance, validate_instance

logger = logging.getLogger("gamom_uc")

OUT_ENV = "GAMOM_UC_OUT"
ALGORITHMS = {
    "gamom": (gamom.GamomParams, gamom.run),
    "ga": (baselines.GaParams, baselines.ga_run),
    "pso": (baselines.PsoParams, baselines.pso_run),
}
OK, USAGE, INFEASIBLE = 0, 1, 2


class CliError(Exception):
    pass


def _load_instance(path):
    p = Path(path)
    if not p.is_file():
        raise CliError(f"instance file not found: {p}")
    try:
        inst = load_instance(p)
    except (json.JSONDecodeError, InputError) as exc:
        raise CliError(f"{p}: {exc}") from exc
    errors = [d.message for d in validate_instance(inst) if d.level == "error"]
    if errors:
        raise CliError(f"{p}: invalid instance: " + "; ".join(errors))
    return inst


def _params_doc(path) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.is_file():
        raise CliError(f"parameter file not found: {p}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise CliError(f"{p}: {exc}") from exc


def make_params(algo: str, doc: dict, seed=None):
    """Parameters for ``algo`` from a flat document or one keyed by algorithm name."""
    cls, _ = ALGORITHMS[algo]
    if any(k in ALGORITHMS for k in doc):
        doc = doc.get(algo, {})
    try:
        params = cls.from_dict(doc)
    except (TypeError, ValueError) as exc:
        raise CliError(f"bad {algo} parameters: {exc}") from exc
    return params if seed is None else replace(params, seed=seed)


def _out_dir(arg):
    out = os.environ.get(OUT_ENV) or arg
    if not out:
        raise CliError(f"no output directory: pass --out or set {OUT_ENV}")
    return Path(out)


def _uncapped(algo: str, params, doc: dict):
    """Let only the evaluation budget and stagnation end a comparison run."""
    name = "max_iterations" if algo == "pso" else "max_generations"
    if any(k in ALGORITHMS for k in doc):
        doc = doc.get(algo, {})
    return params if name in doc else replace(params, **{name: 10 ** 9})


def solve(algo, instance, params, budget=None, workers=1):
    _, runner = ALGORITHMS[algo]
    t0 = time.perf_counter()
    result = runner(instance, params, budget=budget, workers=workers)
    return result, time.perf_counter() - t0


def _record_run(out, algo, seed, instance, result, wall, budget):
    rec = RunRecord(algorithm=algo, seed=seed, best_cost=result.best_cost,
                    feasible=result.best.feasible, evaluations_used=result.evaluations,
                    wall_time=round(wall, 6), trace_path=str(out / "trace.csv"),
                    budget=budget, stop_reason=result.stop_reason)
    write_outputs(out, instance, result.best, result.trace, rec)
    return rec


def cmd_run(args) -> int:
    inst = _load_instance(args.instance)
    params = make_params(args.algo, _params_doc(args.params), args.seed)
    out = _out_dir(args.out)
    result, wall = solve(args.algo, inst, params, args.budget, args.workers)
    rec = _record_run(out, args.algo, params.seed, inst, result, wall, args.budget)
    print(f"{args.algo}: best cost {rec.best_cost:.6f}, feasible={rec.feasible}, "
          f"evaluations={rec.evaluations_used}, stop={rec.stop_reason}")
    return OK if rec.feasible else INFEASIBLE


def _run_oracle(inst):
    try:
        return oracle.enumerate_optimal(inst)
    except oracle.OracleTooLarge as exc:
        raise CliError(str(exc)) from exc


def cmd_oracle(args) -> int:
    inst = _load_instance(args.instance)
    out = _out_dir(args.out)
    t0 = time.perf_counter()
    res = _run_oracle(inst)
    wall = time.perf_counter() - t0
    n_evals = 1 << (inst.n_units * inst.horizon)
    trace = [TracePoint(0, n_evals, res.schedule.cost.total)]
    rec = RunRecord("oracle", 0, res.schedule.cost.total, res.feasible_found, n_evals,
                    round(wall, 6), str(out / "trace.csv"), None, "exhausted")
    write_outputs(out, inst, res.schedule, trace, rec)
    print(f"oracle: best cost {rec.best_cost:.6f}, feasible={rec.feasible}")
    return OK if rec.feasible else INFEASIBLE


def cmd_compare(args) -> int:
    if args.seeds < 1:
        raise CliError("--seeds must be at least 1")
    inst = _load_instance(args.instance)
    doc = _params_doc(args.params)
    algos = [a.strip() for a in args.algos.split(",") if a.strip()]
    for a in algos:
        if a not in ALGORITHMS:
            raise CliError(f"unknown algorithm {a!r}; choose from {sorted(ALGORITHMS)}")
    out = _out_dir(args.out)
    records = []
    for algo in algos:
        for seed in range(1, args.seeds + 1):
            params = make_params(algo, doc, seed)
            if args.budget is not None:
                params = _uncapped(algo, params, doc)
            result, wall = solve(algo, inst, params, args.budget, args.workers)
            rec = _record_run(out / "runs" / algo / f"seed_{seed}", algo, seed, inst, result, wall, args.budget)
            logger.info("%s seed %d: %.6f (%s)", algo, seed, rec.best_cost, rec.stop_reason)
            records.append(rec)

    status = OK if all(r.feasible for r in records) else INFEASIBLE
    if args.with_oracle:
        res = _run_oracle(inst)
        best = res.schedule.cost.total
        odir = out / "oracle"
        rec = RunRecord("oracle", 0, best, res.feasible_found, 1 << (inst.n_units * inst.horizon),
                        0.0, str(odir / "trace.csv"), None, "exhausted")
        write_outputs(odir, inst, res.schedule, [TracePoint(0, rec.evaluations_used, best)], rec)
        beaten = [r for r in records if r.best_cost < best - 1e-6 * max(1.0, abs(best))]
        records.append(rec)
        if beaten:
            write_atomic(out / "summary.csv", summary_csv(records))
            raise CliError("oracle dominance violated by " +
                           ", ".join(f"{r.algorithm}/seed {r.seed}" for r in beaten))
    write_atomic(out / "summary.csv", summary_csv(records))
    write_atomic(out / "runs.json", dumps([r.__dict__ for r in records]))
    print(summary_csv(records), end="")
    return status


def cmd_check(args) -> int:
    inst = _load_instance(args.instance)
    if not Path(args.schedule).is_file():
        raise CliError(f"schedule file not found: {args.schedule}")
    try:
        bits = read_schedule_csv(args.schedule, inst)
    except InputError as exc:
        raise CliError(str(exc)) from exc
    dispatch = dispatch_schedule(inst, bits)
    cost, report = evaluate(inst, bits, dispatch)
    doc = cost_document(inst, cost, report)
    if args.out or os.environ.get(OUT_ENV):
        write_atomic(_out_dir(args.out) / "cost.json", dumps(doc))
    for v in doc["violations"]:
        unit = v["unit"] if v["unit"] is not None else "system"
        print(f"violation {v['constraint']}: unit={unit} hour={v['hour']} magnitude={v['magnitude']:.6f}")
    c = doc["cost"]
    print(f"fuel={c['fuel']:.6f} startup={c['startup']:.6f} shutdown={c['shutdown']:.6f} "
          f"penalty={c['penalty']:.6f} total={c['total']:.6f}")
    print("feasible" if report.is_feasible else f"infeasible: {len(doc['violations'])} violations")
    return OK if report.is_feasible else INFEASIBLE


def cmd_validate(args) -> int:
    p = Path(args.instance)
    if not p.is_file():
        raise CliError(f"instance file not found: {p}")
    try:
        inst = load_instance(p)
    except (json.JSONDecodeError, InputError) as exc:
        raise CliError(f"{p}: {exc}") from exc
    diags = validate_instance(inst)
    for d in diags:
        print(f"{d.level}: {d.message}")
    if any(d.level == "error" for d in diags):
        return USAGE
    print(f"ok: {inst.n_units} units, {inst.horizon} hours")
    return OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gamom-uc", description="Unit commitment with a two-population GA.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, out=True):
        p.add_argument("--instance", required=True)
        if out:
            p.add_argument("--out", default=None)

    p = sub.add_parser("run", help="solve one instance with one algorithm")
    common(p)
    p.add_argument("--algo", choices=sorted(ALGORITHMS), default="gamom")
    p.add_argument("--params", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="run several algorithms over seeds 1..S")
    common(p)
    p.add_argument("--algos", default="gamom,ga,pso")
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--params", default=None)
    p.add_argument("--with-oracle", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("oracle", help="exhaustive optimum of a small instance")
    common(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("check", help="dispatch and verify a schedule file")
    common(p)
    p.add_argument("--schedule", required=True)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("validate", help="check an instance file")
    common(p, out=False)
    p.set_defaults(func=cmd_validate)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return OK if exc.code == 0 else USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
