"""Pieces shared by every optimizer: fitness, chromosomes, evaluation budget."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dispatch import _dispatch_bits
from .model import CostBreakdown, EvaluatedSchedule, UCInstance, _run_evaluation, \
    as_commitment, evaluate
from .repair import Repairer

logger = logging.getLogger(__name__)

IMPROVEMENT_TOL = 1e-6


def fitness(instance: UCInstance, genome):
    """Dispatch then evaluate; returns (fitness, CostBreakdown, DispatchMatrix)."""
    bits = as_commitment(genome, instance)
    dispatch = _dispatch_bits(instance, bits)
    cost, _, _ = _run_evaluation(instance, bits, dispatch.power)
    return cost.total, cost, dispatch


@dataclass(frozen=True)
class Chromosome:
    genome: np.ndarray
    fitness: float
    cost: CostBreakdown
    feasible: bool

    @property
    def key(self) -> bytes:
        return self.genome.tobytes()


def select_survivors(old: list, offspring: list, size: int) -> list:
    """Keep the ``size`` cheapest of ``old + offspring``.

    The pool is treated as a set: a genome already kept is skipped while
    distinct genomes remain, and duplicates only pad the result when there
    are fewer than ``size`` distinct ones.  Ties go to members of ``old``
    first, then to the lexicographically smaller genome.
    """
    if len(old) + len(offspring) < size:
        raise ValueError(f"cannot keep {size} survivors out of {len(old) + len(offspring)}")
    pool = [(c.fitness, 0, c.key, k, c) for k, c in enumerate(old)]
    pool += [(c.fitness, 1, c.key, k, c) for k, c in enumerate(offspring)]
    pool.sort(key=lambda e: e[:4])
    seen = set()
    unique, repeats = [], []
    for e in pool:
        (repeats if e[2] in seen else unique).append(e[4])
        seen.add(e[2])
    return (unique + repeats)[:size]


def best_of(chromosomes) -> Chromosome:
    return min(chromosomes, key=lambda c: (c.fitness, c.key))


class BudgetExhausted(Exception):
    pass


class Evaluator:
    """Repair-and-evaluate service with an evaluation counter.

    Every requested evaluation counts against the budget, including repeats
    of a genome seen before (those are answered from a cache).  Results do
    not depend on ``workers``.
    """

    def __init__(self, instance: UCInstance, repair: bool = True, budget=None, workers: int = 1):
        self.instance = instance
        self.repairer = Repairer(instance) if repair else None
        self.budget = budget
        self.workers = max(1, int(workers))
        self.count = 0
        self._cache = {}
        self._pool = ThreadPoolExecutor(self.workers) if self.workers > 1 else None

    def remaining(self):
        return None if self.budget is None else self.budget - self.count

    def can_afford(self, n: int) -> bool:
        return self.budget is None or self.count + n <= self.budget

    def _one(self, genome) -> Chromosome:
        if self.repairer is not None:
            genome = self.repairer(genome)
        else:
            genome = as_commitment(genome, self.instance)
        key = genome.tobytes()
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        dispatch = _dispatch_bits(self.instance, genome)
        cost, n_violations, _ = _run_evaluation(self.instance, genome, dispatch.power)
        genome.setflags(write=False)
        return Chromosome(genome, cost.total, cost, n_violations == 0)

    def __call__(self, genomes: list) -> list:
        if not self.can_afford(len(genomes)):
            raise BudgetExhausted(f"{len(genomes)} evaluations requested, {self.remaining()} left")
        if self._pool is not None and len(genomes) > 1:
            out = list(self._pool.map(self._one, genomes))
        else:
            out = [self._one(g) for g in genomes]
        self.count += len(genomes)
        for c in out:
            self._cache.setdefault(c.key, c)
        return out

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()

    def full_schedule(self, chromosome: Chromosome) -> EvaluatedSchedule:
        bits = chromosome.genome
        dispatch = _dispatch_bits(self.instance, np.ascontiguousarray(bits))
        cost, report = evaluate(self.instance, bits, dispatch)
        return EvaluatedSchedule(bits, dispatch, cost, report)


@dataclass
class TracePoint:
    generation: int
    evaluations: int
    best_cost: float


@dataclass
class RunResult:
    algorithm: str
    best: EvaluatedSchedule
    trace: list
    evaluations: int
    stop_reason: str
    stats: dict = field(default_factory=dict)

    @property
    def best_cost(self) -> float:
        return self.best.cost.total


class Progress:
    """Best-so-far bookkeeping and stopping rules shared by all optimizers."""

    def __init__(self, evaluator: Evaluator, max_generations: int, stagnation_limit: int):
        self.evaluator = evaluator
        self.max_generations = max_generations
        self.stagnation_limit = stagnation_limit
        self.best = None
        self.trace = []
        self.stagnant = 0
        self.stop_reason = None

    def record(self, generation: int, candidates) -> None:
        cand = best_of(candidates)
        if self.best is None or cand.fitness < self.best.fitness - IMPROVEMENT_TOL:
            self.best = cand
            self.stagnant = 0
        else:
            if cand.fitness < self.best.fitness:
                self.best = cand
            self.stagnant += 1
        self.trace.append(TracePoint(generation, self.evaluator.count, self.best.fitness))

    def should_stop(self, generation: int, next_cost: int) -> bool:
        if generation >= self.max_generations:
            self.stop_reason = "max_generations"
        elif self.stagnant >= self.stagnation_limit:
            self.stop_reason = "stagnation"
        elif next_cost > 0 and not self.evaluator.can_afford(next_cost):
            self.stop_reason = "budget"
        return self.stop_reason is not None

    def result(self, algorithm: str, **stats) -> RunResult:
        self.evaluator.close()
        best = self.evaluator.full_schedule(self.best)
        return RunResult(algorithm, best, self.trace, self.evaluator.count,
                         self.stop_reason or "max_generations", stats)
