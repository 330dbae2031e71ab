"""Single-population GA and binary PSO baselines.

Both share the repair, dispatch and evaluation stack with GAMOM, count
evaluations the same way and emit the same trace format, so they can be
compared at equal evaluation budgets.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .evolution import Evaluator, Progress, RunResult
from .gamom import flip
from .model import UCInstance
from .rng import SeedTree


class _Params:
    @classmethod
    def from_dict(cls, doc: dict):
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown {cls.__name__} fields: {sorted(unknown)}")
        return cls(**doc)

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class GaParams(_Params):
    population: int = 100
    crossover_rate: float = 0.9
    mutation_rate: float = 0.01
    tournament_size: int = 3
    elitism_count: int = 2
    max_generations: int = 200
    stagnation_limit: int = 50
    seed: int = 0
    repair_enabled: bool = True

    def __post_init__(self):
        if self.population < 2:
            raise ValueError("population must be at least 2")
        if not 0 <= self.elitism_count <= self.population:
            raise ValueError("elitism_count must lie in [0, population]")
        if self.tournament_size < 1:
            raise ValueError("tournament_size must be at least 1")


@dataclass(frozen=True)
class PsoParams(_Params):
    swarm: int = 100
    inertia: float = 0.72
    cognitive: float = 1.49
    social: float = 1.49
    v_max: float = 4.0
    max_iterations: int = 200
    stagnation_limit: int = 50
    seed: int = 0
    repair_enabled: bool = True

    def __post_init__(self):
        if self.swarm < 2:
            raise ValueError("swarm must be at least 2")
        if not self.v_max > 0:
            raise ValueError("v_max must be positive")


def _tournament(pop, size, rng):
    picks = rng.integers(0, len(pop), size=size)
    return pop[min(picks)]  # pop is sorted, so the lowest index is the fittest


def ga_run(instance: UCInstance, params: GaParams, budget: int = None, workers: int = 1) -> RunResult:
    """Generational GA: tournament selection, uniform crossover, bit-flip mutation, elitism."""
    evaluator = Evaluator(instance, repair=params.repair_enabled, budget=budget, workers=workers)
    tree = SeedTree(params.seed)
    genomes = [tree.child(0, 0, k).generator().integers(0, 2, size=instance.shape, dtype=np.uint8)
               for k in range(params.population)]
    pop = sorted(evaluator(genomes), key=lambda c: (c.fitness, c.key))
    progress = Progress(evaluator, params.max_generations, params.stagnation_limit)
    progress.record(0, pop)

    n_children = params.population - params.elitism_count
    gen = 0
    while not progress.should_stop(gen, n_children):
        gen += 1
        children = []
        for k in range((n_children + 1) // 2):
            rng = tree.child(gen, 1, k).generator()
            a = _tournament(pop, params.tournament_size, rng).genome
            b = _tournament(pop, params.tournament_size, rng).genome
            if rng.random() < params.crossover_rate:
                take_a = rng.random(a.shape) < 0.5
                c1, c2 = np.where(take_a, a, b), np.where(take_a, b, a)
            else:
                c1, c2 = a, b
            children.append(flip(c1, params.mutation_rate, rng))
            children.append(flip(c2, params.mutation_rate, rng))
        offspring = evaluator(children[:n_children]) if n_children else []
        pop = sorted(pop[:params.elitism_count] + offspring, key=lambda c: (c.fitness, c.key))
        progress.record(gen, pop)
    return progress.result("ga", generations=gen)


def _sigmoid(v):
    return 1.0 / (1.0 + np.exp(-v))


def pso_run(instance: UCInstance, params: PsoParams, budget: int = None, workers: int = 1) -> RunResult:
    """Binary PSO: velocities map through the logistic function to ON probabilities.

    Positions are repaired before evaluation and the repaired position is
    what the particle keeps, so personal and global bests are always
    repaired, evaluated commitments.
    """
    evaluator = Evaluator(instance, repair=params.repair_enabled, budget=budget, workers=workers)
    tree = SeedTree(params.seed)
    shape = instance.shape
    velocity = [np.zeros(shape) for _ in range(params.swarm)]
    raw = [tree.child(0, 0, k).generator().integers(0, 2, size=shape, dtype=np.uint8)
           for k in range(params.swarm)]
    particles = evaluator(raw)
    personal = list(particles)
    progress = Progress(evaluator, params.max_iterations, params.stagnation_limit)
    progress.record(0, personal)

    it = 0
    while not progress.should_stop(it, params.swarm):
        it += 1
        leader = progress.best.genome.astype(float)
        moved = []
        for k in range(params.swarm):
            rng = tree.child(it, 1, k).generator()
            x = particles[k].genome.astype(float)
            r1, r2 = rng.random(shape), rng.random(shape)
            v = (params.inertia * velocity[k]
                 + params.cognitive * r1 * (personal[k].genome - x)
                 + params.social * r2 * (leader - x))
            velocity[k] = np.clip(v, -params.v_max, params.v_max)
            moved.append((rng.random(shape) < _sigmoid(velocity[k])).astype(np.uint8))
        particles = evaluator(moved)
        for k, p in enumerate(particles):
            if p.fitness < personal[k].fitness:
                personal[k] = p
        progress.record(it, personal)
    return progress.result("pso", generations=it)
