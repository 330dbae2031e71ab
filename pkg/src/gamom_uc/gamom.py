"""Two-population genetic algorithm with mitosis and meiosis.

Population 1 holds asexual chromosomes that reproduce by duplication plus
mutation (mitosis); population 2 holds sexual chromosomes that reproduce by
crossover plus a lighter mutation (meiosis).  Each generation both
populations feed two mating pools through the mixing ratios ``alpha`` (own
population) and ``beta`` (the other population), so chromosomes migrate in
both directions while neither population is ever dropped.  Offspring of each
pool compete elitistically with the population they are assigned to.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, fields
from enum import Enum
from pathlib import Path

import numpy as np

from .evolution import Chromosome, Evaluator, Progress, RunResult, best_of, select_survivors
from .model import UCInstance
from .rng import SeedTree

logger = logging.getLogger(__name__)

# stream roles under SeedTree(seed).child(generation, role, ...)
_INIT_POP1, _INIT_POP2, _SELECT, _MITOSIS, _MEIOSIS = range(5)


class Crossover(str, Enum):
    UNIFORM = "Uniform"
    TWO_POINT = "TwoPoint"


@dataclass(frozen=True)
class GamomParams:
    n1: int = 50
    n2: int = 50
    m1: float = 0.9
    m2: float = 0.9
    alpha1: float = 0.7
    alpha2: float = 0.7
    beta1: float = 0.3
    beta2: float = 0.3
    mitosis_mutation_rate: float = 0.02
    meiosis_mutation_rate: float = 0.005
    crossover_kind: Crossover = Crossover.UNIFORM
    max_generations: int = 200
    stagnation_limit: int = 50
    seed: int = 0
    repair_enabled: bool = True
    eq13_literal: bool = False

    def __post_init__(self):
        object.__setattr__(self, "crossover_kind", Crossover(self.crossover_kind))
        if self.n1 < 2 or self.n2 < 2:
            raise ValueError("n1 and n2 must be at least 2")
        for name in ("m1", "m2", "alpha1", "alpha2", "beta1", "beta2",
                     "mitosis_mutation_rate", "meiosis_mutation_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if not self.mitosis_mutation_rate > self.meiosis_mutation_rate:
            raise ValueError("mitosis mutation rate must exceed meiosis mutation rate")

    @classmethod
    def from_dict(cls, doc: dict) -> "GamomParams":
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown GAMOM parameters: {sorted(unknown)}")
        return cls(**doc)

    @classmethod
    def load(cls, path) -> "GamomParams":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["crossover_kind"] = self.crossover_kind.value
        return doc


@dataclass
class PopulationPair:
    pop1: list
    pop2: list
    generation: int
    best_ever: Chromosome
    trace: list


def _round(x: float) -> int:
    # half-up; the epsilon absorbs products such as 0.9 * 0.7 * 50 = 31.499999...
    return int(math.floor(x + 0.5 + 1e-9))


def _draws(params: GamomParams):
    """Per-source draw counts: ((own1, other1), (own2, other2))."""
    p = params
    if p.eq13_literal:
        own2_raw, other2_raw = p.alpha2 * p.m2 * p.n1, p.beta2 * p.m2 * p.n2
    else:
        own2_raw, other2_raw = p.alpha2 * p.m2 * p.n2, p.beta2 * p.m2 * p.n1
    own1_raw, other1_raw = p.alpha1 * p.m1 * p.n1, p.beta1 * p.m1 * p.n2

    out = []
    for own_raw, other_raw in ((own1_raw, other1_raw), (own2_raw, other2_raw)):
        size = max(2, _round(own_raw + other_raw))
        other = _round(other_raw)
        if other_raw > 0:
            other = max(other, 1)
        other = min(other, size)
        out.append((size - other, other))
    return tuple(out)


def subpopulation_sizes(params: GamomParams):
    """Mating-pool sizes ``(n1', n2')``.

    ``n1' = alpha1*m1*n1 + beta1*m1*n2`` and ``n2' = alpha2*m2*n2 + beta2*m2*n1``,
    rounded half-up and floored at 2.  With ``eq13_literal`` the second pool
    uses ``alpha2*m2*n1 + beta2*m2*n2`` instead.
    """
    (o1, x1), (o2, x2) = _draws(params)
    return o1 + x1, o2 + x2


def _sample(source: list, k: int, rng: np.random.Generator, label: str) -> list:
    if k > len(source):
        logger.warning("%s: requested %d chromosomes from a population of %d; truncated",
                       label, k, len(source))
        k = len(source)
    if k <= 0:
        return []
    return [source[j] for j in rng.choice(len(source), size=k, replace=False)]


def form_subpopulations(pair: PopulationPair, params: GamomParams, rng: np.random.Generator):
    """Draw the mitosis pool (sub1) and the meiosis pool (sub2).

    Each pool takes its own population's share first and the migrants from
    the other population second.  Draws are without replacement within each
    source; the populations themselves are not modified.
    """
    (own1, other1), (own2, other2) = _draws(params)
    sub1 = _sample(pair.pop1, own1, rng, "sub1<-pop1") + _sample(pair.pop2, other1, rng, "sub1<-pop2")
    sub2 = _sample(pair.pop2, own2, rng, "sub2<-pop2") + _sample(pair.pop1, other2, rng, "sub2<-pop1")
    return sub1, sub2


def _random_genome(instance: UCInstance, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, 2, size=instance.shape, dtype=np.uint8)


def init_populations(instance: UCInstance, params: GamomParams, evaluator: Evaluator = None) -> PopulationPair:
    if evaluator is None:
        evaluator = Evaluator(instance, repair=params.repair_enabled)
    tree = SeedTree(params.seed)
    g1 = [_random_genome(instance, tree.child(0, _INIT_POP1, k).generator()) for k in range(params.n1)]
    g2 = [_random_genome(instance, tree.child(0, _INIT_POP2, k).generator()) for k in range(params.n2)]
    pop1 = sorted(evaluator(g1), key=lambda c: (c.fitness, c.key))
    pop2 = sorted(evaluator(g2), key=lambda c: (c.fitness, c.key))
    return PopulationPair(pop1, pop2, 0, best_of(pop1 + pop2), [])


def flip(genome: np.ndarray, rate: float, rng: np.random.Generator) -> np.ndarray:
    mask = rng.random(genome.shape) < rate
    return np.where(mask, 1 - genome, genome).astype(np.uint8)


def mitosis(sub1: list, params: GamomParams, streams: SeedTree, evaluate) -> list:
    """Duplicate every chromosome and mutate the copy.

    ``streams.child(k)`` drives the mutation of the k-th copy; ``evaluate``
    repairs and scores a list of genomes.
    """
    children = [flip(c.genome, params.mitosis_mutation_rate, streams.child(k).generator())
                for k, c in enumerate(sub1)]
    return evaluate(children)


def crossover(a: np.ndarray, b: np.ndarray, kind: Crossover, rng: np.random.Generator):
    """Two children from two parents; genomes are treated as flat bit strings."""
    fa, fb = a.ravel(), b.ravel()
    if kind is Crossover.UNIFORM:
        take_a = rng.random(fa.size) < 0.5
        c1 = np.where(take_a, fa, fb)
        c2 = np.where(take_a, fb, fa)
    else:
        i, j = sorted(rng.choice(fa.size + 1, size=2, replace=False))
        c1, c2 = fa.copy(), fb.copy()
        c1[i:j], c2[i:j] = fb[i:j], fa[i:j]
    return c1.reshape(a.shape).astype(np.uint8), c2.reshape(a.shape).astype(np.uint8)


def meiosis(sub2: list, params: GamomParams, streams: SeedTree, evaluate) -> list:
    """Pair parents at random, recombine each pair, then mutate lightly.

    An odd parent left without a partner passes through unchanged and costs
    no evaluation.
    """
    if len(sub2) < 2:
        raise ValueError("meiosis needs at least two parents")
    order = streams.child(0).generator().permutation(len(sub2))
    children = []
    for k in range(len(sub2) // 2):
        rng = streams.child(1, k).generator()
        a, b = sub2[order[2 * k]].genome, sub2[order[2 * k + 1]].genome
        for child in crossover(a, b, params.crossover_kind, rng):
            children.append(flip(child, params.meiosis_mutation_rate, rng))
    offspring = evaluate(children)
    if len(sub2) % 2:
        offspring.append(sub2[order[-1]])
    return offspring


def run(instance: UCInstance, params: GamomParams, budget: int = None, workers: int = 1) -> RunResult:
    evaluator = Evaluator(instance, repair=params.repair_enabled, budget=budget, workers=workers)
    pair = init_populations(instance, params, evaluator)
    progress = Progress(evaluator, params.max_generations, params.stagnation_limit)
    progress.record(0, pair.pop1 + pair.pop2)

    n1s, n2s = subpopulation_sizes(params)
    per_generation = n1s + 2 * (n2s // 2)
    (_, other1), (_, other2) = _draws(params)
    tree = SeedTree(params.seed)
    migrants = []

    gen = 0
    while not progress.should_stop(gen, per_generation):
        gen += 1
        sub1, sub2 = form_subpopulations(pair, params, tree.child(gen, _SELECT).generator())
        migrants.append(min(other1, len(pair.pop2)) + min(other2, len(pair.pop1)))
        off1 = mitosis(sub1, params, tree.child(gen, _MITOSIS), evaluator)
        off2 = meiosis(sub2, params, tree.child(gen, _MEIOSIS), evaluator)
        pair.pop1 = select_survivors(pair.pop1, off1, params.n1)
        pair.pop2 = select_survivors(pair.pop2, off2, params.n2)
        pair.generation = gen
        progress.record(gen, pair.pop1[:1] + pair.pop2[:1])
        pair.best_ever = progress.best
    pair.trace = progress.trace
    return progress.result("gamom", generations=gen, migrants=migrants,
                           pop_sizes=(len(pair.pop1), len(pair.pop2)))
