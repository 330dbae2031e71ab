"""Keyed random streams.

Every random decision draws from its own Philox4x64-10 stream (a
counter-based generator) keyed by NumPy's ``SeedSequence(seed,
spawn_key=path)``, where ``path`` is a tuple of small integers such as
``(generation, role, index)``.  Both algorithms are fully specified, so a run
is reproducible across platforms and independent of evaluation order or the
number of worker threads.
"""
import numpy as np


class SeedTree:
    def __init__(self, seed: int, path: tuple = ()):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self.path = tuple(int(k) for k in path)

    def child(self, *key) -> "SeedTree":
        return SeedTree(self.seed, self.path + key)

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=self.path)
        return np.random.Generator(np.random.Philox(ss))

    def __repr__(self):
        return f"SeedTree({self.seed}, {self.path})"
