"""Seeded random streams for reproducible runs."""

from __future__ import annotations

import hashlib

import numpy as np


class SeededRng:
    """Wrapper around ``numpy.random.Generator`` with labelled child streams.

    A fork never advances the parent stream: the child seed is derived from
    ``(seed, label)`` only, so workers handed forks in any order or on any host
    draw the same numbers.
    """

    def __init__(self, seed: int):
        self._seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self._generator = np.random.default_rng(self._seed)

    @property
    def seed(self) -> int:
        return self._seed

    @property
    def generator(self) -> np.random.Generator:
        return self._generator

    def fork(self, label: str) -> SeededRng:
        """Create a child stream for the purpose named by ``label``."""
        digest = hashlib.sha256(f"{self._seed}/{label}".encode()).digest()
        return SeededRng(int.from_bytes(digest[:8], "little"))

    def random(self, size: int | None = None):
        return self._generator.random(size)

    def permutation(self, n: int) -> list[int]:
        return [int(x) for x in self._generator.permutation(n)]

    def shuffled(self, items: list) -> list:
        order = self._generator.permutation(len(items))
        return [items[i] for i in order]

    def exponential(self, scale, size=None):
        return self._generator.exponential(scale, size)

    def uniform(self, low: float, high: float, size=None):
        return self._generator.uniform(low, high, size)

    def __repr__(self) -> str:
        return f"SeededRng(seed={self._seed})"
