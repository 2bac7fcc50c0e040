"""Deterministic random numbers for reproducible experiment fixtures.

Candidate sampling and the synthetic dataset generator need byte-identical
output across platforms and Python/numpy versions, which the stdlib and numpy
generators do not contractually guarantee for their higher-level methods.
SplitMix64 is a tiny, well-known 64-bit generator; together with an explicit
partial Fisher-Yates this pins the sampling algorithm completely.
"""

from __future__ import annotations

from typing import Sequence, TypeVar

_MASK64 = (1 << 64) - 1

T = TypeVar("T")


def mix64(value: int) -> int:
    """One SplitMix64 output step applied to ``value``."""
    z = (value + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(*parts: int) -> int:
    """Fold integer parts into one 64-bit seed (order-sensitive)."""
    state = 0
    for part in parts:
        state = mix64(state ^ (part & _MASK64))
    return state


class SplitMix64:
    """SplitMix64 stream with the few sampling primitives the toolkit needs."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def randrange(self, n: int) -> int:
        """Uniform integer in [0, n) via rejection sampling (no modulo bias)."""
        if n <= 0:
            raise ValueError("randrange bound must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            u = self.next_u64()
            if u < limit:
                return u % n

    def uniform(self) -> float:
        """Float in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) / float(1 << 53)

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randrange(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample(self, population: Sequence[T], k: int) -> list[T]:
        """k distinct items, drawn by partial Fisher-Yates over a copy."""
        if k > len(population):
            raise ValueError("sample size exceeds population")
        pool = list(population)
        for i in range(k):
            j = i + self.randrange(len(pool) - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]
