"""Portable PRNG for the random-pruning baseline.

Seeding: the integer seed (taken mod 2**64) is expanded with one SplitMix64
step; a zero result is replaced by 0x9E3779B97F4A7C15. Generation: Marsaglia
xorshift64 with shifts (12, 25, 27) followed by multiplication by
0x2545F4914F6CDD1D (xorshift64*, Vigna 2016). Bounded integers use rejection
sampling so every value in ``[0, n)`` is exactly equally likely. Any
implementation following these steps reproduces the same prune sets.
"""
from __future__ import annotations

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MULT = 0x2545F4914F6CDD1D


def splitmix64(x: int) -> int:
    z = (x + _GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class XorShift64Star:
    def __init__(self, seed: int = 0):
        state = splitmix64(int(seed) & MASK64)
        self.state = state or _GOLDEN

    def next_u64(self) -> int:
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & MASK64
        x ^= x >> 27
        self.state = x
        return (x * _MULT) & MASK64

    def below(self, n: int) -> int:
        if n <= 0:
            raise ValueError("upper bound must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            v = self.next_u64()
            if v < limit:
                return v % n

    def sample(self, population: list, k: int) -> list:
        """First ``k`` positions of a Fisher-Yates shuffle of ``population``."""
        items = list(population)
        for i in range(k):
            j = i + self.below(len(items) - i)
            items[i], items[j] = items[j], items[i]
        return items[:k]
