"""Portable 64-bit PRNG used for every random choice in the package.

Fold plans and synthetic data must be bit-identical across platforms and
languages, so nothing here touches ``numpy.random``.

Recurrences (all arithmetic modulo 2**64):

    splitmix64 finalizer  mix(z):
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
        z = (z ^ (z >> 27)) * 0x94D049BB133111EB
        return z ^ (z >> 31)

    seeding:   state = mix(seed + 0x9E3779B97F4A7C15); state = 0x9E3779B97F4A7C15 if state == 0
    xorshift64*:
        x ^= x >> 12; x ^= x << 25; x ^= x >> 27
        output = x * 0x2545F4914F6CDD1D

    derive_seed(seed, k) = mix(seed + (k + 1) * 0x9E3779B97F4A7C15)

Derived values:

    uniform()      = (next() >> 11) * 2**-53                 in [0, 1)
    randbelow(n)   = rejection on next() >= 2**64 - (2**64 mod n), then next() mod n
    shuffle(xs)    = Fisher-Yates, i from len-1 down to 1, j = randbelow(i + 1)
    normal pair    = Box-Muller with u1 = 1 - uniform(), u2 = uniform():
                     r = sqrt(-2 ln u1); (r cos(2 pi u2), r sin(2 pi u2))
"""

from __future__ import annotations

import math

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, *path: int) -> int:
    """Child seed for an independent stream; ``derive_seed(s, a, b)`` nests."""
    s = seed & MASK64
    for k in path:
        s = mix64(s + (k + 1) * GOLDEN)
    return s


class Xorshift64Star:
    def __init__(self, seed: int = 0):
        if seed < 0:
            raise ValueError(f"seed must be a non-negative integer, got {seed}")
        self.seed = seed & MASK64
        state = mix64(self.seed + GOLDEN)
        self._state = state if state != 0 else GOLDEN

    def next_u64(self) -> int:
        x = self._state
        x ^= x >> 12
        x ^= (x << 25) & MASK64
        x ^= x >> 27
        self._state = x
        return (x * 0x2545F4914F6CDD1D) & MASK64

    def spawn(self, key: int) -> "Xorshift64Star":
        return Xorshift64Star(derive_seed(self.seed, key))

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def randbelow(self, n: int) -> int:
        if n <= 0:
            raise ValueError("randbelow needs n >= 1")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            r = self.next_u64()
            if r < limit:
                return r % n

    def shuffle(self, items: list) -> list:
        """In-place Fisher-Yates; returns the list for chaining."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]
        return items

    def normal(self, size: int | tuple[int, ...]) -> np.ndarray:
        shape = (size,) if isinstance(size, int) else tuple(size)
        n = int(np.prod(shape)) if shape else 1
        out = []
        while len(out) < n:
            u1 = 1.0 - self.uniform()
            u2 = self.uniform()
            r = math.sqrt(-2.0 * math.log(u1))
            out.append(r * math.cos(2.0 * math.pi * u2))
            out.append(r * math.sin(2.0 * math.pi * u2))
        return np.asarray(out[:n], dtype=float).reshape(shape)

    def unit_vector(self, dim: int) -> np.ndarray:
        while True:
            v = self.normal(dim)
            norm = float(np.linalg.norm(v))
            if norm > 1e-12:
                return v / norm
