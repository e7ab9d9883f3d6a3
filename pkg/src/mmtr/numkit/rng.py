"""Deterministic splitmix64 generator.

The stream is counter based: draw ``i`` (1-based) from state ``s`` is
``mix(s + i * GAMMA)`` with wrapping 64-bit arithmetic, so a block of ``n``
draws can be produced with numpy in one shot and is bit-identical to ``n``
scalar draws.
"""

from __future__ import annotations

import hashlib

import numpy as np

GAMMA = 0x9E3779B97F4A7C15
_MASK = (1 << 64) - 1
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def _mix_int(z: int) -> int:
    z = ((z ^ (z >> 30)) * _M1) & _MASK
    z = ((z ^ (z >> 27)) * _M2) & _MASK
    return z ^ (z >> 31)


def _mix_array(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def derive_seed(master: int, *keys) -> int:
    """Stable 64-bit seed for a named sub-stream (e.g. a variant and fold)."""
    h = hashlib.blake2b(digest_size=8)
    h.update(int(master & _MASK).to_bytes(8, "little"))
    for k in keys:
        h.update(b"\x1f")
        h.update(str(k).encode("utf-8"))
    return int.from_bytes(h.digest(), "little")


class Rng:
    algorithm = "splitmix64"

    def __init__(self, seed: int):
        self.state = int(seed) & _MASK

    def fork(self, *keys) -> "Rng":
        return Rng(derive_seed(self.state, *keys))

    def next_u64(self) -> int:
        self.state = (self.state + GAMMA) & _MASK
        return _mix_int(self.state)

    def u64(self, n: int) -> np.ndarray:
        steps = np.arange(1, n + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = np.uint64(self.state) + steps * np.uint64(GAMMA)
            out = _mix_array(z)
        self.state = (self.state + n * GAMMA) & _MASK
        return out

    def random(self, n: int | None = None):
        """Uniform floats in [0, 1) with 53 bits of precision."""
        if n is None:
            return (self.next_u64() >> 11) * 2.0**-53
        return (self.u64(n) >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def uniform(self, low: float, high: float, shape=()) -> np.ndarray:
        n = int(np.prod(shape)) if shape != () else 1
        u = self.random(n)
        return (low + (high - low) * u).reshape(shape)

    def normal(self, shape=(), loc: float = 0.0, scale: float = 1.0) -> np.ndarray:
        # Box-Muller on pairs; 1 - u keeps log away from zero
        n = int(np.prod(shape)) if shape != () else 1
        m = (n + 1) // 2
        u = self.random(2 * m)
        r = np.sqrt(-2.0 * np.log(1.0 - u[:m]))
        theta = 2.0 * np.pi * u[m:]
        z = np.concatenate([r * np.cos(theta), r * np.sin(theta)])[:n]
        return (loc + scale * z).reshape(shape)

    def integers(self, high: int, n: int | None = None):
        """Uniform integers in [0, high)."""
        if n is None:
            return int(self.random() * high)
        return (self.random(n) * high).astype(np.int64)

    def bernoulli(self, p: float, n: int | None = None):
        if n is None:
            return self.random() < p
        return self.random(n) < p

    def permutation(self, n: int) -> np.ndarray:
        # sort keys are distinct with overwhelming probability; stable sort breaks ties by index
        return np.argsort(self.u64(n), kind="stable")

    def shuffle(self, items: list) -> list:
        return [items[i] for i in self.permutation(len(items))]

    def choice(self, n: int, size: int, p: np.ndarray) -> np.ndarray:
        """Draw ``size`` indices from ``range(n)`` with probabilities ``p``."""
        cdf = np.cumsum(p)
        cdf /= cdf[-1]
        return np.minimum(np.searchsorted(cdf, self.random(size), side="right"), n - 1)
