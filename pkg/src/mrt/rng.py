"""Seeded random streams with reproducible, order-dependent draws."""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(*parts) -> int:
    """Stable 63-bit seed from arbitrary labelled parts (arm ids, repeat indices)."""
    text = "\x1f".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little") >> 1


class RngState:
    """A seeded PCG64 stream; identical seed + identical call sequence gives
    identical draws. ``position`` counts calls, for debugging determinism."""

    def __init__(self, seed: int):
        self.seed = int(seed)
        self.position = 0
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def normal(self, shape, std: float = 1.0, dtype=np.float64) -> np.ndarray:
        self.position += 1
        return (self._gen.standard_normal(shape) * std).astype(dtype)

    def uniform(self, low: float, high: float, shape, dtype=np.float64) -> np.ndarray:
        self.position += 1
        return self._gen.uniform(low, high, shape).astype(dtype)

    def integers(self, low: int, high: int, shape=None) -> np.ndarray:
        self.position += 1
        return self._gen.integers(low, high, size=shape)

    def permutation(self, n: int) -> np.ndarray:
        self.position += 1
        return self._gen.permutation(n)

    def choice(self, options, shape=None, p=None):
        self.position += 1
        return self._gen.choice(options, size=shape, p=p)

    def spawn(self, *tag) -> "RngState":
        """Independent child stream, deterministic in (seed, tag)."""
        return RngState(derive_seed(self.seed, *tag))
