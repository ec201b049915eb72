# src/percolation/streams.py - Per-sample random streams and memoized edge coins

from typing import Dict, Hashable

import numpy as np

# spawn-key stream reserved for edge coins (layer offsets use stream 1)
COIN_STREAM = 0
_SEED_MASK = (1 << 64) - 1


def sample_seed(master_seed: int, sample_index: int) -> np.random.SeedSequence:
    """Independent, reproducible seed sequence for one sample.

    The sequence depends only on (master_seed, sample_index), so results do not
    depend on which worker runs the sample or in what order.
    """
    return np.random.SeedSequence(master_seed & _SEED_MASK, spawn_key=(int(sample_index),))


def sample_rng(seed: np.random.SeedSequence) -> np.random.Generator:
    """Counter-based Philox generator for the coin stream of a sample"""
    coin_seed = np.random.SeedSequence(seed.entropy, spawn_key=tuple(seed.spawn_key) + (COIN_STREAM,))
    return np.random.Generator(np.random.Philox(coin_seed))


class EdgeCoins:
    """One uniform per edge, drawn lazily and remembered by edge key.

    An edge with uniform u is open at probability p iff u < p, so explorations
    at several probabilities sharing one EdgeCoins are monotonically coupled.
    """

    def __init__(self, rng: np.random.Generator, block: int = 512):
        self.rng = rng
        self.block = block
        self._memo: Dict[Hashable, float] = {}
        self._buffer = rng.random(block)
        self._cursor = 0

    def __len__(self) -> int:
        return len(self._memo)

    def uniform(self, key: Hashable) -> float:
        u = self._memo.get(key)
        if u is None:
            if self._cursor == self.block:
                self._buffer = self.rng.random(self.block)
                self._cursor = 0
            u = float(self._buffer[self._cursor])
            self._cursor += 1
            self._memo[key] = u
        return u

    def is_open(self, key: Hashable, probability: float) -> bool:
        if probability <= 0.0:
            return False
        if probability >= 1.0:
            return True
        return self.uniform(key) < probability

    def fresh(self) -> "EdgeCoins":
        """Independent configuration continuing the same generator"""
        return EdgeCoins(self.rng, self.block)

    def clear(self) -> None:
        self._memo.clear()
