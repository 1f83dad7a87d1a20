from typing import Sequence

import numpy as np

from src.localcast.core.config import settings


def trial_generator(seed: int, *key: int) -> np.random.Generator:
    """Counter-based generator keyed by the seed plus any extra integers."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, *key])))


class NodeStream:
    """
    Per-node uniform stream keyed by (seed, node id).

    The Philox counter advances by one draw per call, so a node's k-th active
    slot always sees the same uniform regardless of how other nodes are
    iterated. Draws are fetched in blocks to keep per-slot overhead low.
    """

    def __init__(self, seed: int, node_id: int, block_size: int = settings.RNG_BLOCK_SIZE):
        self._generator = trial_generator(seed, node_id & 0xFFFFFFFF, node_id >> 32 & 0xFFFFFFFF)
        self._block_size = block_size
        self._block: Sequence[float] = ()
        self._pos = 0

    def random(self) -> float:
        if self._pos >= len(self._block):
            self._block = self._generator.random(self._block_size).tolist()
            self._pos = 0
        value = self._block[self._pos]
        self._pos += 1
        return value
