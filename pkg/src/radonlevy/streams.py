"""Counter-addressed random streams.

Each replication of an experiment owns a Philox key ``(seed, replication)``.
Inside a replication, coordinate ``k`` reads the counter block starting at
``(0, k, 0, 0)`` and the Poisson clock reads ``(0, 0, 1, 0)``.  Philox only
increments the lowest counter word while drawing, so the substreams never
overlap, and any coordinate of any replication can be regenerated on its own,
in any order, on any worker.
"""

from __future__ import annotations

import numpy as np

__all__ = ["MAX_SEED", "check_seed", "ReplicationStreams"]

MAX_SEED = 2**64 - 1

_CLOCK_LANE = 1
_COORDINATE_LANE = 0


def check_seed(seed) -> int:
    if isinstance(seed, (bool, np.bool_)) or int(seed) != seed:
        raise ValueError(f"seed must be an integer, got {seed!r}")
    seed = int(seed)
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must lie in [0, 2**64), got {seed}")
    return seed


class ReplicationStreams:
    """Generators for the substreams of one replication.

    The returned generators share one bit generator whose state is reset on
    every call, so consume each before asking for the next.  Instances are not
    meant to be shared between threads.
    """

    def __init__(self, seed: int, replication: int = 0):
        self.seed = check_seed(seed)
        if int(replication) != replication or replication < 0:
            raise ValueError(f"replication index must be a non-negative integer, got {replication!r}")
        self.replication = int(replication)
        self._key = np.array([self.seed, self.replication], dtype=np.uint64)
        self._bitgen = np.random.Philox(key=self._key)
        self._generator = np.random.Generator(self._bitgen)

    def _at(self, word1: int, word2: int) -> np.random.Generator:
        self._bitgen.state = {
            "bit_generator": "Philox",
            "state": {
                "counter": np.array([0, word1, word2, 0], dtype=np.uint64),
                "key": self._key,
            },
            "buffer": np.zeros(4, dtype=np.uint64),
            "buffer_pos": 4,
            "has_uint32": 0,
            "uinteger": 0,
        }
        return self._generator

    def coordinate(self, k: int) -> np.random.Generator:
        return self._at(int(k), _COORDINATE_LANE)

    def clock(self) -> np.random.Generator:
        return self._at(0, _CLOCK_LANE)
