"""Deterministic random streams keyed by (purpose, ids...).

Every draw in a run comes from a generator derived from the master seed and
a fixed key, so the order in which clients are processed (or how many
threads process them) cannot change any number.
"""

from __future__ import annotations

import numpy as np

PURPOSES = {
    "partition": 1,
    "init": 2,
    "fading": 3,
    "interference": 4,
    "dataset": 5,
}


def stream(seed: int, purpose: str, *ids: int) -> np.random.Generator:
    key = (PURPOSES[purpose], *(int(i) for i in ids))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=key)))
