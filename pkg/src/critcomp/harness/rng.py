"""Seeded random streams: one Philox generator per seed, independent substreams by jumping."""
from __future__ import annotations

import numpy as np


def generator(seed: int, stream: int = 0) -> np.random.Generator:
    bg = np.random.Philox(key=int(seed))
    if stream:
        bg = bg.jumped(stream)
    return np.random.Generator(bg)
