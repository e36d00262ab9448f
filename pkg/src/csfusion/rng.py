"""Derived random streams.

Every stochastic operation draws from a generator derived from
``(seed, *key)`` so results are independent of iteration order and
reproducible per item. Sides are keyed as Mandarin=0, English=1.
"""

from __future__ import annotations

import numpy as np

_U64 = (1 << 64) - 1

SIDE_MANDARIN = 0
SIDE_ENGLISH = 1


def derive_rng(seed: int, *key: int) -> np.random.Generator:
    """Generator for the stream identified by (seed, *key)."""
    ss = np.random.SeedSequence(entropy=seed & _U64, spawn_key=tuple(k & _U64 for k in key))
    return np.random.default_rng(ss)
