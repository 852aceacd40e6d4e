"""Keyed random streams.

Every random draw in the package goes through :func:`stream`, which builds a
counter-based Philox generator keyed by ``(seed, stream index)``.  Two calls
with the same key produce the same numbers regardless of call order or of
how many worker threads are active.
"""

from __future__ import annotations

import numpy as np


def _key(index) -> tuple[int, ...]:
    key = (index,) if np.isscalar(index) else tuple(index)
    key = tuple(int(v) for v in key)
    if any(v < 0 for v in key):
        raise ValueError("stream indices must be non-negative")
    return key


def stream(seed: int, index=0) -> np.random.Generator:
    """Return the generator for stream ``index`` (an int or tuple of ints) under ``seed``."""
    if seed < 0:
        raise ValueError("seed must be non-negative")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=_key(index))
    return np.random.Generator(np.random.Philox(ss))
