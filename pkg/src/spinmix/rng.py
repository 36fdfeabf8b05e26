"""Counter-based random streams for reproducible, order-independent draws.

All randomness flows through Philox keyed by (seed, role, index...) so the
draw for a given object never depends on evaluation order or parallel
schedule.  Per-sample streams use disjoint counter blocks of 2^128 under a
single key.
"""

from __future__ import annotations

import numpy as np

__all__ = ["philox_key", "stream", "substream", "DISORDER", "UNIFORM", "LEVELSET", "BAND"]

# role tags keep streams for different purposes disjoint
DISORDER = 1
UNIFORM = 2
LEVELSET = 3
BAND = 4


def philox_key(seed: int, *tags: int) -> np.ndarray:
    """Derive a 128-bit Philox key from a seed and integer tags."""
    ss = np.random.SeedSequence((int(seed),) + tuple(int(t) for t in tags))
    return ss.generate_state(2, np.uint64)


def stream(seed: int, *tags: int) -> np.random.Generator:
    """Generator for the stream keyed by (seed, *tags)."""
    return np.random.Generator(np.random.Philox(key=philox_key(seed, *tags)))


def substream(key: np.ndarray, index: int) -> np.random.Generator:
    """Generator at counter block ``index`` of the stream with ``key``."""
    return np.random.Generator(np.random.Philox(key=key, counter=int(index) << 128))
