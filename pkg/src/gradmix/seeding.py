"""Named random sub-streams derived from a single experiment seed.

Every random choice in a run (clustering init, model init, batch sampling,
silhouette subsampling) draws from its own labeled stream so that changing
one stage's consumption never perturbs another stage.
"""

from __future__ import annotations

import zlib

import numpy as np


def substream_seed(seed: int, label: str) -> int:
    """Derive a stable integer seed for the given stream label."""
    if seed < 0:
        raise ValueError("seed must be non-negative")
    entropy = [int(seed), zlib.crc32(label.encode("utf-8"))]
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])


def substream(seed: int, label: str) -> np.random.Generator:
    """Generator for the given stream label."""
    return np.random.default_rng(substream_seed(seed, label))
