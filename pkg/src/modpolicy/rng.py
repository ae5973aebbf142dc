"""Named, independent RNG substreams derived from one master seed.

Every consumer of randomness (init, noise, shuffling, each eval episode)
gets its own stream keyed by a string, so reordering one consumer never
perturbs the draws of another.
"""

from __future__ import annotations

import hashlib

import numpy as np


def substream(master_seed: int, name: str) -> np.random.Generator:
    """Generator for the (master_seed, name) stream; stable across platforms."""
    digest = hashlib.sha256(f"{master_seed}:{name}".encode("utf-8")).digest()
    seed_words = [int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4)]
    return np.random.Generator(np.random.PCG64(seed_words))
