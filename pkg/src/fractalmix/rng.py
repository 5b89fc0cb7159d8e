"""Counter-based random streams.

Every Monte-Carlo sample draws from its own Philox stream keyed by
(master seed, experiment tag, sample index).  Sample i therefore sees the
same randomness no matter how samples are batched or distributed over
workers, which makes every experiment bit-reproducible at any thread count.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def experiment_key(name: str) -> int:
    """Stable 64-bit tag for an experiment name."""
    digest = hashlib.blake2s(name.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def stream(seed: int, tag: int = 0, index: int = 0, aux: int = 0) -> np.random.Generator:
    """Generator for one (seed, tag, index, aux) stream.

    (seed, tag) fill the 128-bit Philox key; (index, aux) select the upper
    counter words, so each sample owns a disjoint 2^128-block counter range.
    """
    key = (seed & _MASK64) | ((tag & _MASK64) << 64)
    counter = ((index & _MASK64) | ((aux & _MASK64) << 64)) << 128
    return np.random.Generator(np.random.Philox(key=key, counter=counter))
