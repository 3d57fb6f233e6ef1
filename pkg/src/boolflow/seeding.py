"""Deterministic RNG streams.

All randomness in the package flows through PCG64 generators keyed by a user
seed plus an integer stream path, so identical inputs give identical outputs
regardless of execution order or worker count.
"""

from __future__ import annotations

import numpy as np

__all__ = ["derive_rng", "derive_seed_sequence"]


def derive_seed_sequence(seed: int, *stream: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=tuple(int(s) for s in stream))


def derive_rng(seed: int, *stream: int) -> np.random.Generator:
    """PCG64 generator for the (seed, stream...) path."""
    return np.random.Generator(np.random.PCG64(derive_seed_sequence(seed, *stream)))
