"""Seeded random streams.

All randomness goes through :class:`numpy.random.Generator` backed by PCG64.
Independent streams are derived by spawning from a ``SeedSequence`` whose
entropy is the pair ``(seed, stream_index)``, so trial ``i`` of a run seeded
with ``s`` always sees the same numbers regardless of how many other trials
run, or in which order.
"""
from __future__ import annotations

import numpy as np

DEFAULT_SEED = 20050101


def make_rng(seed=None) -> np.random.Generator:
    """Return a generator; passes an existing ``Generator`` through."""
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None:
        seed = DEFAULT_SEED
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


def stream(seed: int, index: int) -> np.random.Generator:
    """Generator for stream ``index`` of master ``seed`` (entropy ``seed‖index``)."""
    ss = np.random.SeedSequence([int(seed) & (2**64 - 1), int(index)])
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(rng) -> int:
    """Draw a master seed from a generator (or accept an int as-is)."""
    if isinstance(rng, (int, np.integer)):
        return int(rng)
    return int(make_rng(rng).integers(0, 2**63))
