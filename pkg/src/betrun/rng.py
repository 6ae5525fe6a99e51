"""Splittable seeding.

Every random stream is addressed by ``(seed, *stream_ids)`` and backed by a
Philox counter-based generator, so the stream a worker sees never depends on
how many workers exist or in which order they run.
"""

from __future__ import annotations

import numpy as np


def _sequence(seed: int, stream: tuple[int, ...]) -> np.random.SeedSequence:
    return np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=tuple(int(s) for s in stream))


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(_sequence(seed, stream)))


def derive_seed(seed: int, *stream: int) -> int:
    """Return a 64-bit child seed for the given stream path."""
    hi, lo = _sequence(seed, stream).generate_state(2, dtype=np.uint32)
    return (int(hi) << 32) | int(lo)
