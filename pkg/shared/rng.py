"""Deterministic random-stream plumbing.

Every stream is a PCG64 ``numpy.random.Generator`` seeded from a
``SeedSequence`` whose spawn key is the stream id tuple.  Identical
``(seed, stream ids)`` give identical draws on every platform; distinct
ids give independent streams.
"""

from __future__ import annotations

from enum import IntEnum

import numpy as np

SEED_MAX = 2**64 - 1


class StreamPurpose(IntEnum):
    """Last-but-one component of a stream key, one per consumer of randomness."""

    TRAIN_ARRIVALS = 0
    EVAL_ARRIVALS = 1
    AGENTS = 2
    INSTANCES = 3


def seeded_rng(seed: int, stream_id: int, *substreams: int) -> np.random.Generator:
    """Return the random source for ``(seed, stream_id, *substreams)``."""
    if not 0 <= seed <= SEED_MAX:
        raise ValueError(f"seed must fit in 64 unsigned bits, got {seed}")
    key = (int(stream_id), *(int(s) for s in substreams))
    if any(k < 0 for k in key):
        raise ValueError(f"stream ids must be non-negative, got {key}")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))
