"""Seeded random streams.

All randomness goes through PCG64 generators keyed by a ``SeedSequence``
built from a 64-bit seed plus optional integer keys. Keys split one seed
into independent sub-streams (one per ensemble member, shot batch, ...),
and PCG64 output is identical across platforms for a given key.
"""
from __future__ import annotations

import numpy as np

from .errors import DomainError

SEED_MAX = 2**64 - 1


def check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed <= SEED_MAX:
        raise DomainError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def generator(seed: int, *keys: int) -> np.random.Generator:
    """Return the PCG64 generator for ``seed`` and the sub-stream ``keys``."""
    entropy = [check_seed(seed), *(int(k) for k in keys)]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))
