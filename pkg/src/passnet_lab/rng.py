"""Seed derivation and RNG construction.

All randomness flows through ``numpy.random.Generator`` seeded from a
single 64-bit master seed. Worker-level seeds are derived by hashing
``(master, *parts)`` so parallel schedules cannot change results.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(master: int, *parts: object) -> int:
    """Derive a stable 64-bit child seed from a master seed and context parts."""
    token = repr((int(master),) + tuple(parts)).encode("utf-8")
    digest = hashlib.sha256(token).digest()
    return int.from_bytes(digest[:8], "little")


def make_rng(seed: int, *parts: object) -> np.random.Generator:
    """Generator seeded from ``seed`` (optionally derived with ``parts``)."""
    if parts:
        seed = derive_seed(seed, *parts)
    return np.random.Generator(np.random.PCG64(int(seed) & (2**64 - 1)))
