"""Deterministic seed derivation.

Every random stream in the package is keyed by a 64-bit integer. Sub-streams
(one per noise realization, one per sweep cell) are derived from a master
seed and a tuple of indices with a stable hash, so results never depend on
scheduling or worker count.
"""
from __future__ import annotations

import hashlib
import struct

import numpy as np

_MASK64 = (1 << 64) - 1


def derive_seed(master_seed: int, *indices: int) -> int:
    """Stable 64-bit hash of ``(master_seed, *indices)``."""
    payload = struct.pack(f"<{1 + len(indices)}Q", master_seed & _MASK64, *(i & _MASK64 for i in indices))
    digest = hashlib.blake2b(payload, digest_size=8, person=b"wsnoise-seed").digest()
    return int.from_bytes(digest, "little")


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed & _MASK64))
