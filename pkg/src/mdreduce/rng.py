"""Seeded random streams. Every random draw in the package comes from here."""

from __future__ import annotations

import hashlib

import numpy as np


def derive_rng(seed: int, stream_label: str) -> np.random.Generator:
    """Independent, reproducible stream for (seed, label).

    The Philox counter-based generator is keyed with a BLAKE2b digest of the
    64-bit seed and the label, so streams never share state and the same
    pair always gives the same sequence on any platform.
    """
    s = int(seed) & 0xFFFF_FFFF_FFFF_FFFF
    digest = hashlib.blake2b(
        s.to_bytes(8, "little") + stream_label.encode("utf-8"), digest_size=16
    ).digest()
    key = np.frombuffer(digest, dtype="<u8").astype(np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
