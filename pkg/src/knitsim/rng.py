"""Seeded counter-based random streams.

Every stochastic component derives its generator from a single 64-bit seed
plus a tuple of string/int labels (module name, tree path, shot block, ...).
Philox is counter-based, so substreams are independent and the overall run
is deterministic regardless of evaluation order.
"""

from __future__ import annotations

import hashlib

import numpy as np


def substream(seed: int, *labels) -> np.random.Generator:
    """Independent generator keyed by (seed, labels)."""
    h = hashlib.blake2b(digest_size=16)
    h.update(int(seed).to_bytes(8, "little", signed=False))
    for label in labels:
        h.update(repr(label).encode())
        h.update(b"\x00")
    key = int.from_bytes(h.digest(), "little")
    return np.random.Generator(np.random.Philox(key=key))
