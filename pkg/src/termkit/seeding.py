"""Derivation of per-item random streams from a single global seed.

Streams are keyed by a stable text label (module name plus item id), so a
work item receives the same randomness no matter in which order, or on how
many threads, items are processed.
"""

from __future__ import annotations

import hashlib
import random


def derive_seed(seed: int, label: str) -> int:
    digest = hashlib.sha256(f"{seed}:{label}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def derive_rng(seed: int, label: str) -> random.Random:
    """A fresh RNG for the substream identified by (seed, label)."""
    return random.Random(derive_seed(seed, label))
