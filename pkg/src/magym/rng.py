"""Deterministic per-entity random substreams.

Every random draw in an episode comes from a substream derived by hashing the
episode seed together with a label path (e.g. ``("duration", task_id, "1")``).
Adding or removing one entity therefore never perturbs the samples drawn for
any other entity, and a substream can be re-derived independently from the
documented recipe: SHA-256 over ``"{seed}|{label}|{label}|..."``, first 8
digest bytes big-endian as the ``random.Random`` seed.
"""

from __future__ import annotations

import hashlib
import random


def substream_seed(seed: int, *labels: str) -> int:
    """Derive the 64-bit seed for the substream named by `labels`."""
    material = "|".join([str(seed), *labels])
    digest = hashlib.sha256(material.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def substream(seed: int, *labels: str) -> random.Random:
    """Return an independent generator for the substream named by `labels`."""
    return random.Random(substream_seed(seed, *labels))
