"""Named, splittable deterministic randomness.

Every consumer derives its own stream from the run seed and a name, so
adding a new consumer never shifts the numbers another one sees.
"""

from __future__ import annotations

import hashlib
import random

SEED_BITS = 64


def derive_seed(seed: int, *names: str) -> int:
    text = f"{seed}/" + "/".join(names)
    digest = hashlib.sha256(text.encode()).digest()
    return int.from_bytes(digest[:8], "little")


def named_rng(seed: int, *names: str) -> random.Random:
    return random.Random(derive_seed(seed, *names))
