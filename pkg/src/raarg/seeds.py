"""Named sub-seed derivation.

Every random choice in the pipeline draws from a sub-seed derived from the
single global seed and a purpose label, so components stay independently
reproducible and adding a consumer never shifts another one's stream.
"""

from __future__ import annotations

import hashlib


def derive_seed(global_seed: int, name: str, extra: str = "") -> int:
    """Derive a 32-bit sub-seed from (global_seed, name, extra).

    Stable across runs and platforms; distinct names give independent
    streams with overwhelming probability.
    """
    blob = f"{global_seed}:{name}:{extra}".encode("utf-8")
    return int.from_bytes(hashlib.sha256(blob).digest()[:4], "big")
