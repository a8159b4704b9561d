"""Counter-based random number helpers.

Batch jobs derive every random quantity from (seed, counter) pairs so that
results are reproducible and independent of processing order.
"""
from __future__ import annotations

import hashlib

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One splitmix64 mixing step; maps any 64-bit input to a well-mixed output."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def keyed_uniform01(seed: int, index: int) -> float:
    """Deterministic uniform draw in [0, 1) keyed by (seed, index).

    Distinct indices give independent-looking values; no sequential state.
    """
    if index < 0:
        raise ValueError("draw index must be non-negative")
    bits = splitmix64(splitmix64(seed & _MASK64) ^ (index & _MASK64))
    return (bits >> 11) / float(1 << 53)


def derive_seed(seed: int, *labels: object) -> int:
    """Derive a stable 64-bit sub-seed from a base seed and labels.

    Uses SHA-256 over the textual key, so the result does not depend on the
    platform, process, or insertion order of sibling records.
    """
    key = ":".join([str(seed & _MASK64)] + [str(lbl) for lbl in labels])
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")
