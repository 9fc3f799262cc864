"""Deterministic seed derivation.

Every source of randomness in the package is seeded from a single user
seed through `derive_seed`, so that a run is fully reproducible and the
per-member / per-tree streams are statistically independent of each other.
The mixer is the splitmix64 finalizer; the same constants are used by the
hash-keyed node randomness inside the kernels.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

# stream tags, so distinct pipeline stages never share a stream
STREAM_SPLIT = 11
STREAM_MODEL = 12
STREAM_MEMBER = 21
STREAM_DETECTOR = 22
STREAM_SUBSET = 23


def mix64(z: int) -> int:
    """splitmix64 finalizer on a 64-bit integer."""
    z = (z + _GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def derive_seed(base: int, *path: int) -> int:
    """Derive a child seed from `base` and an integer path.

    Deterministic, order-sensitive: derive_seed(s, a, b) != derive_seed(s, b, a).
    """
    z = base & _MASK
    for p in path:
        z = mix64(z ^ ((p & _MASK) * _GOLDEN & _MASK))
    return z


def rng_from(base: int, *path: int) -> np.random.Generator:
    """A numpy Generator seeded from the derived seed."""
    return np.random.default_rng(derive_seed(base, *path))
