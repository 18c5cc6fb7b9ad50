"""Deterministic derivation of child seeds from a master seed.

Every stochastic ingredient of a run (per-client Gaussian probes, descent
starting points, noise matrices, pairwise masks) draws its seed through
`derive_seed`, so a single master seed pins the whole experiment while
distinct roles and client ids get decorrelated streams.
"""

from __future__ import annotations

import hashlib

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15  # splitmix64 increment


def _mix64(z: int) -> int:
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def _as_int(part: int | str) -> int:
    if isinstance(part, str):
        digest = hashlib.sha256(part.encode("utf-8")).digest()
        return int.from_bytes(digest[:8], "little")
    return int(part) & _MASK64


def derive_seed(master: int, *parts: int | str) -> int:
    """Mix `master` and the given parts into a 64-bit seed (splitmix64 chain).

    Deterministic across processes and platforms; string parts are hashed
    with SHA-256 so role tags such as "phi" or "u0" are stable.
    """
    h = _mix64(_as_int(master) + _GAMMA)
    for part in parts:
        h = _mix64(h ^ _mix64(_as_int(part) + _GAMMA))
    return h
