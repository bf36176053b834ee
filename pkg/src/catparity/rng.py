"""Deterministic random-stream derivation.

One 64-bit master seed drives a whole ensemble.  Trajectory ``i`` draws from
its own ``numpy`` PCG64 generator seeded with the ``i``-th output of a
splitmix64 sequence started at the master seed:

    seed_i = mix64(master + (i + 1) * GOLDEN)   (mod 2**64)

where ``mix64`` is the splitmix64 finalizer (two xor-shift-multiply rounds).
Because each trajectory owns an independent stream addressed only by its
index, results are identical no matter how trajectories are batched or how
many workers run them.
"""

from __future__ import annotations

import numpy as np

__all__ = ["mix64", "stream_seed", "trajectory_rng"]

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(x: int) -> int:
    """splitmix64 finalizer: avalanche a 64-bit value."""
    x &= _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return x ^ (x >> 31)


def stream_seed(master_seed: int, index: int) -> int:
    """64-bit seed for sub-stream ``index`` of ``master_seed``."""
    if index < 0:
        raise ValueError(f"stream index must be >= 0, got {index}")
    return mix64((int(master_seed) + (index + 1) * _GOLDEN) & _MASK)


def trajectory_rng(master_seed: int, index: int) -> np.random.Generator:
    """Generator owning trajectory ``index`` of the ensemble ``master_seed``."""
    return np.random.Generator(np.random.PCG64(stream_seed(master_seed, index)))
