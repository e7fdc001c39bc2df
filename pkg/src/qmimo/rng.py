"""Counter-based random numbers for reproducible parallel simulation.

Every simulation block gets its own Philox generator keyed by the pair
(master seed, block index), so draws never depend on execution order or on
how blocks are sharded across workers. Gaussian variates come from an
explicit Box-Muller transform of Philox uniforms: for uniforms u1, u2 in
[0, 1), radius = sqrt(-2 ln(1 - u1)) and angle = 2 pi u2 give the pair
(radius cos angle, radius sin angle); a circular complex normal uses the
same (radius, angle) as radius * exp(j angle) / sqrt(2).
"""

from __future__ import annotations

import numpy as np


def block_generator(seed: int, block_index: int) -> np.random.Generator:
    """Philox generator for one (seed, block) pair."""
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must fit in 64 bits, got {seed}")
    if block_index < 0:
        raise ValueError(f"block_index must be nonnegative, got {block_index}")
    return np.random.Generator(np.random.Philox(key=[seed, block_index]))


def normal(rng: np.random.Generator, shape) -> np.ndarray:
    """Standard normal draws via Box-Muller."""
    u1 = rng.random(shape)
    u2 = rng.random(shape)
    return np.sqrt(-2.0 * np.log1p(-u1)) * np.cos(2.0 * np.pi * u2)


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """Circularly symmetric complex normal with unit variance per sample."""
    u1 = rng.random(shape)
    u2 = rng.random(shape)
    radius = np.sqrt(-np.log1p(-u1))  # -2 ln u / 2 folded into the radius
    return radius * np.exp(2j * np.pi * u2)
