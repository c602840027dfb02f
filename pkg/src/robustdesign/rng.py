"""Keyed, platform-stable random streams.

Streams are Philox counter-based generators keyed through a SeedSequence
built from an explicit integer tuple, so ``substream(seed, i, j)`` is well
defined and independent of draw interleaving elsewhere. Samplers in this
package consume only ``Generator.random()`` and map the uniforms through
deterministic transforms (inverse CDFs and affine maps), which keeps
replay stable across platforms and library versions.
"""

from __future__ import annotations

import numpy as np
from scipy import special

SeedLike = "int | tuple[int, ...] | None"


def seed_key(seed) -> tuple[int, ...]:
    """Normalize a seed (int, tuple of ints, or None) to a key tuple."""
    if seed is None:
        return (0,)
    if isinstance(seed, (int, np.integer)):
        return (int(seed),)
    return tuple(int(s) for s in seed)


def rng_from_seed(seed) -> np.random.Generator:
    key = seed_key(seed)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(list(key))))


def substream(seed, *index: int) -> np.random.Generator:
    """Generator for the substream of ``seed`` at the given index path."""
    return rng_from_seed(seed_key(seed) + tuple(int(i) for i in index))


def draw_uniform(rng: np.random.Generator, lo, hi, size=None) -> np.ndarray:
    return lo + (hi - lo) * rng.random(size)


def draw_beta(rng: np.random.Generator, a, b, size=None) -> np.ndarray:
    """Beta draws via the inverse regularized incomplete beta function."""
    return special.betaincinv(a, b, rng.random(size))


def draw_signs(rng: np.random.Generator, size=None) -> np.ndarray:
    return np.where(rng.random(size) < 0.5, -1.0, 1.0)


def draw_indices(rng: np.random.Generator, n: int, size=None) -> np.ndarray:
    """Uniform indices in range(n) from single uniform draws."""
    idx = (rng.random(size) * n).astype(np.int64)
    return np.minimum(idx, n - 1)
