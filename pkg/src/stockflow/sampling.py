"""Seeded random sampling helpers used by the simulation engine.

Every stochastic primitive in a model owns an independent generator derived
from one root seed and the primitive's id, so adding or removing unrelated
primitives never perturbs the draw sequence of existing ones.
"""

from __future__ import annotations

import hashlib
from typing import Iterable

import numpy as np


def _key_hash(key: str) -> int:
    # blake2b rather than hash(): stable across processes and interpreter runs.
    return int.from_bytes(hashlib.blake2b(key.encode("utf-8"), digest_size=8).digest(), "big")


def stream_for(seed: int, key: str) -> np.random.Generator:
    """Return the generator owned by the primitive named ``key`` under ``seed``."""
    if not 0 <= int(seed) < 2**64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    ss = np.random.SeedSequence(entropy=(int(seed), _key_hash(key)))
    return np.random.Generator(np.random.PCG64(ss))


def split_streams(seed: int, keys: Iterable[str]) -> dict[str, np.random.Generator]:
    """Derive one independent generator per key from a single root seed."""
    return {key: stream_for(seed, key) for key in keys}


def sample_poisson(rng: np.random.Generator, mean: float) -> int:
    """One Poisson draw; ``mean`` = 0 always yields 0."""
    if not np.isfinite(mean) or mean < 0:
        raise ValueError(f"Poisson mean must be finite and >= 0, got {mean!r}")
    if mean == 0:
        return 0
    return int(rng.poisson(mean))


def sample_truncated_normal(
    rng: np.random.Generator, mu: float, sigma: float, lo: float, hi: float
) -> float:
    """Draw from N(mu, sigma) clipped into [lo, hi].

    Clipping (not rejection sampling) keeps the draw count per call fixed at
    one, so generator streams stay aligned across scenarios that only differ
    in parameter values. With sigma = 0 the result is clamp(mu, lo, hi).
    """
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma!r}")
    if lo > hi:
        raise ValueError(f"bad bounds: lo={lo!r} > hi={hi!r}")
    draw = mu + sigma * rng.standard_normal()
    return float(min(max(draw, lo), hi))
