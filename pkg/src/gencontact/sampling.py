"""Seeded sample points on a coordinate box."""
from __future__ import annotations

import numpy as np

DEFAULT_COUNT = 50
DEFAULT_SEED = 42
DEFAULT_BOX = (-1.0, 1.0)


def sample_points(dim: int, count: int = DEFAULT_COUNT, seed: int = DEFAULT_SEED,
                  low=DEFAULT_BOX[0], high=DEFAULT_BOX[1]) -> np.ndarray:
    """``count`` points uniform in the box ``[low, high]^dim`` (bounds may be per-axis)."""
    if dim < 1:
        raise ValueError("dim must be positive")
    if count < 1:
        raise ValueError("count must be positive")
    low = np.broadcast_to(np.asarray(low, float), (dim,))
    high = np.broadcast_to(np.asarray(high, float), (dim,))
    if np.any(high < low):
        raise ValueError("empty sampling box")
    rng = np.random.default_rng(seed)
    return low + (high - low) * rng.random((count, dim))


def default_points(dim: int) -> np.ndarray:
    return sample_points(dim)
