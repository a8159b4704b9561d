"""Randomized rescaling of relative depth into pixel-unit disparity.

The scale factor is drawn from U(d_min, d_max) with a counter-based
generator, so draw i of a batch is the same no matter how many other draws
happen or in what order.
"""
from __future__ import annotations

import numpy as np

from ._rng import keyed_uniform01
from .types import DisparityMap, RelativeDepthMap, ScaleConfig

__all__ = ["sample_scale", "scale_to_pixels"]


def sample_scale(cfg: ScaleConfig, draw_index: int) -> float:
    """Draw scale factor f in [d_min, d_max], deterministic per (seed, draw_index)."""
    u = keyed_uniform01(cfg.rng_seed, draw_index)
    return cfg.d_min + u * (cfg.d_max - cfg.d_min)


def scale_to_pixels(depth: RelativeDepthMap, f: float) -> DisparityMap:
    """Convert relative depth to pixel disparity by multiplying with f."""
    if not f > 0:
        raise ValueError(f"scale factor must be positive, got {f}")
    return DisparityMap(f * depth.values, np.ones(depth.values.shape, dtype=bool))
