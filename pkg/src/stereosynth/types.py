"""Core raster types shared by every stage of the pipeline.

All types are immutable after construction: the wrapped numpy arrays are
copied on the way in and marked read-only, so instances can be shared
freely across threads.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ImagePlane",
    "RelativeDepthMap",
    "DisparityMap",
    "MaskPlane",
    "ScaleConfig",
]


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, copy=True)
    out.flags.writeable = False
    return out


def _check_2d(arr: np.ndarray, what: str) -> None:
    if arr.ndim != 2:
        raise ValueError(f"{what} must be a 2-D plane, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{what} must be at least 1x1, got shape {arr.shape}")


@dataclass(frozen=True)
class ImagePlane:
    """An HxWx3 color raster with 8-bit channels."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValueError(f"image data must have shape (H, W, 3), got {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("image must be at least 1x1")
        if arr.dtype != np.uint8:
            raise ValueError(f"image data must be uint8, got {arr.dtype}")
        object.__setattr__(self, "data", _frozen(arr))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return 3

    @classmethod
    def from_gray(cls, gray: np.ndarray) -> "ImagePlane":
        """Promote a single-channel 8-bit plane to three identical channels."""
        gray = np.asarray(gray)
        _check_2d(gray, "gray plane")
        if gray.dtype != np.uint8:
            raise ValueError(f"gray plane must be uint8, got {gray.dtype}")
        return cls(np.repeat(gray[:, :, None], 3, axis=2))


@dataclass(frozen=True)
class RelativeDepthMap:
    """A relative disparity plane normalized to [0, 1] (larger = nearer).

    The constructor rescales the input by its min/max, so callers may pass
    raw monocular-model output; a constant input maps to all zeros.
    """

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        _check_2d(vals, "depth map")
        if not np.all(np.isfinite(vals)):
            raise ValueError("depth map contains non-finite values")
        lo = float(vals.min())
        hi = float(vals.max())
        if hi > lo:
            vals = (vals - lo) / (hi - lo)
        else:
            vals = np.zeros_like(vals)
        object.__setattr__(self, "values", _frozen(vals))

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    def inverted(self) -> "RelativeDepthMap":
        """Flip orientation (v <- 1 - v) for maps supplied as depth-like."""
        return RelativeDepthMap(1.0 - self.values)


@dataclass(frozen=True)
class DisparityMap:
    """Pixel-unit disparities with a per-pixel validity mask.

    Invalid pixels always carry value 0; valid pixels are non-negative.
    """

    values: np.ndarray
    valid: np.ndarray = None  # type: ignore[assignment]

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        _check_2d(vals, "disparity map")
        if self.valid is None:
            valid = np.ones(vals.shape, dtype=bool)
        else:
            valid = np.asarray(self.valid, dtype=bool)
        if valid.shape != vals.shape:
            raise ValueError(
                f"validity mask shape {valid.shape} does not match values shape {vals.shape}"
            )
        if not np.all(np.isfinite(vals[valid])):
            raise ValueError("disparity map contains non-finite valid values")
        if np.any(vals[valid] < 0):
            raise ValueError("valid disparities must be non-negative")
        vals = np.where(valid, vals, 0.0)
        object.__setattr__(self, "values", _frozen(vals))
        object.__setattr__(self, "valid", _frozen(valid))

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def valid_count(self) -> int:
        return int(self.valid.sum())


@dataclass(frozen=True)
class MaskPlane:
    """A binary HxW plane (hole masks, edge masks, inpaint masks)."""

    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=bool)
        _check_2d(bits, "mask")
        object.__setattr__(self, "bits", _frozen(bits))

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def count(self) -> int:
        return int(self.bits.sum())


@dataclass(frozen=True)
class ScaleConfig:
    """Range and seed for the random disparity scale factor.

    d_max must stay below the image width at use time; that check happens
    where the image dimensions are known.
    """

    d_min: float = 32.0
    d_max: float = 192.0
    rng_seed: int = 0

    def __post_init__(self):
        if not (0 < self.d_min <= self.d_max):
            raise ValueError(
                f"scale range must satisfy 0 < d_min <= d_max, got [{self.d_min}, {self.d_max}]"
            )
