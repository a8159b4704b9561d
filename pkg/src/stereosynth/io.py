"""Readers and writers for the image and disparity file formats.

Formats:
  - 8-bit RGB or grayscale PNG / PPM for color views,
  - 16-bit single-channel PNG for sparse disparities (raw/256, 0 = invalid),
  - grayscale PFM ("Pf") for float maps, bottom-to-top rows, endianness
    given by the sign of the scale line,
  - 8-bit PNG masks (255 = set, 0 = clear).

Round-trips are bit-exact on the representable domain of each format.
"""
from __future__ import annotations

import os
from pathlib import Path

import numpy as np
from PIL import Image

from .types import DisparityMap, ImagePlane, MaskPlane, RelativeDepthMap

__all__ = [
    "read_image",
    "write_image",
    "read_disparity_kitti_png",
    "write_disparity_kitti_png",
    "read_pfm",
    "write_pfm",
    "read_pfm_disparity",
    "read_pfm_depth",
    "read_mask_png",
    "write_mask_png",
    "read_disparity_auto",
]

_16BIT_MODES = {"I;16", "I;16B", "I;16L", "I;16N", "I"}


def read_image(path: str | os.PathLike) -> ImagePlane:
    """Read an 8-bit RGB or grayscale PNG/PPM as a color plane.

    Grayscale input is promoted to three identical channels.
    """
    with Image.open(path) as im:
        if im.mode in _16BIT_MODES:
            raise ValueError(f"{path}: unsupported bit depth for image plane")
        if im.mode == "L":
            arr = np.asarray(im)
            if arr.size == 0:
                raise ValueError(f"{path}: zero-size image")
            return ImagePlane.from_gray(arr)
        if im.mode == "RGB":
            arr = np.asarray(im)
            if arr.size == 0:
                raise ValueError(f"{path}: zero-size image")
            return ImagePlane(arr)
        raise ValueError(f"{path}: unsupported image mode {im.mode!r} (need 8-bit RGB or gray)")


def write_image(img: ImagePlane, path: str | os.PathLike) -> None:
    """Write a color plane as PNG or PPM (P6), chosen by file extension."""
    ext = Path(path).suffix.lower()
    if ext not in (".png", ".ppm"):
        raise ValueError(f"{path}: unsupported image extension {ext!r} (use .png or .ppm)")
    Image.fromarray(img.data).save(path)


def read_disparity_kitti_png(path: str | os.PathLike) -> DisparityMap:
    """Read a 16-bit single-channel PNG as disparity = raw/256, raw 0 = invalid."""
    with Image.open(path) as im:
        if im.mode not in ("I;16", "I;16B"):
            if im.mode in ("L", "RGB", "P"):
                raise ValueError(f"{path}: expected 16-bit disparity PNG, got 8-bit {im.mode!r}")
            raise ValueError(f"{path}: expected single-channel 16-bit PNG, got mode {im.mode!r}")
        raw = np.asarray(im).astype(np.uint16)
    valid = raw != 0
    values = raw.astype(np.float64) / 256.0
    return DisparityMap(np.where(valid, values, 0.0), valid)


def write_disparity_kitti_png(d: DisparityMap, path: str | os.PathLike) -> None:
    """Write disparity as 16-bit PNG with raw = round(value*256), 0 for invalid."""
    scaled = np.floor(d.values * 256.0 + 0.5)
    if np.any(scaled[d.valid] > 65535):
        worst = float(d.values[d.valid].max())
        raise ValueError(f"disparity {worst} out of encodable range (must be < 256)")
    raw = np.where(d.valid, scaled, 0.0).astype(np.uint16)
    Image.fromarray(raw).save(path, format="PNG")


def read_pfm(path: str | os.PathLike) -> np.ndarray:
    """Read a grayscale PFM into an HxW float array (top-to-bottom rows)."""
    with open(path, "rb") as fh:
        header = fh.readline().strip()
        if header == b"PF":
            raise ValueError(f"{path}: expected grayscale PFM, got color header 'PF'")
        if header != b"Pf":
            raise ValueError(f"{path}: malformed PFM header {header!r}")
        dims = fh.readline().split()
        if len(dims) != 2:
            raise ValueError(f"{path}: malformed PFM dimension line")
        width, height = int(dims[0]), int(dims[1])
        if width < 1 or height < 1:
            raise ValueError(f"{path}: invalid PFM dimensions {width}x{height}")
        try:
            scale = float(fh.readline().strip())
        except ValueError as exc:
            raise ValueError(f"{path}: malformed PFM scale line") from exc
        endian = "<" if scale < 0 else ">"
        data = np.frombuffer(fh.read(4 * width * height), dtype=endian + "f4")
    if data.size != width * height:
        raise ValueError(f"{path}: truncated PFM payload")
    if np.any(np.isnan(data)):
        raise ValueError(f"{path}: PFM contains NaN values")
    # PFM stores rows bottom-to-top.
    return np.flipud(data.reshape(height, width)).astype(np.float64)


def write_pfm(data, path: str | os.PathLike) -> None:
    """Write a float map as little-endian grayscale PFM.

    Accepts a DisparityMap, a RelativeDepthMap, or a bare 2-D array.
    """
    if isinstance(data, DisparityMap):
        arr = data.values
    elif isinstance(data, RelativeDepthMap):
        arr = data.values
    else:
        arr = np.asarray(data, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"PFM payload must be 2-D, got shape {arr.shape}")
    if np.any(np.isnan(arr)):
        raise ValueError("refusing to write NaN values to PFM")
    height, width = arr.shape
    with open(path, "wb") as fh:
        fh.write(b"Pf\n")
        fh.write(f"{width} {height}\n".encode("ascii"))
        fh.write(b"-1.0\n")
        fh.write(np.flipud(arr).astype("<f4").tobytes())


def read_pfm_disparity(path: str | os.PathLike) -> DisparityMap:
    """Read a PFM as a dense disparity map (every pixel valid)."""
    return DisparityMap(read_pfm(path))


def read_pfm_depth(path: str | os.PathLike) -> RelativeDepthMap:
    """Read a PFM as a relative depth map (normalized to [0, 1])."""
    return RelativeDepthMap(read_pfm(path))


def read_disparity_auto(path: str | os.PathLike) -> DisparityMap:
    """Read a disparity map by extension: .pfm float or .png KITTI 16-bit."""
    ext = Path(path).suffix.lower()
    if ext == ".pfm":
        return read_pfm_disparity(path)
    if ext == ".png":
        return read_disparity_kitti_png(path)
    raise ValueError(f"{path}: unsupported disparity format {ext!r}")


def read_mask_png(path: str | os.PathLike) -> MaskPlane:
    with Image.open(path) as im:
        if im.mode != "L":
            raise ValueError(f"{path}: mask PNG must be 8-bit grayscale, got {im.mode!r}")
        arr = np.asarray(im)
    return MaskPlane(arr != 0)


def write_mask_png(mask: MaskPlane, path: str | os.PathLike) -> None:
    """Write a mask as 8-bit PNG, 255 where set (the inpaint-this convention)."""
    Image.fromarray(np.where(mask.bits, 255, 0).astype(np.uint8)).save(path, format="PNG")
