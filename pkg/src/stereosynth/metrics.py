"""Disparity error metrics and warp-consistency image metrics.

Disparity errors follow the usual benchmark conventions: EPE is the mean
absolute error over valid GT pixels, >2px the percentage of errors above 2,
and D1 the percentage above both 3 px and 5% of the GT value.

Warp consistency scores a predicted disparity without GT: the left image is
forward-warped by the prediction and compared against the real right image
with PSNR/SSIM, holes excluded (SSIM windows touching a hole are skipped).
A better disparity lines warped pixels up with the true right view and
scores higher.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

from .types import DisparityMap, ImagePlane, MaskPlane
from .warp import warp_right_from_prediction

__all__ = ["MetricsReport", "disparity_errors", "psnr", "ssim", "warp_consistency"]

_SSIM_WINDOW = 11
_SSIM_SIGMA = 1.5
_C1 = (0.01 * 255.0) ** 2
_C2 = (0.03 * 255.0) ** 2


@dataclass(frozen=True)
class MetricsReport:
    epe: float
    d1: float
    gt2px: float
    valid_count: int
    psnr: float | None = None
    ssim: float | None = None
    evaluated_pixel_count: int | None = None

    def to_dict(self) -> dict:
        out = {
            "epe": self.epe,
            "d1": self.d1,
            "gt2px": self.gt2px,
            "valid_count": self.valid_count,
        }
        if self.psnr is not None:
            out["psnr"] = "inf" if math.isinf(self.psnr) else self.psnr
        if self.ssim is not None:
            out["ssim"] = self.ssim
        if self.evaluated_pixel_count is not None:
            out["evaluated_pixel_count"] = self.evaluated_pixel_count
        return out


def disparity_errors(pred: DisparityMap, gt: DisparityMap) -> tuple[float, float, float, int]:
    """Return (epe, d1, >2px, valid_count) over GT-valid pixels."""
    if pred.values.shape != gt.values.shape:
        raise ValueError(
            f"prediction {pred.values.shape} and GT {gt.values.shape} shapes do not match"
        )
    valid = gt.valid
    n = int(valid.sum())
    if n == 0:
        raise ValueError("disparity metrics need at least one valid GT pixel")
    err = np.abs(pred.values[valid] - gt.values[valid])
    epe = float(err.mean())
    gt2px = 100.0 * float((err > 2.0).mean())
    d1 = 100.0 * float(((err > 3.0) & (err > 0.05 * gt.values[valid])).mean())
    return epe, d1, gt2px, n


def _luma(img: ImagePlane) -> np.ndarray:
    rgb = img.data.astype(np.float64)
    return 0.299 * rgb[:, :, 0] + 0.587 * rgb[:, :, 1] + 0.114 * rgb[:, :, 2]


def psnr(a: ImagePlane, b: ImagePlane, include: MaskPlane | None = None) -> float:
    """Peak signal-to-noise ratio in dB (peak 255); +inf for identical inputs."""
    if a.data.shape != b.data.shape:
        raise ValueError("psnr inputs must have identical dimensions")
    da = a.data.astype(np.float64)
    db = b.data.astype(np.float64)
    if include is not None:
        sel = include.bits
        if not sel.any():
            raise ValueError("psnr: no pixels selected for evaluation")
        da, db = da[sel], db[sel]
    mse = float(np.mean((da - db) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(255.0**2 / mse)


def _gaussian_kernel(window: int, sigma: float) -> np.ndarray:
    half = (window - 1) / 2.0
    x = np.arange(window, dtype=np.float64) - half
    k = np.exp(-(x**2) / (2.0 * sigma**2))
    return k / k.sum()


def _valid_filter(plane: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Separable correlation cropped to positions where the window fits."""
    r = len(kernel) // 2
    out = correlate1d(plane, kernel, axis=0, mode="constant")
    out = correlate1d(out, kernel, axis=1, mode="constant")
    return out[r:-r, r:-r] if r > 0 else out


def ssim(
    a: ImagePlane,
    b: ImagePlane,
    window: int = _SSIM_WINDOW,
    c1: float = _C1,
    c2: float = _C2,
    sigma: float = _SSIM_SIGMA,
    exclude: MaskPlane | None = None,
) -> float | None:
    """Mean local SSIM on luma with a Gaussian window.

    Windows containing any excluded pixel are skipped; returns None when no
    window qualifies. Raises if the images are smaller than the window.
    """
    if a.data.shape != b.data.shape:
        raise ValueError("ssim inputs must have identical dimensions")
    if a.height < window or a.width < window:
        raise ValueError(f"image {a.height}x{a.width} smaller than {window}x{window} ssim window")
    kernel = _gaussian_kernel(window, sigma)
    la, lb = _luma(a), _luma(b)

    mu_a = _valid_filter(la, kernel)
    mu_b = _valid_filter(lb, kernel)
    mu_aa = _valid_filter(la * la, kernel)
    mu_bb = _valid_filter(lb * lb, kernel)
    mu_ab = _valid_filter(la * lb, kernel)
    var_a = mu_aa - mu_a * mu_a
    var_b = mu_bb - mu_b * mu_b
    cov = mu_ab - mu_a * mu_b

    ssim_map = ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) / (
        (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    )

    if exclude is not None:
        if exclude.bits.shape != la.shape:
            raise ValueError("exclusion mask dimensions do not match the images")
        box = np.ones(window, dtype=np.float64)
        touched = _valid_filter(exclude.bits.astype(np.float64), box)
        keep = touched < 0.5
        if not keep.any():
            return None
        return float(ssim_map[keep].mean())
    return float(ssim_map.mean())


def warp_consistency(
    left: ImagePlane,
    right: ImagePlane,
    pred: DisparityMap,
) -> tuple[float, float | None, int]:
    """PSNR/SSIM between the prediction-warped left image and the real right.

    Holes receive no score: PSNR runs over non-hole pixels, SSIM skips
    windows containing any hole. Returns (psnr, ssim, evaluated pixels);
    ssim is None when the frame is too small or no window is hole-free.
    """
    if (left.height, left.width) != (right.height, right.width):
        raise ValueError("left and right image dimensions do not match")
    warped = warp_right_from_prediction(left, pred)
    nonhole = MaskPlane(~warped.hole_mask.bits)
    if nonhole.count == 0:
        raise ValueError("warp consistency: all pixels are holes")
    psnr_value = psnr(warped.right_image, right, include=nonhole)
    if right.height >= _SSIM_WINDOW and right.width >= _SSIM_WINDOW:
        ssim_value = ssim(warped.right_image, right, exclude=warped.hole_mask)
    else:
        ssim_value = None
    return psnr_value, ssim_value, nonhole.count
