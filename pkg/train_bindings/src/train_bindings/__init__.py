"""Thin array-boundary bindings for training loops.

Every function here takes and returns contiguous numpy buffers with the
same shape conventions as the stereosynth types ((H, W, 3) uint8 images,
(H, W) float64 value planes, (H, W) bool masks) and delegates to the
stereosynth kernels in-process, so results are bit-identical to the
library and its CLI. Inputs are validated, never copied into new layouts:
a wrong dtype or a non-contiguous view is an error, not a silent copy.

The loss binding writes its gradient into a caller-provided buffer so a
training loop can reuse one allocation across steps.
"""
from __future__ import annotations

import numpy as np

from stereosynth.distill import DistillConfig, combined_loss
from stereosynth.edge_aware import EdgeConfig, warp_with_ea
from stereosynth.metrics import disparity_errors, warp_consistency
from stereosynth.types import DisparityMap, ImagePlane
from stereosynth.warp import warp_left_to_right

__all__ = [
    "bound_warp_left_to_right",
    "bound_warp_with_ea",
    "bound_combined_loss",
    "bound_disparity_errors",
    "bound_warp_consistency",
]


def _check(arr: np.ndarray, dtype, ndim: int, name: str) -> np.ndarray:
    if not isinstance(arr, np.ndarray):
        raise TypeError(f"{name} must be a numpy array, got {type(arr).__name__}")
    if arr.dtype != np.dtype(dtype):
        raise ValueError(f"{name} must have dtype {np.dtype(dtype)}, got {arr.dtype}")
    if arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-D, got shape {arr.shape}")
    if not arr.flags.c_contiguous:
        raise ValueError(f"{name} must be C-contiguous")
    return arr


def _image(arr: np.ndarray, name: str) -> ImagePlane:
    _check(arr, np.uint8, 3, name)
    if arr.shape[2] != 3:
        raise ValueError(f"{name} must have 3 channels, got {arr.shape[2]}")
    return ImagePlane(arr)


def _disparity(values: np.ndarray, valid: np.ndarray | None, name: str) -> DisparityMap:
    _check(values, np.float64, 2, name)
    if valid is None:
        return DisparityMap(values)
    _check(valid, np.bool_, 2, f"{name} validity mask")
    if valid.shape != values.shape:
        raise ValueError(f"{name} validity mask shape {valid.shape} != values shape {values.shape}")
    return DisparityMap(values, valid)


def bound_warp_left_to_right(left: np.ndarray, disp: np.ndarray, valid: np.ndarray | None = None):
    """Forward warp; returns (right (H,W,3) u8, hole (H,W) bool,
    zvalues (H,W) f64, zvalid (H,W) bool)."""
    res = warp_left_to_right(_image(left, "left"), _disparity(disp, valid, "disp"))
    return (
        np.array(res.right_image.data),
        np.array(res.hole_mask.bits),
        np.array(res.zbuffer.values),
        np.array(res.zbuffer.valid),
    )


def bound_warp_with_ea(
    left: np.ndarray, disp: np.ndarray, tau: float = 3.0, strip_width: int = 2
):
    """Edge-aware warp; returns (right, inpaint_mask, zvalues, zvalid, edge_mask)."""
    res, plan = warp_with_ea(
        _image(left, "left"),
        _disparity(disp, None, "disp"),
        EdgeConfig(tau=tau, strip_width=strip_width),
    )
    return (
        np.array(res.right_image.data),
        np.array(plan.inpaint_mask.bits),
        np.array(res.zbuffer.values),
        np.array(res.zbuffer.valid),
        np.array(plan.edge_mask.bits),
    )


def bound_combined_loss(
    pred: np.ndarray,
    gt: np.ndarray,
    gt_valid: np.ndarray,
    mono: np.ndarray,
    grad_out: np.ndarray,
    *,
    alpha: float = 1.0,
    sample_count: int = 4096,
    seed: int = 0,
    epsilon: float = 1e-6,
    variant: str = "kl",
) -> tuple[float, float, float]:
    """Combined sparse + distill loss.

    Writes d(total)/d(pred) into grad_out (float64, same shape as pred) and
    returns (total, sparse_term, distill_term), bit-identical to
    stereosynth.combined_loss on the same inputs and seed.
    """
    pred_map = _disparity(pred, None, "pred")
    gt_map = _disparity(gt, gt_valid, "gt")
    mono_map = _disparity(mono, None, "mono")
    _check(grad_out, np.float64, 2, "grad_out")
    if grad_out.shape != pred.shape:
        raise ValueError(f"grad_out shape {grad_out.shape} != pred shape {pred.shape}")
    if not grad_out.flags.writeable:
        raise ValueError("grad_out must be writeable")
    cfg = DistillConfig(
        alpha=alpha, sample_count=sample_count, rng_seed=seed, epsilon=epsilon, variant=variant
    )
    report = combined_loss(pred_map, gt_map, mono_map, cfg)
    np.copyto(grad_out, report.grad_wrt_prediction)
    return report.total, report.sparse_term, report.distill_term


def bound_disparity_errors(
    pred: np.ndarray, gt: np.ndarray, gt_valid: np.ndarray
) -> tuple[float, float, float, int]:
    """(epe, d1, >2px, valid_count) over GT-valid pixels."""
    return disparity_errors(_disparity(pred, None, "pred"), _disparity(gt, gt_valid, "gt"))


def bound_warp_consistency(
    left: np.ndarray, right: np.ndarray, pred: np.ndarray
) -> tuple[float, float | None, int]:
    """(psnr, ssim, evaluated_pixel_count) of the prediction-warped left
    view against the real right view."""
    return warp_consistency(
        _image(left, "left"), _image(right, "right"), _disparity(pred, None, "pred")
    )
