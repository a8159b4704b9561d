"""Edge-aware treatment of dis-occlusion holes.

With targets at x - d, a foreground object whose disparity drops by more
than tau going left-to-right opens a hole on its right side in the warped
view. To give an inpainting backend a truthful boundary hint, a thin strip
of background pixels just right of each such edge is co-warped with the
foreground disparity, landing adjacent to the warped edge inside the hole.
The final inpaint mask is the hole mask minus the preserved strip.

Strips never displace genuinely warped content: a strip splat claims a
target only if the plain warp left it as a hole. Strip-vs-strip collisions
follow the ordinary rule (larger borrowed disparity, then smaller source x).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .types import DisparityMap, ImagePlane, MaskPlane
from .warp import WarpResult, _resolve_splats, _round_half_up, warp_left_to_right

__all__ = ["EdgeConfig", "EAWarpPlan", "detect_edges", "plan_ea_warp", "warp_with_ea"]


@dataclass(frozen=True)
class EdgeConfig:
    """tau: disparity-gradient threshold; strip_width: preserved pixels per edge."""

    tau: float = 3.0
    strip_width: int = 2

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.strip_width < 1:
            raise ValueError(f"strip width must be >= 1, got {self.strip_width}")


@dataclass(frozen=True)
class EAWarpPlan:
    edge_mask: MaskPlane
    strip_sources: list = field(default_factory=list)  # [((x, y), borrowed disparity)]
    inpaint_mask: MaskPlane = None  # type: ignore[assignment]


def detect_edges(disp: DisparityMap, cfg: EdgeConfig) -> MaskPlane:
    """Mark pixels where disparity drops by more than tau toward the next column.

    Only foreground-on-left transitions are flagged; those are the ones that
    open holes. The last column is never an edge.
    """
    if not disp.valid.all():
        raise ValueError("edge detection requires a dense disparity map (no invalid pixels)")
    v = disp.values
    bits = np.zeros(v.shape, dtype=bool)
    bits[:, :-1] = (v[:, :-1] - v[:, 1:]) > cfg.tau
    return MaskPlane(bits)


def _schedule_strips(disp: DisparityMap, edge_bits: np.ndarray, width: int):
    """Assign each background pixel within strip_width right of an edge to
    its nearest edge on the left, borrowing that edge's disparity."""
    h, w = disp.values.shape
    assigned = np.zeros((h, w), dtype=bool)
    borrowed = np.zeros((h, w), dtype=np.float64)
    for k in range(1, width + 1):
        cand = np.zeros((h, w), dtype=bool)
        cand[:, k:] = edge_bits[:, :-k]
        newly = cand & ~assigned
        if newly.any():
            shifted = np.zeros((h, w), dtype=np.float64)
            shifted[:, k:] = disp.values[:, :-k]
            borrowed[newly] = shifted[newly]
        assigned |= cand
    return assigned, borrowed


def _ea_compute(left: ImagePlane, disp: DisparityMap, cfg: EdgeConfig):
    edge_mask = detect_edges(disp, cfg)
    plain = warp_left_to_right(left, disp)

    assigned, borrowed = _schedule_strips(disp, edge_mask.bits, cfg.strip_width)
    sy, sx = np.nonzero(assigned)
    bd = borrowed[sy, sx]
    strip_sources = [((int(x), int(y)), float(d)) for y, x, d in zip(sy, sx, bd)]

    h, w = disp.values.shape
    tx = _round_half_up(sx - bd)
    # A strip may only fill targets the plain warp left as holes.
    landing = (tx >= 0) & (tx < w) & plain.hole_mask.bits[sy, np.clip(tx, 0, w - 1)]
    ly, lx, lt, ld = sy[landing], sx[landing], tx[landing], bd[landing]
    winners = _resolve_splats(ly, lx, lt, ld, w)

    right = np.array(plain.right_image.data)
    zvals = np.array(plain.zbuffer.values)
    covered = np.array(plain.zbuffer.valid)
    wy, wx, wt = ly[winners], lx[winners], lt[winners]
    right[wy, wt] = left.data[wy, wx]
    zvals[wy, wt] = ld[winners]
    covered[wy, wt] = True

    inpaint_mask = MaskPlane(~covered)
    plan = EAWarpPlan(edge_mask=edge_mask, strip_sources=strip_sources, inpaint_mask=inpaint_mask)
    result = WarpResult(
        right_image=ImagePlane(right),
        hole_mask=inpaint_mask,
        zbuffer=DisparityMap(zvals, covered),
        counts=plain.counts,
    )
    return result, plan


def plan_ea_warp(left: ImagePlane, disp: DisparityMap, cfg: EdgeConfig) -> EAWarpPlan:
    """Compute the edge mask, the strip schedule, and the final inpaint mask."""
    _, plan = _ea_compute(left, disp, cfg)
    return plan


def warp_with_ea(left: ImagePlane, disp: DisparityMap, cfg: EdgeConfig):
    """Forward warp plus background-strip preservation.

    Returns (WarpResult, EAWarpPlan); the result's hole mask equals the
    plan's inpaint mask.
    """
    return _ea_compute(left, disp, cfg)
