"""Forward warping of the left view into the right view.

Each source pixel (x, y) splats to (round_half_up(x - d(x, y)), y). Targets
outside [0, width) are dropped. When several sources land on one target the
one with the larger disparity wins (nearer surface occludes); ties keep the
smaller source x so the result is independent of iteration order. Targets
no source reaches are holes; they carry black as a placeholder color and
are authoritative only through the hole mask.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .types import DisparityMap, ImagePlane, MaskPlane

__all__ = ["SplatCounts", "WarpResult", "warp_left_to_right", "warp_right_from_prediction"]


@dataclass(frozen=True)
class SplatCounts:
    """Per-warp accounting: every source pixel falls in exactly one bucket."""

    placed: int
    dropped_off_frame: int
    lost_collisions: int
    skipped_invalid: int = 0

    @property
    def total(self) -> int:
        return self.placed + self.dropped_off_frame + self.lost_collisions + self.skipped_invalid


@dataclass(frozen=True)
class WarpResult:
    right_image: ImagePlane
    hole_mask: MaskPlane  # true = no source pixel landed here
    zbuffer: DisparityMap  # winning disparity per covered target
    counts: SplatCounts


def _round_half_up(x: np.ndarray) -> np.ndarray:
    return np.floor(x + 0.5).astype(np.int64)


def _resolve_splats(
    src_y: np.ndarray,
    src_x: np.ndarray,
    tgt_x: np.ndarray,
    disp: np.ndarray,
    width: int,
) -> np.ndarray:
    """Indices of collision winners among candidate splats.

    Order-free rule: per (row, target), max disparity wins, ties broken by
    smaller source x.
    """
    # lexsort orders by the last key first: row, then target, then
    # descending disparity, then ascending source x.
    order = np.lexsort((src_x, -disp, tgt_x, src_y))
    flat = src_y[order] * np.int64(width) + tgt_x[order]
    first = np.empty(len(order), dtype=bool)
    first[:1] = True
    first[1:] = flat[1:] != flat[:-1]
    return order[first]


def warp_left_to_right(left: ImagePlane, disp: DisparityMap) -> WarpResult:
    """Forward-warp the left view by its disparity map."""
    if (left.height, left.width) != (disp.height, disp.width):
        raise ValueError(
            f"image {left.height}x{left.width} and disparity {disp.height}x{disp.width} "
            "dimensions do not match"
        )
    h, w = disp.height, disp.width
    xs = np.broadcast_to(np.arange(w, dtype=np.int64), (h, w))
    ys = np.broadcast_to(np.arange(h, dtype=np.int64)[:, None], (h, w))
    tx = _round_half_up(xs - disp.values)

    candidate = disp.valid & (tx >= 0) & (tx < w)
    src_y = ys[candidate]
    src_x = xs[candidate]
    tgt_x = tx[candidate]
    dvals = disp.values[candidate]

    winners = _resolve_splats(src_y, src_x, tgt_x, dvals, w)

    right = np.zeros((h, w, 3), dtype=np.uint8)
    zvals = np.zeros((h, w), dtype=np.float64)
    covered = np.zeros((h, w), dtype=bool)
    wy, wx, wt = src_y[winners], src_x[winners], tgt_x[winners]
    right[wy, wt] = left.data[wy, wx]
    zvals[wy, wt] = dvals[winners]
    covered[wy, wt] = True

    skipped = int((~disp.valid).sum())
    placed = int(len(winners))
    lost = int(candidate.sum()) - placed
    dropped = h * w - skipped - placed - lost
    counts = SplatCounts(placed, dropped, lost, skipped)

    return WarpResult(
        right_image=ImagePlane(right),
        hole_mask=MaskPlane(~covered),
        zbuffer=DisparityMap(zvals, covered),
        counts=counts,
    )


def warp_right_from_prediction(left: ImagePlane, pred: DisparityMap) -> WarpResult:
    """Warp the left image by a predicted disparity (evaluation path)."""
    return warp_left_to_right(left, pred)
