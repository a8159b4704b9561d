"""Sparse-to-dense distillation loss with analytic gradients.

The total loss is

    total = sparse_term + alpha * distill_term

where the sparse term is a smooth-L1 over the valid ground-truth pixels and
the distill term matches the prediction against a dense relative-disparity
teacher on a random pixel sample. The headline distill variant normalizes
both value vectors over the sample into probability distributions (with a
small floor so every entry stays positive) and takes KL(pred || teacher);
normalization makes the term invariant to the teacher's unknown scale,
which is the whole reason a distribution loss fits relative depth. The l2
and grad variants exist as ablation baselines and are deliberately NOT
scale invariant.

Everything is computed in float64 and gradients are exact derivatives of
the returned scalars, suitable for finite-difference checking.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .types import DisparityMap, MaskPlane

__all__ = [
    "DistillConfig",
    "LossReport",
    "sparse_loss",
    "sample_pixels",
    "kl_distill_loss",
    "l2_distill_loss",
    "grad_distill_loss",
    "combined_loss",
]

VARIANTS = ("kl", "l2", "grad", "off")


@dataclass(frozen=True)
class DistillConfig:
    alpha: float = 1.0
    sample_count: int = 4096
    rng_seed: int = 0
    epsilon: float = 1e-6
    variant: str = "kl"

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if self.sample_count < 2:
            raise ValueError(f"sample count must be >= 2, got {self.sample_count}")
        if not (0 < self.epsilon < 1.0 / self.sample_count):
            raise ValueError(
                f"epsilon must lie in (0, 1/N) = (0, {1.0 / self.sample_count}), "
                f"got {self.epsilon}"
            )
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")


@dataclass(frozen=True)
class LossReport:
    total: float
    sparse_term: float
    distill_term: float
    grad_wrt_prediction: np.ndarray
    sampled_pixels: list
    config: DistillConfig

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "sparse_term": self.sparse_term,
            "distill_term": self.distill_term,
            "alpha": self.config.alpha,
            "sample_count": self.config.sample_count,
            "seed": self.config.rng_seed,
            "epsilon": self.config.epsilon,
            "variant": self.config.variant,
        }


def _check_same_shape(a: DisparityMap, b: DisparityMap, what: str) -> None:
    if a.values.shape != b.values.shape:
        raise ValueError(f"{what}: shapes {a.values.shape} and {b.values.shape} do not match")


def sparse_loss(pred: DisparityMap, gt: DisparityMap) -> tuple[float, np.ndarray]:
    """Smooth-L1 (Huber, delta=1) over valid GT pixels, mean-reduced.

    Returns (loss, dloss/dpred); the gradient is zero outside the GT-valid
    set.
    """
    _check_same_shape(pred, gt, "sparse loss")
    valid = gt.valid
    n = int(valid.sum())
    if n == 0:
        raise ValueError("sparse loss needs at least one valid ground-truth pixel")
    e = pred.values[valid] - gt.values[valid]
    quad = np.abs(e) <= 1.0
    per_pixel = np.where(quad, 0.5 * e * e, np.abs(e) - 0.5)
    grad = np.zeros(pred.values.shape, dtype=np.float64)
    grad[valid] = np.where(quad, e, np.sign(e)) / n
    return float(per_pixel.sum() / n), grad


def sample_pixels(eligible: MaskPlane, n: int, seed: int) -> list[tuple[int, int]]:
    """Draw n distinct (x, y) pixels uniformly from the eligible set."""
    ys, xs = np.nonzero(eligible.bits)
    count = len(ys)
    if count < n:
        raise ValueError(f"cannot sample {n} pixels from {count} eligible ones")
    rng = np.random.default_rng(seed)
    idx = rng.choice(count, size=n, replace=False)
    return [(int(xs[i]), int(ys[i])) for i in idx]


def _gather(m: DisparityMap, pixels, what: str) -> np.ndarray:
    xs = np.fromiter((p[0] for p in pixels), dtype=np.int64, count=len(pixels))
    ys = np.fromiter((p[1] for p in pixels), dtype=np.int64, count=len(pixels))
    h, w = m.values.shape
    if np.any((xs < 0) | (xs >= w) | (ys < 0) | (ys >= h)):
        raise ValueError(f"{what}: sampled pixel out of bounds")
    if not m.valid[ys, xs].all():
        raise ValueError(f"{what}: sampled pixel is invalid in the map")
    return m.values[ys, xs]


def _floored_distribution(v: np.ndarray, epsilon: float):
    """p_i = (v_i + eps*S/N) / (S*(1+eps)); sums to 1, every entry > 0."""
    s = float(v.sum())
    if s <= 0.0:
        raise ValueError("all-zero sample: cannot normalize into a distribution")
    n = len(v)
    p = (v + epsilon * s / n) / (s * (1.0 + epsilon))
    return p, s


def kl_distill_loss(
    pred: DisparityMap,
    mono: DisparityMap,
    pixels: list[tuple[int, int]],
    epsilon: float,
) -> tuple[float, np.ndarray]:
    """KL(P_pred || Q_mono) over the sampled pixels, with exact gradient.

    Both value vectors are sum-normalized with an epsilon floor, so the loss
    is invariant to a positive rescaling of either map.
    """
    _check_same_shape(pred, mono, "kl distill loss")
    n = len(pixels)
    if n < 2:
        raise ValueError("kl distill loss needs at least two sampled pixels")
    if not (0 < epsilon < 1.0 / n):
        raise ValueError(f"epsilon must lie in (0, 1/{n}), got {epsilon}")
    v = _gather(pred, pixels, "kl distill loss (prediction)")
    u = _gather(mono, pixels, "kl distill loss (teacher)")
    p, s_p = _floored_distribution(v, epsilon)
    q, _ = _floored_distribution(u, epsilon)

    log_ratio = np.log(p) - np.log(q)
    loss = float(np.dot(p, log_ratio))

    # d/dv_j of sum_i p_i*log(p_i/q_i), using sum_i dp_i/dv_j = 0:
    #   (log_ratio_j + (eps/N)*sum(log_ratio)) / (S*(1+eps)) - loss/S
    denom = s_p * (1.0 + epsilon)
    sample_grad = (log_ratio + (epsilon / n) * log_ratio.sum()) / denom - loss / s_p

    grad = np.zeros(pred.values.shape, dtype=np.float64)
    xs = np.fromiter((p_[0] for p_ in pixels), dtype=np.int64, count=n)
    ys = np.fromiter((p_[1] for p_ in pixels), dtype=np.int64, count=n)
    np.add.at(grad, (ys, xs), sample_grad)
    return loss, grad


def l2_distill_loss(
    pred: DisparityMap,
    mono: DisparityMap,
    pixels: list[tuple[int, int]],
) -> tuple[float, np.ndarray]:
    """Mean squared difference of raw values over the sample (not scale invariant)."""
    _check_same_shape(pred, mono, "l2 distill loss")
    n = len(pixels)
    if n < 1:
        raise ValueError("l2 distill loss needs at least one sampled pixel")
    v = _gather(pred, pixels, "l2 distill loss (prediction)")
    u = _gather(mono, pixels, "l2 distill loss (teacher)")
    diff = v - u
    loss = float(np.dot(diff, diff) / n)
    grad = np.zeros(pred.values.shape, dtype=np.float64)
    xs = np.fromiter((p[0] for p in pixels), dtype=np.int64, count=n)
    ys = np.fromiter((p[1] for p in pixels), dtype=np.int64, count=n)
    np.add.at(grad, (ys, xs), 2.0 * diff / n)
    return loss, grad


def grad_distill_loss(
    pred: DisparityMap,
    mono: DisparityMap,
    pixels: list[tuple[int, int]],
) -> tuple[float, np.ndarray]:
    """Mean squared difference of horizontal forward differences.

    Only sampled pixels whose right neighbor is valid in both maps
    contribute; the gradient therefore also touches those neighbors.
    """
    _check_same_shape(pred, mono, "grad distill loss")
    if len(pixels) < 1:
        raise ValueError("grad distill loss needs at least one sampled pixel")
    v_here = _gather(pred, pixels, "grad distill loss (prediction)")
    _gather(mono, pixels, "grad distill loss (teacher)")

    h, w = pred.values.shape
    xs = np.fromiter((p[0] for p in pixels), dtype=np.int64, count=len(pixels))
    ys = np.fromiter((p[1] for p in pixels), dtype=np.int64, count=len(pixels))
    has_right = xs + 1 < w
    rx = np.minimum(xs + 1, w - 1)
    usable = has_right & pred.valid[ys, rx] & mono.valid[ys, rx]
    k = int(usable.sum())
    if k == 0:
        raise ValueError("grad distill loss: no sampled pixel has a valid right neighbor")
    xs, ys = xs[usable], ys[usable]
    gp = pred.values[ys, xs + 1] - pred.values[ys, xs]
    gm = mono.values[ys, xs + 1] - mono.values[ys, xs]
    diff = gp - gm
    loss = float(np.dot(diff, diff) / k)

    grad = np.zeros((h, w), dtype=np.float64)
    step = 2.0 * diff / k
    np.add.at(grad, (ys, xs + 1), step)
    np.add.at(grad, (ys, xs), -step)
    return loss, grad


def combined_loss(
    pred: DisparityMap,
    gt: DisparityMap,
    mono: DisparityMap,
    cfg: DistillConfig,
) -> LossReport:
    """Sparse GT loss plus alpha times the selected distill variant."""
    _check_same_shape(pred, gt, "combined loss (gt)")
    _check_same_shape(pred, mono, "combined loss (teacher)")
    sparse_term, grad = sparse_loss(pred, gt)

    if cfg.variant == "off":
        distill_term = 0.0
        pixels: list[tuple[int, int]] = []
    else:
        pixels = sample_pixels(MaskPlane(mono.valid), cfg.sample_count, cfg.rng_seed)
        if cfg.variant == "kl":
            distill_term, dgrad = kl_distill_loss(pred, mono, pixels, cfg.epsilon)
        elif cfg.variant == "l2":
            distill_term, dgrad = l2_distill_loss(pred, mono, pixels)
        else:
            distill_term, dgrad = grad_distill_loss(pred, mono, pixels)
        grad = grad + cfg.alpha * dgrad

    total = sparse_term + cfg.alpha * distill_term
    return LossReport(
        total=total,
        sparse_term=sparse_term,
        distill_term=distill_term,
        grad_wrt_prediction=grad,
        sampled_pixels=pixels,
        config=cfg,
    )
