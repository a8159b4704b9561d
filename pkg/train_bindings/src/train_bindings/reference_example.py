"""Reference fine-tuning run on a synthetic scene.

Gradient-descends a dense disparity field under the combined loss with
each distill variant and reports full-image EPE against the dense ground
truth. Sparse labels cover 5% of pixels; the teacher map is 0.7x the GT,
the right shape at the wrong scale. Expected outcome: the scale-invariant
KL variant beats the raw L2 variant, which beats sparse-only fine-tuning.

Run with: python -m train_bindings.reference_example
"""
from __future__ import annotations

import sys

import numpy as np

from . import bound_combined_loss, bound_disparity_errors

SCENE_SEED = 7
TRAIN_SEED = 11
STEPS = 500
LEARNING_RATE = 8.0
SAMPLES_PER_STEP = 256


def build_scene(h: int = 32, w: int = 48):
    rng = np.random.default_rng(SCENE_SEED)
    xx = np.tile(np.linspace(0.0, 1.0, w), (h, 1))
    yy = np.tile(np.linspace(0.0, 1.0, h)[:, None], (1, w))
    gt = 5.0 + 30.0 * xx + 5.0 * yy
    gt[8:20, 10:22] += 12.0
    gt[22:30, 30:44] += 6.0
    sparse_mask = rng.random((h, w)) < 0.05
    sparse = np.where(sparse_mask, gt, 0.0)
    mono = 0.7 * gt
    return gt, sparse, sparse_mask, mono


def finetune(variant: str, alpha: float) -> float:
    gt, sparse, sparse_mask, mono = build_scene()
    pred = np.full(gt.shape, sparse[sparse_mask].mean())
    grad = np.zeros_like(pred)
    for step in range(STEPS):
        bound_combined_loss(
            np.clip(pred, 0.0, None),
            sparse,
            sparse_mask,
            mono,
            grad,
            alpha=alpha,
            sample_count=SAMPLES_PER_STEP,
            seed=TRAIN_SEED + step,
            variant=variant,
        )
        pred -= LEARNING_RATE * grad
    epe, _, _, _ = bound_disparity_errors(
        np.clip(pred, 0.0, None), gt, np.ones(gt.shape, dtype=bool)
    )
    return epe


def main() -> int:
    runs = [("off", 1.0), ("grad", 8.0), ("l2", 8.0), ("kl", 500.0)]
    results = {}
    for variant, alpha in runs:
        results[variant] = finetune(variant, alpha)
        print(f"variant={variant:4s} alpha={alpha:6.1f} full-image EPE={results[variant]:.4f}")
    ordered = results["kl"] <= results["l2"] <= results["off"]
    print(
        "ordering KL <= L2 <= Off:",
        "holds" if ordered else "VIOLATED",
        f"({results['kl']:.4f} <= {results['l2']:.4f} <= {results['off']:.4f})",
    )
    return 0 if ordered else 1


if __name__ == "__main__":
    sys.exit(main())
