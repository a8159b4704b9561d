import math

import numpy as np
import pytest

from stereosynth.inpaint import InpaintBackend, InpaintRequest, inpaint_background_propagate
from stereosynth.metrics import MetricsReport, disparity_errors, psnr, ssim, warp_consistency
from stereosynth.types import DisparityMap, ImagePlane, MaskPlane
from stereosynth.warp import warp_left_to_right

from oracles import luma601, psnr_scalar, ssim_window_scan, warp_row_scan


def rand_image(seed, h, w):
    return ImagePlane(np.random.default_rng(seed).integers(0, 256, (h, w, 3), dtype=np.uint8))


class TestDisparityErrors:
    def test_perfect_prediction(self):
        gt = DisparityMap(np.full((4, 4), 10.0))
        epe, d1, gt2px, n = disparity_errors(gt, gt)
        assert (epe, d1, gt2px) == (0.0, 0.0, 0.0)
        assert n == 16

    def test_offset_one_under_thresholds(self):
        gt = DisparityMap(np.full((3, 3), 10.0))
        pred = DisparityMap(gt.values + 1.0)
        epe, d1, gt2px, _ = disparity_errors(pred, gt)
        assert epe == pytest.approx(1.0)
        assert gt2px == 0.0
        assert d1 == 0.0

    def test_offset_four_trips_both(self):
        gt = DisparityMap(np.full((3, 3), 10.0))
        pred = DisparityMap(gt.values + 4.0)
        epe, d1, gt2px, _ = disparity_errors(pred, gt)
        assert epe == pytest.approx(4.0)
        assert gt2px == 100.0
        assert d1 == 100.0  # 4 > 3 and 4 > 0.05 * 10

    def test_d1_five_percent_clause(self):
        # error 4 px on gt 100: above 3 px but only 4% of gt, so not a D1 outlier
        gt = DisparityMap(np.full((2, 2), 100.0))
        pred = DisparityMap(gt.values + 4.0)
        _, d1, gt2px, _ = disparity_errors(pred, gt)
        assert gt2px == 100.0
        assert d1 == 0.0

    def test_d1_never_exceeds_gt3px_fraction(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            gt_vals = rng.random((6, 6)) * 50
            valid = rng.random((6, 6)) > 0.2
            gt = DisparityMap(np.where(valid, gt_vals, 0), valid)
            pred = DisparityMap(rng.random((6, 6)) * 50)
            _, d1, _, _ = disparity_errors(pred, gt)
            err = np.abs(pred.values[valid] - gt.values[valid])
            gt3px = 100.0 * float((err > 3.0).mean())
            assert d1 <= gt3px + 1e-12

    def test_epe_monotone_in_uniform_offset(self):
        rng = np.random.default_rng(3)
        gt = DisparityMap(rng.random((5, 5)) * 30 + 10)
        epes = []
        for delta in (0.0, 0.5, 1.5, 4.0, 9.0):
            pred = DisparityMap(gt.values + delta)
            epes.append(disparity_errors(pred, gt)[0])
        assert all(b >= a for a, b in zip(epes, epes[1:]))

    def test_sparse_equals_masked_dense(self):
        rng = np.random.default_rng(4)
        dense_vals = rng.random((6, 6)) * 40
        valid = rng.random((6, 6)) > 0.5
        pred = DisparityMap(rng.random((6, 6)) * 40)
        sparse_gt = DisparityMap(np.where(valid, dense_vals, 0), valid)
        epe, d1, gt2px, n = disparity_errors(pred, sparse_gt)
        # recompute from the dense array restricted to the same valid set
        err = np.abs(pred.values - dense_vals)[valid]
        assert n == valid.sum()
        assert epe == pytest.approx(err.mean(), abs=1e-12)
        assert gt2px == pytest.approx(100.0 * (err > 2).mean(), abs=1e-12)
        assert d1 == pytest.approx(
            100.0 * ((err > 3) & (err > 0.05 * dense_vals[valid])).mean(), abs=1e-12
        )

    def test_no_valid_gt_rejected(self):
        gt = DisparityMap(np.zeros((2, 2)), np.zeros((2, 2), bool))
        with pytest.raises(ValueError, match="valid"):
            disparity_errors(DisparityMap(np.zeros((2, 2))), gt)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="match"):
            disparity_errors(DisparityMap(np.zeros((2, 2))), DisparityMap(np.zeros((2, 3))))


class TestPsnr:
    def test_identical_is_infinite(self):
        img = rand_image(0, 8, 8)
        assert math.isinf(psnr(img, img))

    def test_symmetry(self):
        a, b = rand_image(1, 8, 8), rand_image(2, 8, 8)
        assert psnr(a, b) == psnr(b, a)

    def test_matches_scalar_oracle(self):
        a, b = rand_image(3, 9, 7), rand_image(4, 9, 7)
        assert psnr(a, b) == pytest.approx(psnr_scalar(a.data, b.data), abs=1e-9)

    def test_masked_psnr(self):
        a, b = rand_image(5, 6, 6), rand_image(6, 6, 6)
        sel = np.random.default_rng(7).random((6, 6)) > 0.4
        got = psnr(a, b, include=MaskPlane(sel))
        assert got == pytest.approx(psnr_scalar(a.data, b.data, sel), abs=1e-9)


class TestSsim:
    def test_self_similarity_is_one(self):
        img = rand_image(10, 16, 16)
        assert ssim(img, img) == pytest.approx(1.0)

    def test_inverted_image_scores_below_one(self):
        img = rand_image(11, 16, 16)
        inv = ImagePlane(255 - img.data)
        assert ssim(img, inv) < 1.0

    def test_matches_window_scan_oracle(self):
        a, b = rand_image(12, 16, 16), rand_image(13, 16, 16)
        got = ssim(a, b)
        want = ssim_window_scan(luma601(a.data), luma601(b.data))
        assert got == pytest.approx(want, abs=1e-6)

    def test_symmetry(self):
        a, b = rand_image(14, 14, 18), rand_image(15, 14, 18)
        assert ssim(a, b) == pytest.approx(ssim(b, a), abs=1e-12)

    def test_small_image_rejected(self):
        a = rand_image(16, 8, 20)
        with pytest.raises(ValueError, match="smaller"):
            ssim(a, a)

    def test_exclusion_skips_touched_windows(self):
        a, b = rand_image(17, 20, 20), rand_image(18, 20, 20)
        holes = np.zeros((20, 20), bool)
        holes[4:7, 9:12] = True
        got = ssim(a, b, exclude=MaskPlane(holes))
        want = ssim_window_scan(luma601(a.data), luma601(b.data), exclude=holes)
        assert got == pytest.approx(want, abs=1e-6)

    def test_everything_excluded_returns_none(self):
        a = rand_image(19, 12, 12)
        assert ssim(a, a, exclude=MaskPlane(np.ones((12, 12), bool))) is None


def two_plane_scene(seed=123, h=32, w=48):
    """Textured scene with a near rectangle over a far background, plus the
    real right view synthesized from the GT disparity (with mild sensor noise
    so nothing compares exactly equal)."""
    rng = np.random.default_rng(seed)
    left = ImagePlane(rng.integers(0, 256, (h, w, 3), dtype=np.uint8))
    gt_vals = np.full((h, w), 2.0)
    gt_vals[8:24, 16:36] = 7.0
    gt = DisparityMap(gt_vals)
    warped = warp_left_to_right(left, gt)
    filled = inpaint_background_propagate(
        InpaintRequest(warped.right_image, warped.hole_mask, InpaintBackend.BACKGROUND_PROPAGATE)
    )
    noise = rng.integers(-2, 3, (h, w, 3))
    right = ImagePlane(np.clip(filled.data.astype(np.int16) + noise, 0, 255).astype(np.uint8))
    return left, right, gt


class TestWarpConsistency:
    def test_identity_case(self):
        img = rand_image(20, 16, 16)
        p, s, n = warp_consistency(img, img, DisparityMap(np.zeros((16, 16))))
        assert math.isinf(p)
        assert s == pytest.approx(1.0)
        assert n == 256

    def test_constant_scene_any_disparity_is_perfect(self):
        img = ImagePlane(np.full((16, 20, 3), 77, np.uint8))
        pred = DisparityMap(np.full((16, 20), 3.0))
        p, s, n = warp_consistency(img, img, pred)
        assert math.isinf(p)
        assert n == 16 * (20 - 3)

    def test_gt_disparity_beats_zero_disparity(self):
        left, right, gt = two_plane_scene()
        p_gt, _, _ = warp_consistency(left, right, gt)
        p_zero, _, _ = warp_consistency(left, right, DisparityMap(np.zeros(gt.values.shape)))
        assert p_gt > p_zero

    def test_values_match_independent_recomputation(self):
        left, right, gt = two_plane_scene()
        for pred in (gt, DisparityMap(np.zeros(gt.values.shape))):
            p, s, n = warp_consistency(left, right, pred)
            o_right, o_hole, _, _ = warp_row_scan(left.data, pred.values, pred.valid)
            o_p = psnr_scalar(o_right, right.data, ~o_hole)
            assert p == pytest.approx(o_p, abs=1e-6)
            o_s = ssim_window_scan(luma601(o_right), luma601(right.data), exclude=o_hole)
            assert s == pytest.approx(o_s, abs=1e-6)
            assert n == int((~o_hole).sum())

    def test_all_holes_rejected(self):
        img = rand_image(21, 4, 4)
        # disparity pushing everything off-frame on a tiny image is blocked by
        # the type invariant, so build an all-invalid map instead
        pred = DisparityMap(np.zeros((4, 4)), np.zeros((4, 4), bool))
        with pytest.raises(ValueError, match="holes"):
            warp_consistency(img, img, pred)

    def test_small_frame_skips_ssim(self):
        img = rand_image(22, 8, 8)
        p, s, n = warp_consistency(img, img, DisparityMap(np.zeros((8, 8))))
        assert s is None
        assert math.isinf(p)


class TestMetricsReport:
    def test_serialization_with_infinite_psnr(self):
        r = MetricsReport(0.0, 0.0, 0.0, 10, psnr=math.inf, ssim=1.0, evaluated_pixel_count=10)
        d = r.to_dict()
        assert d["psnr"] == "inf"
        assert d["ssim"] == 1.0

    def test_optional_fields_omitted(self):
        r = MetricsReport(1.0, 2.0, 3.0, 4)
        assert set(r.to_dict()) == {"epe", "d1", "gt2px", "valid_count"}
