"""Stereo training-pair synthesis from monocular depth.

Turns single images plus relative depth maps into stereo pairs (random
disparity rescaling, occlusion-aware forward warping, edge-aware inpainting
masks), and provides the sparse-to-dense distillation loss and disparity
evaluation metrics that go with them.
"""

from .types import DisparityMap, ImagePlane, MaskPlane, RelativeDepthMap, ScaleConfig
from .io import (
    read_image,
    write_image,
    read_disparity_kitti_png,
    write_disparity_kitti_png,
    read_pfm,
    write_pfm,
    read_pfm_disparity,
    read_pfm_depth,
    read_mask_png,
    write_mask_png,
    read_disparity_auto,
)
from .scaling import sample_scale, scale_to_pixels
from .warp import SplatCounts, WarpResult, warp_left_to_right, warp_right_from_prediction
from .edge_aware import EAWarpPlan, EdgeConfig, detect_edges, plan_ea_warp, warp_with_ea
from .inpaint import (
    BackendError,
    ExternalRunner,
    InpaintBackend,
    InpaintRequest,
    inpaint_background_propagate,
    inpaint_external,
    inpaint_random,
)
from .distill import (
    DistillConfig,
    LossReport,
    combined_loss,
    grad_distill_loss,
    kl_distill_loss,
    l2_distill_loss,
    sample_pixels,
    sparse_loss,
)
from .metrics import MetricsReport, disparity_errors, psnr, ssim, warp_consistency
from .pipeline import (
    DatasetManifest,
    ManifestRecord,
    PipelineConfig,
    SynthSummary,
    run_eval,
    run_mask_debug,
    run_synth,
)

__version__ = "0.1.0"
