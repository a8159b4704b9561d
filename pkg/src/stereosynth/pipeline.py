"""Batch synthesis and evaluation over a dataset manifest.

The manifest is JSON-lines: a header object, then one record per line with
an id and input paths (resolved relative to the manifest file). Each record
is processed independently with seeds derived from (global seed, record
id), so results do not depend on worker count, scheduling order, or which
other records exist. One bad record never stops the rest; failures are
collected into the run summary.
"""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from ._rng import derive_seed
from .edge_aware import EdgeConfig, warp_with_ea
from .inpaint import ExternalRunner, InpaintBackend, InpaintRequest, inpaint_background_propagate, inpaint_random
from .io import (
    read_disparity_auto,
    read_image,
    read_pfm_depth,
    write_disparity_kitti_png,
    write_image,
    write_mask_png,
)
from .metrics import MetricsReport, disparity_errors, warp_consistency
from .scaling import sample_scale, scale_to_pixels
from .types import ScaleConfig
from .warp import warp_left_to_right

__all__ = [
    "MANIFEST_FORMAT",
    "MANIFEST_VERSION",
    "ManifestRecord",
    "DatasetManifest",
    "PipelineConfig",
    "SynthSummary",
    "run_synth",
    "run_eval",
    "run_mask_debug",
]

MANIFEST_FORMAT = "stereosynth-manifest"
MANIFEST_VERSION = 1


@dataclass(frozen=True)
class ManifestRecord:
    id: str
    left: str
    depth: str
    gt: str | None = None
    right: str | None = None


@dataclass(frozen=True)
class DatasetManifest:
    records: tuple
    version: int = MANIFEST_VERSION
    base_dir: Path = Path(".")

    @classmethod
    def load(cls, path: str | Path) -> "DatasetManifest":
        path = Path(path)
        lines = [ln for ln in path.read_text(encoding="utf-8").splitlines() if ln.strip()]
        if not lines:
            raise ValueError(f"{path}: empty manifest (missing header line)")
        header = json.loads(lines[0])
        if header.get("format") != MANIFEST_FORMAT:
            raise ValueError(f"{path}: not a {MANIFEST_FORMAT} file")
        version = header.get("version")
        if version != MANIFEST_VERSION:
            raise ValueError(f"{path}: unsupported manifest version {version}")
        records = []
        seen = set()
        for lineno, ln in enumerate(lines[1:], start=2):
            raw = json.loads(ln)
            try:
                rec = ManifestRecord(
                    id=str(raw["id"]),
                    left=raw["left"],
                    depth=raw["depth"],
                    gt=raw.get("gt"),
                    right=raw.get("right"),
                )
            except KeyError as exc:
                raise ValueError(f"{path}:{lineno}: record missing field {exc}") from exc
            if rec.id in seen:
                raise ValueError(f"{path}:{lineno}: duplicate record id {rec.id!r}")
            seen.add(rec.id)
            records.append(rec)
        return cls(records=tuple(records), version=version, base_dir=path.parent)

    def resolve(self, rel: str) -> Path:
        p = Path(rel)
        return p if p.is_absolute() else self.base_dir / p

    @staticmethod
    def write(path: str | Path, records: list[dict]) -> None:
        """Write a manifest file from plain record dicts (test/tool helper)."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps({"format": MANIFEST_FORMAT, "version": MANIFEST_VERSION}) + "\n")
            for rec in records:
                fh.write(json.dumps(rec) + "\n")


@dataclass(frozen=True)
class PipelineConfig:
    manifest: Path
    out_dir: Path
    scale: ScaleConfig = field(default_factory=ScaleConfig)
    edge: EdgeConfig = field(default_factory=EdgeConfig)
    backend: InpaintBackend = InpaintBackend.BACKGROUND_PROPAGATE
    backend_cmd: str | None = None
    backend_jobs: int = 1
    workers: int = 1
    debug_masks: bool = False
    invert_depth: bool = False

    def __post_init__(self):
        if self.workers < 1:
            raise ValueError(f"worker count must be >= 1, got {self.workers}")
        if self.backend is InpaintBackend.EXTERNAL and not self.backend_cmd:
            raise ValueError("external backend requires a command template (--backend-cmd)")


@dataclass
class SynthSummary:
    processed: list[str] = field(default_factory=list)
    failed: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failed

    def to_dict(self) -> dict:
        return {
            "processed": sorted(self.processed),
            "failed": {k: self.failed[k] for k in sorted(self.failed)},
        }


def _load_depth(manifest: DatasetManifest, record: ManifestRecord, invert: bool):
    depth_path = manifest.resolve(record.depth)
    if depth_path.suffix.lower() != ".pfm":
        raise ValueError(f"{depth_path}: depth maps must be grayscale PFM")
    depth = read_pfm_depth(depth_path)
    return depth.inverted() if invert else depth


def _synth_record(
    manifest: DatasetManifest,
    record: ManifestRecord,
    cfg: PipelineConfig,
    runner: ExternalRunner | None,
) -> None:
    left = read_image(manifest.resolve(record.left))
    depth = _load_depth(manifest, record, cfg.invert_depth)
    if (depth.height, depth.width) != (left.height, left.width):
        raise ValueError(
            f"depth {depth.height}x{depth.width} does not match image "
            f"{left.height}x{left.width}"
        )
    if cfg.scale.d_max >= left.width:
        raise ValueError(
            f"d_max {cfg.scale.d_max} must be smaller than the image width {left.width}"
        )

    record_seed = derive_seed(cfg.scale.rng_seed, record.id)
    f = sample_scale(
        ScaleConfig(cfg.scale.d_min, cfg.scale.d_max, record_seed), draw_index=0
    )
    disp = scale_to_pixels(depth, f)
    result, plan = warp_with_ea(left, disp, cfg.edge)

    if cfg.backend is InpaintBackend.RANDOM_FILL:
        req = InpaintRequest(
            result.right_image,
            plan.inpaint_mask,
            InpaintBackend.RANDOM_FILL,
            rng_seed=derive_seed(record_seed, "inpaint"),
        )
        filled = inpaint_random(req)
    elif cfg.backend is InpaintBackend.BACKGROUND_PROPAGATE:
        req = InpaintRequest(
            result.right_image, plan.inpaint_mask, InpaintBackend.BACKGROUND_PROPAGATE
        )
        filled = inpaint_background_propagate(req)
    else:
        assert runner is not None
        req = InpaintRequest(result.right_image, plan.inpaint_mask, InpaintBackend.EXTERNAL)
        filled = runner.run(req, cfg.out_dir / f"{record.id}_backend")

    out = cfg.out_dir
    write_image(filled, out / f"{record.id}_right.png")
    write_disparity_kitti_png(disp, out / f"{record.id}_disp.png")
    if cfg.debug_masks:
        plain = warp_left_to_right(left, disp)
        write_mask_png(plain.hole_mask, out / f"{record.id}_hole_mask.png")
        write_mask_png(plan.edge_mask, out / f"{record.id}_edge_mask.png")
        write_mask_png(plan.inpaint_mask, out / f"{record.id}_inpaint_mask.png")

    provenance = {
        "format": MANIFEST_FORMAT + "-provenance",
        "version": MANIFEST_VERSION,
        "id": record.id,
        "left": record.left,
        "depth": record.depth,
        "invert_depth": cfg.invert_depth,
        "d_min": cfg.scale.d_min,
        "d_max": cfg.scale.d_max,
        "seed": cfg.scale.rng_seed,
        "record_seed": record_seed,
        "scale_factor": f,
        "tau": cfg.edge.tau,
        "strip_width": cfg.edge.strip_width,
        "backend": cfg.backend.value,
        "backend_cmd": cfg.backend_cmd,
    }
    with open(out / f"{record.id}_meta.json", "w", encoding="utf-8") as fh:
        json.dump(provenance, fh, indent=2, sort_keys=True)
        fh.write("\n")


def run_synth(cfg: PipelineConfig) -> SynthSummary:
    """Generate one stereo pair + GT disparity per manifest record."""
    manifest = DatasetManifest.load(cfg.manifest)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    runner = (
        ExternalRunner(cfg.backend_cmd, max_concurrent=cfg.backend_jobs)
        if cfg.backend is InpaintBackend.EXTERNAL
        else None
    )
    summary = SynthSummary()

    def work(record: ManifestRecord):
        try:
            _synth_record(manifest, record, cfg, runner)
            return record.id, None
        except Exception as exc:
            return record.id, f"{type(exc).__name__}: {exc}"

    if cfg.workers == 1:
        results = [work(r) for r in manifest.records]
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(work, manifest.records))

    for rec_id, err in results:
        if err is None:
            summary.processed.append(rec_id)
        else:
            summary.failed[rec_id] = err
    return summary


def _eval_record(
    manifest: DatasetManifest, record: ManifestRecord, pred_dir: Path
) -> MetricsReport:
    if record.gt is None:
        raise ValueError("manifest record has no ground-truth disparity")
    gt = read_disparity_auto(manifest.resolve(record.gt))
    pred_path = None
    for ext in (".png", ".pfm"):
        candidate = pred_dir / f"{record.id}{ext}"
        if candidate.exists():
            pred_path = candidate
            break
    if pred_path is None:
        raise FileNotFoundError(f"missing prediction for id {record.id!r} in {pred_dir}")
    pred = read_disparity_auto(pred_path)
    epe, d1, gt2px, n = disparity_errors(pred, gt)
    if record.right is not None:
        left = read_image(manifest.resolve(record.left))
        right = read_image(manifest.resolve(record.right))
        p, s, count = warp_consistency(left, right, pred)
        return MetricsReport(epe, d1, gt2px, n, psnr=p, ssim=s, evaluated_pixel_count=count)
    return MetricsReport(epe, d1, gt2px, n)


def run_eval(
    manifest_path: str | Path, pred_dir: str | Path, out_path: str | Path, workers: int = 1
) -> tuple[list[dict], dict]:
    """Score predictions against the manifest's GT; emit JSONL plus aggregate.

    Returns (per-record lines, aggregate line); the aggregate averages every
    metric over the successfully evaluated pairs.
    """
    manifest = DatasetManifest.load(manifest_path)
    pred_dir = Path(pred_dir)

    def work(record: ManifestRecord):
        try:
            report = _eval_record(manifest, record, pred_dir)
            return record.id, report, None
        except Exception as exc:
            return record.id, None, f"{type(exc).__name__}: {exc}"

    if workers == 1:
        results = [work(r) for r in manifest.records]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, manifest.records))

    lines = []
    evaluated = []
    for rec_id, report, err in results:
        if err is not None:
            lines.append({"id": rec_id, "error": err})
        else:
            lines.append({"id": rec_id, **report.to_dict()})
            evaluated.append(report)

    aggregate: dict = {"aggregate": True, "pairs": len(evaluated)}
    if evaluated:
        aggregate["epe"] = sum(r.epe for r in evaluated) / len(evaluated)
        aggregate["d1"] = sum(r.d1 for r in evaluated) / len(evaluated)
        aggregate["gt2px"] = sum(r.gt2px for r in evaluated) / len(evaluated)
        with_psnr = [r for r in evaluated if r.psnr is not None]
        if with_psnr:
            mean_psnr = sum(r.psnr for r in with_psnr) / len(with_psnr)
            aggregate["psnr"] = "inf" if mean_psnr == float("inf") else mean_psnr
        with_ssim = [r for r in evaluated if r.ssim is not None]
        if with_ssim:
            aggregate["ssim"] = sum(r.ssim for r in with_ssim) / len(with_ssim)

    with open(out_path, "w", encoding="utf-8") as fh:
        for line in lines:
            fh.write(json.dumps(line, sort_keys=True) + "\n")
        fh.write(json.dumps(aggregate, sort_keys=True) + "\n")
    return lines, aggregate


def run_mask_debug(cfg: PipelineConfig) -> SynthSummary:
    """Emit the edge/hole/inpaint masks per record without synthesizing pairs."""
    manifest = DatasetManifest.load(cfg.manifest)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    summary = SynthSummary()
    for record in manifest.records:
        try:
            left = read_image(manifest.resolve(record.left))
            depth = _load_depth(manifest, record, cfg.invert_depth)
            record_seed = derive_seed(cfg.scale.rng_seed, record.id)
            f = sample_scale(
                ScaleConfig(cfg.scale.d_min, cfg.scale.d_max, record_seed), draw_index=0
            )
            disp = scale_to_pixels(depth, f)
            result, plan = warp_with_ea(left, disp, cfg.edge)
            plain = warp_left_to_right(left, disp)
            out = cfg.out_dir
            write_mask_png(plain.hole_mask, out / f"{record.id}_hole_mask.png")
            write_mask_png(plan.edge_mask, out / f"{record.id}_edge_mask.png")
            write_mask_png(plan.inpaint_mask, out / f"{record.id}_inpaint_mask.png")
            summary.processed.append(record.id)
        except Exception as exc:
            summary.failed[record.id] = f"{type(exc).__name__}: {exc}"
    return summary
