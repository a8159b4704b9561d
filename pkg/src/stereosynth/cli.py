"""Command-line entry point.

Subcommands:
  synth       generate stereo pairs + GT disparity from a manifest
  eval        score predictions against manifest GT (JSONL + aggregate)
  loss        compute the distillation loss for one triplet of maps
  mask-debug  emit edge / hole / inpaint masks for inspection

Exit codes: 0 success, 1 partial failure (some records failed), 2 bad
usage or configuration. A JSON config file may supply any flag value;
explicit flags win.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .distill import DistillConfig, VARIANTS, combined_loss
from .edge_aware import EdgeConfig
from .inpaint import InpaintBackend
from .io import read_disparity_auto
from .pipeline import PipelineConfig, run_eval, run_mask_debug, run_synth
from .types import ScaleConfig

_BACKEND_NAMES = {
    "random": InpaintBackend.RANDOM_FILL,
    "propagate": InpaintBackend.BACKGROUND_PROPAGATE,
    "external": InpaintBackend.EXTERNAL,
}

_DEFAULTS = {
    "dmin": 32.0,
    "dmax": 192.0,
    "tau": 3.0,
    "strip_width": 2,
    "backend": "propagate",
    "backend_cmd": None,
    "backend_jobs": 1,
    "seed": 0,
    "workers": 1,
    "alpha": 1.0,
    "samples": 4096,
    "epsilon": 1e-6,
    "variant": "kl",
    "debug_masks": False,
    "invert_depth": False,
}


def _add_common_synth_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--manifest", required=True, help="dataset manifest (JSON-lines)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--dmin", type=float, help="minimum disparity scale (pixels)")
    p.add_argument("--dmax", type=float, help="maximum disparity scale (pixels)")
    p.add_argument("--tau", type=float, help="edge detection threshold (pixels)")
    p.add_argument("--strip-width", type=int, dest="strip_width", help="preserved strip width")
    p.add_argument("--seed", type=int, help="global RNG seed")
    p.add_argument("--workers", type=int, help="parallel workers over records")
    p.add_argument(
        "--invert-depth",
        action="store_const",
        const=True,
        dest="invert_depth",
        help="inputs are depth-like (larger = farther); flip to disparity orientation",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stereosynth",
        description="Synthesize stereo training pairs from monocular depth and evaluate disparities.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate stereo pairs from a manifest")
    _add_common_synth_flags(p_synth)
    p_synth.add_argument("--backend", choices=sorted(_BACKEND_NAMES), help="hole-filling backend")
    p_synth.add_argument(
        "--backend-cmd",
        dest="backend_cmd",
        help="external command template with {image} {mask} {output} placeholders",
    )
    p_synth.add_argument(
        "--backend-jobs",
        type=int,
        dest="backend_jobs",
        help="max concurrent external backend subprocesses",
    )
    p_synth.add_argument(
        "--debug-masks",
        action="store_const",
        const=True,
        dest="debug_masks",
        help="also write hole/edge/inpaint masks per record",
    )

    p_eval = sub.add_parser("eval", help="score predictions against manifest ground truth")
    p_eval.add_argument("--manifest", required=True)
    p_eval.add_argument("--pred-dir", required=True, help="directory of <id>.png/.pfm predictions")
    p_eval.add_argument("--out", required=True, help="output JSON-lines report")
    p_eval.add_argument("--workers", type=int, default=1)

    p_loss = sub.add_parser("loss", help="distillation loss for a (pred, gt, mono) triplet")
    p_loss.add_argument("pred", help="predicted disparity (.png 16-bit or .pfm)")
    p_loss.add_argument("gt", help="sparse ground-truth disparity")
    p_loss.add_argument("mono", help="dense teacher disparity")
    p_loss.add_argument("--config", help="JSON config file; flags override its values")
    p_loss.add_argument("--alpha", type=float, help="distill term weight")
    p_loss.add_argument("--samples", type=int, help="sampled pixels per evaluation")
    p_loss.add_argument("--variant", choices=VARIANTS, help="distill variant")
    p_loss.add_argument("--seed", type=int, help="pixel sampling seed")
    p_loss.add_argument("--epsilon", type=float, help="probability floor")
    p_loss.add_argument(
        "--grad-out", dest="grad_out", help="write the gradient plane to this .npy file"
    )

    p_mask = sub.add_parser("mask-debug", help="emit edge/hole/inpaint masks per record")
    _add_common_synth_flags(p_mask)

    return parser


def _resolve(args: argparse.Namespace, key: str, cfg_file: dict):
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in cfg_file:
        return cfg_file[key]
    return _DEFAULTS[key]


def _load_config_file(args: argparse.Namespace) -> dict:
    path = getattr(args, "config", None)
    if not path:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: config file must hold a JSON object")
    unknown = set(data) - set(_DEFAULTS)
    if unknown:
        raise ValueError(f"{path}: unknown config keys {sorted(unknown)}")
    return data


def _pipeline_config(args: argparse.Namespace) -> PipelineConfig:
    cfg_file = _load_config_file(args)
    get = lambda key: _resolve(args, key, cfg_file)
    backend_name = get("backend")
    if backend_name not in _BACKEND_NAMES:
        raise ValueError(f"unknown backend {backend_name!r}")
    return PipelineConfig(
        manifest=Path(args.manifest),
        out_dir=Path(args.out),
        scale=ScaleConfig(d_min=get("dmin"), d_max=get("dmax"), rng_seed=get("seed")),
        edge=EdgeConfig(tau=get("tau"), strip_width=get("strip_width")),
        backend=_BACKEND_NAMES[backend_name],
        backend_cmd=get("backend_cmd"),
        backend_jobs=get("backend_jobs"),
        workers=get("workers"),
        debug_masks=get("debug_masks"),
        invert_depth=get("invert_depth"),
    )


def _cmd_synth(args: argparse.Namespace) -> int:
    summary = run_synth(_pipeline_config(args))
    print(json.dumps(summary.to_dict(), sort_keys=True))
    return 0 if summary.ok else 1


def _cmd_eval(args: argparse.Namespace) -> int:
    lines, aggregate = run_eval(args.manifest, args.pred_dir, args.out, workers=args.workers)
    print(json.dumps(aggregate, sort_keys=True))
    failed = [ln for ln in lines if "error" in ln]
    return 1 if failed else 0


def _cmd_loss(args: argparse.Namespace) -> int:
    cfg_file = _load_config_file(args)
    get = lambda key: _resolve(args, key, cfg_file)
    cfg = DistillConfig(
        alpha=get("alpha"),
        sample_count=get("samples"),
        rng_seed=get("seed"),
        epsilon=get("epsilon"),
        variant=get("variant"),
    )
    pred = read_disparity_auto(args.pred)
    gt = read_disparity_auto(args.gt)
    mono = read_disparity_auto(args.mono)
    report = combined_loss(pred, gt, mono, cfg)
    if args.grad_out:
        np.save(args.grad_out, report.grad_wrt_prediction)
    print(json.dumps(report.to_dict(), sort_keys=True))
    return 0


def _cmd_mask_debug(args: argparse.Namespace) -> int:
    cfg = _pipeline_config(args)
    summary = run_mask_debug(cfg)
    print(json.dumps(summary.to_dict(), sort_keys=True))
    return 0 if summary.ok else 1


_COMMANDS = {
    "synth": _cmd_synth,
    "eval": _cmd_eval,
    "loss": _cmd_loss,
    "mask-debug": _cmd_mask_debug,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
