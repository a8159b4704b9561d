"""Hole-filling backends for warped right views.

Three strategies:
  - random_fill: every hole takes the color of a uniformly sampled non-hole
    pixel (the classic cheap baseline),
  - background_propagate: every hole takes the nearest non-hole color to its
    right on the same row (the dis-occluded side), falling back left, then
    within the column, then image-wide; deterministic, model-free,
  - external: a subprocess protocol for a real inpainting model. The core
    never links against the model; it exchanges 8-bit PNGs (mask: 255 =
    fill) through a work directory and a command template with {image},
    {mask}, {output} placeholders.

All backends leave pixels outside the mask unchanged (the external backend
is checked for this within a small tolerance and warned about, not failed).
"""
from __future__ import annotations

import enum
import shlex
import subprocess
import threading
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .io import read_image, write_image, write_mask_png
from .types import ImagePlane, MaskPlane

__all__ = [
    "InpaintBackend",
    "InpaintRequest",
    "BackendError",
    "inpaint_random",
    "inpaint_background_propagate",
    "inpaint_external",
    "ExternalRunner",
]


class InpaintBackend(enum.Enum):
    RANDOM_FILL = "random_fill"
    BACKGROUND_PROPAGATE = "background_propagate"
    EXTERNAL = "external"


class BackendError(RuntimeError):
    """External backend failure; carries the captured stderr."""

    def __init__(self, message: str, stderr: str = ""):
        super().__init__(message if not stderr else f"{message}\nstderr:\n{stderr}")
        self.stderr = stderr


@dataclass(frozen=True)
class InpaintRequest:
    image: ImagePlane
    mask: MaskPlane
    backend: InpaintBackend
    rng_seed: int = 0

    def __post_init__(self):
        if (self.mask.height, self.mask.width) != (self.image.height, self.image.width):
            raise ValueError(
                f"mask {self.mask.height}x{self.mask.width} does not match "
                f"image {self.image.height}x{self.image.width}"
            )


def inpaint_random(req: InpaintRequest) -> ImagePlane:
    """Fill each hole with the color of a uniformly sampled non-hole pixel."""
    if req.backend is not InpaintBackend.RANDOM_FILL:
        raise ValueError(f"request routed to random_fill with backend {req.backend}")
    holes = req.mask.bits
    if holes.all():
        raise ValueError("cannot inpaint: image is entirely holes")
    if not holes.any():
        return req.image
    donor_y, donor_x = np.nonzero(~holes)
    rng = np.random.default_rng(req.rng_seed)
    pick = rng.integers(0, len(donor_y), size=int(holes.sum()))
    out = np.array(req.image.data)
    hy, hx = np.nonzero(holes)
    out[hy, hx] = req.image.data[donor_y[pick], donor_x[pick]]
    return ImagePlane(out)


def _nearest_right_left(holes: np.ndarray):
    """Per pixel: nearest non-hole column at-or-right, and at-or-left."""
    h, w = holes.shape
    cols = np.broadcast_to(np.arange(w), (h, w))
    right = np.where(~holes, cols, w)
    right = np.minimum.accumulate(right[:, ::-1], axis=1)[:, ::-1]
    left = np.where(~holes, cols, -1)
    left = np.maximum.accumulate(left, axis=1)
    return right, left


def inpaint_background_propagate(req: InpaintRequest) -> ImagePlane:
    """Fill each hole from the nearest non-hole pixel to its right on the row.

    Falls back to the nearest on the left, then the nearest in the column,
    then the nearest anywhere; errors only when the image is all holes.
    """
    if req.backend is not InpaintBackend.BACKGROUND_PROPAGATE:
        raise ValueError(f"request routed to background_propagate with backend {req.backend}")
    holes = req.mask.bits
    if holes.all():
        raise ValueError("cannot inpaint: image is entirely holes")
    if not holes.any():
        return req.image

    h, w = holes.shape
    img = req.image.data
    out = np.array(img)
    right, left = _nearest_right_left(holes)
    ys = np.broadcast_to(np.arange(h)[:, None], (h, w))

    fill_right = holes & (right < w)
    out[fill_right] = img[ys[fill_right], right[fill_right]]
    fill_left = holes & (right == w) & (left >= 0)
    out[fill_left] = img[ys[fill_left], left[fill_left]]

    unresolved = holes & (right == w) & (left < 0)  # rows that are all holes
    if unresolved.any():
        up = np.where(~holes, ys, -1)
        up = np.maximum.accumulate(up, axis=0)
        down = np.where(~holes, ys, h)
        down = np.minimum.accumulate(down[::-1, :], axis=0)[::-1, :]
        uy, ux = np.nonzero(unresolved)
        for y, x in zip(uy, ux):
            above, below = up[y, x], down[y, x]
            if above < 0 and below >= h:
                continue  # column all holes too; handled below
            if above < 0:
                src = below
            elif below >= h:
                src = above
            else:
                src = above if (y - above) <= (below - y) else below
            out[y, x] = img[src, x]
            unresolved[y, x] = False

    if unresolved.any():
        donor_y, donor_x = np.nonzero(~holes)
        for y, x in zip(*np.nonzero(unresolved)):
            d2 = (donor_y - y) ** 2 + (donor_x - x) ** 2
            out[y, x] = img[donor_y[np.argmin(d2)], donor_x[np.argmin(d2)]]

    return ImagePlane(out)


# {output} must appear (we read it back); {image}/{mask} may be omitted by
# trivial backends, the PNGs are written to the workdir either way.
_REQUIRED_PLACEHOLDERS = ("{output}",)


def _substitute(template: str, paths: dict) -> list[str]:
    tokens = shlex.split(template)
    out = []
    for tok in tokens:
        for key, val in paths.items():
            tok = tok.replace("{" + key + "}", str(val))
        out.append(tok)
    return out


class ExternalRunner:
    """Runs an external inpainting command with a concurrency cap."""

    def __init__(self, backend_cmd: str, max_concurrent: int = 1):
        for ph in _REQUIRED_PLACEHOLDERS:
            if ph not in backend_cmd:
                raise ValueError(f"backend command template is missing placeholder {ph}")
        if max_concurrent < 1:
            raise ValueError("max_concurrent must be >= 1")
        self.backend_cmd = backend_cmd
        self._slots = threading.BoundedSemaphore(max_concurrent)

    def run(self, req: InpaintRequest, workdir: str | Path) -> ImagePlane:
        if req.backend is not InpaintBackend.EXTERNAL:
            raise ValueError(f"request routed to external backend with backend {req.backend}")
        workdir = Path(workdir)
        workdir.mkdir(parents=True, exist_ok=True)
        image_path = workdir / "input.png"
        mask_path = workdir / "mask.png"
        output_path = workdir / "output.png"
        write_image(req.image, image_path)
        write_mask_png(req.mask, mask_path)
        argv = _substitute(
            self.backend_cmd,
            {"image": image_path, "mask": mask_path, "output": output_path},
        )
        with self._slots:
            proc = subprocess.run(argv, capture_output=True, text=True)
        if proc.returncode != 0:
            raise BackendError(
                f"backend command exited with status {proc.returncode}", proc.stderr
            )
        if not output_path.exists():
            raise BackendError(f"backend produced no output file at {output_path}", proc.stderr)
        try:
            result = read_image(output_path)
        except Exception as exc:
            raise BackendError(f"backend output unreadable: {exc}", proc.stderr) from exc
        if (result.height, result.width) != (req.image.height, req.image.width):
            raise BackendError(
                f"backend output is {result.height}x{result.width}, "
                f"expected {req.image.height}x{req.image.width}"
            )
        keep = ~req.mask.bits
        if keep.any():
            drift = np.abs(
                result.data[keep].astype(np.int16) - req.image.data[keep].astype(np.int16)
            )
            if drift.max(initial=0) > 2:
                warnings.warn(
                    f"external backend modified unmasked pixels by up to {int(drift.max())} "
                    "intensity levels",
                    RuntimeWarning,
                    stacklevel=2,
                )
        return result


def inpaint_external(req: InpaintRequest, backend_cmd: str, workdir: str | Path) -> ImagePlane:
    """One-shot external inpaint; see ExternalRunner for the protocol."""
    return ExternalRunner(backend_cmd, max_concurrent=1).run(req, workdir)
