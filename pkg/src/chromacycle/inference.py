"""Colorize grayscale images from a trained checkpoint.

Only the gray-to-color generator is used. The conditional regime predicts
chroma and keeps the input luma untouched; before converting to RGB, chroma
is scaled per pixel into the RGB unit cube so the luma survives the 8-bit
round trip. The unconditional regime emits 3-channel output directly with
no luma recombination.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from . import colorspace
from .colorspace import ChromaImage, GrayImage, RgbImage, combine_luma_chroma
from .dataio import PreparationSpec, derive_gray, load_image, prepare, save_image
from .errors import ShapeMismatchError, UnsupportedImageError
from .models import Generator, NoiseVector, restore, sample_noise
from .training import (
    BASELINE_REGIMES,
    CYCLE_REGIMES,
    REGIME_COND_CYCLEGAN,
    Checkpoint,
)

# Inputs are padded up to this side length so the encoder never collapses a
# plane to a single pixel.
_MIN_SIDE = 8


@dataclass(frozen=True)
class ColorizationResult:
    output: RgbImage
    source: GrayImage
    checkpoint_id: str
    regime: str

    def __post_init__(self):
        out, src = self.output, self.source
        if (out.height, out.width) != (src.height, src.width):
            raise ShapeMismatchError(
                f"output {out.height}x{out.width} vs source {src.height}x{src.width}"
            )


@dataclass
class ColorizeSummary:
    converted: int = 0
    failures: list[tuple[str, str]] = field(default_factory=list)


def checkpoint_id(ck: Checkpoint) -> str:
    return f"{ck.config.fingerprint}:{ck.iteration}"


def _pad_to_valid(plane: np.ndarray, factor: int) -> tuple[np.ndarray, tuple[int, int]]:
    """Pad bottom/right to a factor-divisible size of at least _MIN_SIDE."""
    h, w = plane.shape
    target_h = max(_MIN_SIDE, -(-h // factor) * factor)
    target_w = max(_MIN_SIDE, -(-w // factor) * factor)
    if (target_h, target_w) == (h, w):
        return plane, (h, w)
    pad_h, pad_w = target_h - h, target_w - w
    mode = "reflect" if pad_h < h and pad_w < w else "edge"
    return np.pad(plane, ((0, pad_h), (0, pad_w)), mode=mode), (h, w)


def _generate_chroma(gen: Generator, g: GrayImage, z: NoiseVector | None = None) -> ChromaImage:
    y, (h, w) = _pad_to_valid(g.y, 2**gen.config.n_down)
    x = torch.from_numpy(y[None, None].astype(np.float32))
    zt = None if z is None else torch.from_numpy(z.values[None].astype(np.float32))
    with torch.no_grad():
        uv = gen(x, zt) if zt is not None else gen(x)
    arr = uv.numpy().astype(np.float64)[0]
    return ChromaImage(u=arr[0, :h, :w], v=arr[1, :h, :w])


def _generate_rgb(gen: Generator, g: GrayImage) -> RgbImage:
    y, (h, w) = _pad_to_valid(g.y, 2**gen.config.n_down)
    x = torch.from_numpy(np.repeat(y[None, None], 3, axis=1).astype(np.float32))
    with torch.no_grad():
        out = gen(x)
    arr = out.numpy().astype(np.float64)[0, :, :h, :w].transpose(1, 2, 0)
    return RgbImage(data=np.clip(arr, 0.0, 1.0))


def project_chroma_into_gamut(g: GrayImage, c: ChromaImage) -> ChromaImage:
    """Scale chroma toward zero, per pixel, until the YUV triple maps into
    the RGB unit cube.

    Luma is untouched, so the RGB conversion afterwards needs no clipping
    that would shift it. The scale factor lies in [0, 1]; in-gamut pixels
    keep factor 1.
    """
    if (g.height, g.width) != (c.height, c.width):
        raise ShapeMismatchError(
            f"luma {g.height}x{g.width} vs chroma {c.height}x{c.width}"
        )
    m = colorspace.YUV_TO_RGB
    base = g.y[None, :, :] * m[:, 0, None, None]
    delta = c.u[None, :, :] * m[:, 1, None, None] + c.v[None, :, :] * m[:, 2, None, None]
    tiny = 1e-12
    with np.errstate(divide="ignore", invalid="ignore"):
        t_hi = np.where(delta > tiny, (1.0 - base) / delta, np.inf)
        t_lo = np.where(delta < -tiny, -base / delta, np.inf)
    t = np.minimum(np.min(t_hi, axis=0), np.min(t_lo, axis=0))
    t = np.clip(t, 0.0, 1.0) * (1.0 - 1e-12)
    return ChromaImage(u=c.u * t, v=c.v * t)


def colorize(ck: Checkpoint, g: GrayImage, *, noise_seed: int | None = None) -> ColorizationResult:
    """Colorize one grayscale image with the checkpoint's G->C generator.

    ``noise_seed`` seeds the latent of the wgan/gan baselines (default 0, so
    repeated calls are reproducible; vary it to sample other colorings). The
    cycle generators are noise-free and reject it.
    """
    regime = ck.config.regime
    if regime in CYCLE_REGIMES and noise_seed is not None:
        raise ValueError(
            f"noise_seed applies only to regimes {BASELINE_REGIMES}; "
            f"the {regime} generator is noise-free"
        )
    if regime == REGIME_COND_CYCLEGAN:
        gen = restore(ck.params["gen_g2c"])
        uv = project_chroma_into_gamut(g, _generate_chroma(gen, g))
        output = colorspace.yuv_to_rgb(combine_luma_chroma(g, uv))
    elif regime in BASELINE_REGIMES:
        gen = restore(ck.params["generator"])
        z = sample_noise(gen.config.noise_dim, 0 if noise_seed is None else noise_seed)
        uv = project_chroma_into_gamut(g, _generate_chroma(gen, g, z))
        output = colorspace.yuv_to_rgb(combine_luma_chroma(g, uv))
    else:
        gen = restore(ck.params["gen_g2c"])
        output = _generate_rgb(gen, g)
    return ColorizationResult(
        output=output, source=g, checkpoint_id=checkpoint_id(ck), regime=regime
    )


def colorize_directory(
    ck: Checkpoint,
    in_dir: str | Path,
    out_dir: str | Path,
    spec: PreparationSpec,
    *,
    noise_seed: int | None = None,
) -> ColorizeSummary:
    """Colorize every readable image under ``in_dir`` into ``out_dir``.

    Each image is prepared per ``spec``, reduced to its grayscale view, and
    colorized; outputs are PNGs named after the input's stem. Files that are
    not readable images are listed as failures, never fatal.
    """
    in_dir, out_dir = Path(in_dir), Path(out_dir)
    if not in_dir.is_dir():
        raise FileNotFoundError(f"input directory {in_dir} does not exist")
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = ColorizeSummary()
    for path in sorted(p for p in in_dir.iterdir() if p.is_file()):
        try:
            img = load_image(path)
        except UnsupportedImageError as exc:
            summary.failures.append((path.name, str(exc)))
            continue
        g = derive_gray(prepare(img, spec))
        result = colorize(ck, g, noise_seed=noise_seed)
        save_image(result.output, out_dir / f"{path.stem}.png")
        summary.converted += 1
    return summary
