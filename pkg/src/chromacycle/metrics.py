"""Quantitative evaluation: PSNR, cycle reconstruction error, and the
loss-stability statistics used to compare training regimes.

Stability of one run is summarized by the mean and sample variance of a
loss series over its final window; regimes are compared by the median of
those statistics across runs.
"""

from __future__ import annotations

import json
import statistics
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from . import inference
from .colorspace import RgbImage, grayscale_of, rgb_to_yuv
from .dataio import (
    RESIZE_THEN_CENTER_CROP,
    DatasetManifest,
    PreparationSpec,
    load_image,
    prepare,
)
from .errors import ManifestError, RegimeMismatchError, ShapeMismatchError
from .losses import cycle_consistency_loss
from .training import (
    CYCLE_REGIMES,
    REGIME_COND_CYCLEGAN,
    Checkpoint,
    LossLog,
    restore_networks,
)

IDENTICAL = "identical"


def psnr(a: RgbImage, b: RgbImage) -> float | str:
    """Peak signal-to-noise ratio in dB over all channels, peak 1.0.

    Returns the string sentinel "identical" instead of infinity when the
    images match exactly.
    """
    if a.data.shape != b.data.shape:
        raise ShapeMismatchError(f"psnr inputs {a.data.shape} vs {b.data.shape}")
    mse = float(np.mean((a.data - b.data) ** 2))
    if mse == 0.0:
        return IDENTICAL
    return 10.0 * np.log10(1.0 / mse)


def _eval_prep(ck: Checkpoint) -> PreparationSpec:
    size = ck.config.image_size
    return PreparationSpec(load_size=size, crop_size=size, mode=RESIZE_THEN_CENTER_CROP)


def cycle_reconstruction_error(ck: Checkpoint, data: DatasetManifest) -> float:
    """Mean cycle-consistency loss over the test split.

    Each test image supplies both sides of the cycle: its grayscale view
    goes through gen_g2c then gen_c2g, its color content the other way
    round. Preparation is the deterministic center crop at the trained
    size, so repeated evaluations agree bit for bit.
    """
    if ck.config.regime not in CYCLE_REGIMES:
        raise RegimeMismatchError(
            f"cycle_reconstruction_error needs a cycle-regime checkpoint, "
            f"got {ck.config.regime!r}"
        )
    entries = data.select("test", "color")
    if not entries:
        raise ManifestError("manifest has no color entries in the test split")
    nets = restore_networks(ck)
    g2c, c2g = nets["gen_g2c"], nets["gen_c2g"]
    conditional = ck.config.regime == REGIME_COND_CYCLEGAN
    spec = _eval_prep(ck)

    total = 0.0
    with torch.no_grad():
        for entry in entries:
            img = prepare(load_image(data.resolve(entry)), spec)
            if conditional:
                yuv = rgb_to_yuv(img)
                y = torch.from_numpy(yuv.y[None, None].astype(np.float32))
                uv = torch.from_numpy(np.stack([yuv.u, yuv.v])[None].astype(np.float32))
                rec_y = c2g(g2c(y))
                rec_uv = g2c(c2g(uv))
                cyc = cycle_consistency_loss(y, rec_y, uv, rec_uv)
            else:
                gray = grayscale_of(img)
                g_rgb = torch.from_numpy(
                    np.repeat(gray.y[None, None], 3, axis=1).astype(np.float32)
                )
                c_rgb = torch.from_numpy(
                    img.data.transpose(2, 0, 1)[None].astype(np.float32)
                )
                cyc = cycle_consistency_loss(g_rgb, c2g(g2c(g_rgb)), c_rgb, g2c(c2g(c_rgb)))
            total += float(cyc.value)
    return total / len(entries)


@dataclass(frozen=True)
class RunStability:
    run_id: str
    regime: str
    mean: float
    variance: float
    window: int

    def __post_init__(self):
        if self.window < 2:
            raise ValueError(f"window must be >= 2, got {self.window}")
        if self.variance < 0:
            raise ValueError(f"variance must be >= 0, got {self.variance}")


@dataclass(frozen=True)
class StabilityReport:
    loss_name: str
    window: int
    runs: tuple[RunStability, ...]
    median_mean: dict[str, float]
    median_variance: dict[str, float]
    lower_loss_regime: str
    more_stable_regime: str

    def to_json(self) -> dict:
        return {
            "loss_name": self.loss_name,
            "window": self.window,
            "runs": [
                {
                    "run_id": r.run_id,
                    "regime": r.regime,
                    "mean": r.mean,
                    "variance": r.variance,
                    "window": r.window,
                }
                for r in self.runs
            ],
            "median_mean": dict(self.median_mean),
            "median_variance": dict(self.median_variance),
            "lower_loss_regime": self.lower_loss_regime,
            "more_stable_regime": self.more_stable_regime,
        }


def _argmin_regime(per_regime: dict[str, float]) -> str:
    """Regime with the strictly smallest statistic, else "tie"."""
    if len(per_regime) < 2:
        return "tie"
    best = min(per_regime.values())
    winners = [regime for regime, v in per_regime.items() if v == best]
    return winners[0] if len(winners) == 1 else "tie"


def stability_report(logs: list[LossLog], loss_name: str = "cyc", window: int = 100) -> StabilityReport:
    """Final-window stability statistics per run, compared across regimes.

    For every log the last ``window`` values of ``loss_name`` give a mean
    and a sample variance. Regimes are then ranked by the median of each
    statistic over their runs; a regime wins a verdict field only when its
    median is strictly smallest.
    """
    if window < 2:
        raise ValueError(f"window must be >= 2, got {window}")
    if not logs:
        raise ValueError("at least one loss log is required")
    runs = []
    for log in logs:
        series = log.values(loss_name)
        if len(series) < window:
            raise ValueError(
                f"run {log.run_id!r} has {len(series)} rows of {loss_name!r}, "
                f"needs at least {window}"
            )
        tail = series[-window:]
        runs.append(
            RunStability(
                run_id=log.run_id,
                regime=log.regime,
                mean=statistics.fmean(tail),
                variance=statistics.variance(tail),
                window=window,
            )
        )
    regimes = sorted({r.regime for r in runs})
    median_mean = {
        regime: statistics.median(r.mean for r in runs if r.regime == regime)
        for regime in regimes
    }
    median_variance = {
        regime: statistics.median(r.variance for r in runs if r.regime == regime)
        for regime in regimes
    }
    return StabilityReport(
        loss_name=loss_name,
        window=window,
        runs=tuple(runs),
        median_mean=median_mean,
        median_variance=median_variance,
        lower_loss_regime=_argmin_regime(median_mean),
        more_stable_regime=_argmin_regime(median_variance),
    )


def write_stability_report(report: StabilityReport, json_path: str | Path) -> None:
    """Serialize the report as JSON plus a companion CSV of the per-run
    window statistics (same path with a .csv suffix), for plotting."""
    json_path = Path(json_path)
    json_path.write_text(json.dumps(report.to_json(), indent=2) + "\n", encoding="ascii")
    lines = ["run_id,regime,mean,variance,window"]
    for r in report.runs:
        lines.append(f"{r.run_id},{r.regime},{r.mean:.16e},{r.variance:.16e},{r.window}")
    json_path.with_suffix(".csv").write_text("\n".join(lines) + "\n", encoding="ascii")


def evaluate_checkpoint(ck: Checkpoint, data: DatasetManifest) -> dict:
    """PSNR of colorized test images against their ground truth, plus the
    cycle reconstruction error for cycle-regime checkpoints."""
    entries = data.select("test", "color")
    if not entries:
        raise ManifestError("manifest has no color entries in the test split")
    spec = _eval_prep(ck)
    values: list[float | str] = []
    for entry in entries:
        img = prepare(load_image(data.resolve(entry)), spec)
        out = inference.colorize(ck, grayscale_of(img)).output
        values.append(psnr(out, img))
    numeric = [v for v in values if not isinstance(v, str)]
    result: dict = {
        "regime": ck.config.regime,
        "count": len(values),
        "psnr_per_image_db": values,
        "psnr_mean_db": statistics.fmean(numeric) if numeric else None,
    }
    if ck.config.regime in CYCLE_REGIMES:
        result["cycle_reconstruction_error"] = cycle_reconstruction_error(ck, data)
    return result
