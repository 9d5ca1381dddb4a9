"""Scikit-learn style estimator wrapping training and inference.

``GanColorizer`` follows the estimator protocol: constructor parameters are
stored verbatim, ``fit`` learns from color images, ``predict`` (alias
``transform``) colorizes grayscale arrays. ``get_params`` / ``set_params``
and ``clone`` come from ``BaseEstimator``.
"""

from __future__ import annotations

import tempfile
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import training
from .colorspace import GrayImage, RgbImage
from .dataio import DatasetManifest, ManifestEntry, load_manifest, save_image
from .training import REGIMES, default_config
from .validation import check_range


def _as_manifest(X) -> tuple[DatasetManifest, tempfile.TemporaryDirectory | None]:
    """Coerce fit input to a manifest; the temp dir (if any) must outlive training."""
    if isinstance(X, DatasetManifest):
        return X, None
    if isinstance(X, (str, Path)):
        path = Path(X)
        if path.is_dir():
            path = path / "manifest.json"
        return load_manifest(path), None
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 4 or X.shape[-1] != 3:
        raise ValueError(f"expected color images shaped (n, h, w, 3), got {X.shape}")
    check_range(X, 0.0, 1.0, name="images")
    tmp = tempfile.TemporaryDirectory(prefix="chromacycle-fit-")
    root = Path(tmp.name)
    entries = []
    for i, img in enumerate(X):
        name = f"train_{i:04d}.png"
        save_image(RgbImage(data=img), root / name)
        entries.append(ManifestEntry(path=name, split="train", domain="color"))
    return DatasetManifest(root=root, entries=entries), tmp


class GanColorizer(BaseEstimator):
    """Adversarial colorizer with a choice of training regime.

    Parameters mirror the training configuration; ``learning_rate=None``
    selects the regime's default (5e-5 for wgan, 2e-4 otherwise).
    ``noise_seed`` only affects prediction under the wgan/gan regimes.
    """

    def __init__(
        self,
        regime: str = "cond_cyclegan",
        iterations: int = 500,
        learning_rate: float | None = None,
        batch_size: int = 4,
        image_size: int = 64,
        lambda_cyc: float = 10.0,
        clip_value: float = 0.01,
        n_critic: int = 5,
        seed: int = 0,
        noise_seed: int | None = None,
    ):
        self.regime = regime
        self.iterations = iterations
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.image_size = image_size
        self.lambda_cyc = lambda_cyc
        self.clip_value = clip_value
        self.n_critic = n_critic
        self.seed = seed
        self.noise_seed = noise_seed

    def _config(self) -> training.TrainConfig:
        regime = self.regime.replace("-", "_")
        if regime not in REGIMES:
            raise ValueError(f"unknown regime {self.regime!r}")
        overrides = {
            "iterations": self.iterations,
            "batch_size": self.batch_size,
            "image_size": self.image_size,
            "lambda_cyc": self.lambda_cyc,
            "clip_value": self.clip_value,
            "n_critic": self.n_critic,
            "seed": self.seed,
        }
        if self.learning_rate is not None:
            overrides["learning_rate"] = self.learning_rate
        return default_config(regime, **overrides)

    def fit(self, X, y=None):
        """Train on color images: a manifest, a manifest path, or (n, h, w, 3) floats."""
        config = self._config()
        manifest, tmp = _as_manifest(X)
        try:
            self.checkpoint_, self.loss_log_ = training.train(config, manifest)
        finally:
            if tmp is not None:
                tmp.cleanup()
        self.n_iterations_ = config.iterations
        return self

    def predict(self, X):
        """Colorize grayscale input: (h, w) or (n, h, w) floats in [0, 1].

        Returns (h, w, 3) for a single image, (n, h, w, 3) for a batch.
        """
        check_is_fitted(self)
        from .inference import colorize

        X = np.asarray(X, dtype=np.float64)
        single = X.ndim == 2
        if single:
            X = X[None]
        if X.ndim != 3:
            raise ValueError(f"expected grayscale images shaped (n, h, w), got {X.shape}")
        check_range(X, 0.0, 1.0, name="images")
        kwargs = {} if self.noise_seed is None else {"noise_seed": self.noise_seed}
        out = np.stack(
            [
                colorize(self.checkpoint_, GrayImage(y=plane), **kwargs).output.data
                for plane in X
            ]
        )
        return out[0] if single else out

    def transform(self, X):
        return self.predict(X)

    def save(self, path: str | Path) -> None:
        check_is_fitted(self)
        training.save_checkpoint(self.checkpoint_, path)

    @classmethod
    def from_checkpoint(cls, path: str | Path) -> "GanColorizer":
        """Build a fitted estimator from a saved checkpoint file."""
        ck = training.load_checkpoint(path)
        cfg = ck.config
        est = cls(
            regime=cfg.regime,
            iterations=cfg.iterations,
            learning_rate=cfg.learning_rate,
            batch_size=cfg.batch_size,
            image_size=cfg.image_size,
            lambda_cyc=cfg.lambda_cyc,
            clip_value=cfg.clip_value,
            n_critic=cfg.n_critic,
            seed=cfg.seed,
        )
        est.checkpoint_ = ck
        est.n_iterations_ = ck.iteration
        return est
