"""Grayscale-to-color image translation with adversarial training regimes."""

from .colorspace import (
    ChromaImage,
    GrayImage,
    RgbImage,
    YuvImage,
    combine_luma_chroma,
    grayscale_of,
    replicate_gray_rgb,
    rgb_to_yuv,
    split_luma_chroma,
    yuv_to_rgb,
)
from .dataio import (
    DatasetManifest,
    ManifestEntry,
    PreparationSpec,
    derive_gray,
    generate_synthetic_dataset,
    load_image,
    load_manifest,
    prepare,
    sample_unpaired_batch,
    save_image,
    save_manifest,
)
from .errors import (
    CheckpointError,
    ChromaCycleError,
    ManifestError,
    RegimeMismatchError,
    ShapeMismatchError,
    TrainingDivergedError,
    UnsupportedImageError,
)
from .estimator import GanColorizer
from .inference import ColorizationResult, ColorizeSummary, colorize, colorize_directory
from .metrics import (
    RunStability,
    StabilityReport,
    cycle_reconstruction_error,
    evaluate_checkpoint,
    psnr,
    stability_report,
    write_stability_report,
)
from .training import (
    Checkpoint,
    LossLog,
    TrainConfig,
    default_config,
    load_checkpoint,
    read_loss_log,
    save_checkpoint,
    train,
    train_baseline,
    train_cyclegan,
    write_loss_log,
)

__version__ = "0.1.0"

__all__ = [
    "ChromaImage",
    "GrayImage",
    "RgbImage",
    "YuvImage",
    "combine_luma_chroma",
    "grayscale_of",
    "replicate_gray_rgb",
    "rgb_to_yuv",
    "split_luma_chroma",
    "yuv_to_rgb",
    "DatasetManifest",
    "ManifestEntry",
    "PreparationSpec",
    "derive_gray",
    "generate_synthetic_dataset",
    "load_image",
    "load_manifest",
    "prepare",
    "sample_unpaired_batch",
    "save_image",
    "save_manifest",
    "CheckpointError",
    "ChromaCycleError",
    "ManifestError",
    "RegimeMismatchError",
    "ShapeMismatchError",
    "TrainingDivergedError",
    "UnsupportedImageError",
    "GanColorizer",
    "ColorizationResult",
    "ColorizeSummary",
    "colorize",
    "colorize_directory",
    "RunStability",
    "StabilityReport",
    "cycle_reconstruction_error",
    "evaluate_checkpoint",
    "psnr",
    "stability_report",
    "write_stability_report",
    "Checkpoint",
    "LossLog",
    "TrainConfig",
    "default_config",
    "load_checkpoint",
    "read_loss_log",
    "save_checkpoint",
    "train",
    "train_baseline",
    "train_cyclegan",
    "write_loss_log",
]
