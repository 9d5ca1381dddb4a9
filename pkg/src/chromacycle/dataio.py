"""Dataset manifests, image file I/O, preparation pipelines, and batch sampling.

A dataset is a directory of 8-bit raster images plus a ``manifest.json``
declaring each file's split (train/test) and domain (color/gray). Grayscale
training inputs keep only the luma plane; where a full YUV image is needed
the chroma planes are zero-filled.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from . import colorspace
from .colorspace import GrayImage, RgbImage, YuvImage
from .errors import ManifestError, UnsupportedImageError
from .validation import check_count

RESIZE_ONLY = "resize_only"
RESIZE_THEN_RANDOM_CROP = "resize_then_random_crop"
RESIZE_THEN_CENTER_CROP = "resize_then_center_crop"
_MODES = (RESIZE_ONLY, RESIZE_THEN_RANDOM_CROP, RESIZE_THEN_CENTER_CROP)

_SPLITS = ("train", "test")
_DOMAINS = ("color", "gray")

# Flat, saturated fill colors for synthetic images (deliberately comic-like).
_PALETTE = np.array(
    [
        (0.90, 0.10, 0.12), (0.10, 0.55, 0.90), (0.98, 0.80, 0.10),
        (0.15, 0.70, 0.25), (0.60, 0.20, 0.75), (0.95, 0.45, 0.10),
        (0.10, 0.80, 0.75), (0.85, 0.25, 0.55), (0.35, 0.35, 0.95),
        (0.70, 0.85, 0.20), (0.55, 0.30, 0.10), (0.92, 0.92, 0.88),
    ]
)


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    split: str
    domain: str


@dataclass
class DatasetManifest:
    """Declarative listing of image files with split and domain tags."""

    root: Path
    entries: list[ManifestEntry]

    def select(self, split: str, domain: str | None = None) -> list[ManifestEntry]:
        return [
            e
            for e in self.entries
            if e.split == split and (domain is None or e.domain == domain)
        ]

    def resolve(self, entry: ManifestEntry) -> Path:
        return self.root / entry.path

    def to_json(self) -> dict:
        return {
            "root": str(self.root),
            "entries": [
                {"path": e.path, "split": e.split, "domain": e.domain}
                for e in self.entries
            ],
        }


@dataclass(frozen=True)
class PreparationSpec:
    """How a raw image is brought to the working size."""

    load_size: int
    crop_size: int
    mode: str = RESIZE_ONLY
    seed: int = 0

    def __post_init__(self):
        check_count(self.load_size, "load_size")
        check_count(self.crop_size, "crop_size")
        if self.crop_size > self.load_size:
            raise ValueError(
                f"crop_size {self.crop_size} exceeds load_size {self.load_size}"
            )
        if self.mode not in _MODES:
            raise ValueError(f"unknown preparation mode {self.mode!r}")


@dataclass(frozen=True)
class SamplePair:
    """One grayscale sample and one color sample, drawn independently."""

    gray: GrayImage
    color_yuv: YuvImage
    provenance: tuple[str, str]


def save_manifest(manifest: DatasetManifest, path: str | Path) -> None:
    Path(path).write_text(json.dumps(manifest.to_json(), indent=2) + "\n")


def load_manifest(path: str | Path) -> DatasetManifest:
    """Read and validate a manifest.json.

    A relative root is resolved against the manifest's own directory. Every
    referenced file must exist, and no path may appear in both splits.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"manifest not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ManifestError(f"manifest {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "root" not in doc or "entries" not in doc:
        raise ManifestError(f"manifest {path} missing 'root' or 'entries'")
    root = Path(doc["root"])
    if not root.is_absolute():
        root = path.parent / root
    entries = []
    seen: dict[str, str] = {}
    for raw in doc["entries"]:
        try:
            entry = ManifestEntry(
                path=raw["path"], split=raw["split"], domain=raw["domain"]
            )
        except (TypeError, KeyError) as exc:
            raise ManifestError(f"malformed manifest entry {raw!r}") from exc
        if entry.split not in _SPLITS:
            raise ManifestError(f"unknown split {entry.split!r} in {path}")
        if entry.domain not in _DOMAINS:
            raise ManifestError(f"unknown domain {entry.domain!r} in {path}")
        if entry.path in seen and seen[entry.path] != entry.split:
            raise ManifestError(
                f"{entry.path!r} appears in both splits; splits must be disjoint"
            )
        seen[entry.path] = entry.split
        if not (root / entry.path).is_file():
            raise ManifestError(f"manifest references missing file {root / entry.path}")
        entries.append(entry)
    return DatasetManifest(root=root, entries=entries)


def load_image(path: str | Path) -> RgbImage:
    """Load an 8-bit raster file, mapping samples to [0, 1] by /255."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"image not found: {path}")
    try:
        with Image.open(path) as im:
            rgb = im.convert("RGB")
            data = np.asarray(rgb, dtype=np.float64) / 255.0
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise UnsupportedImageError(f"cannot decode {path}: {exc}") from exc
    return RgbImage(data=data)


def save_image(img: RgbImage, path: str | Path) -> None:
    """Write an RGB image as an 8-bit PNG (lossless).

    Save-then-load round-trips within 1/255 per component.
    """
    path = Path(path)
    if not path.parent.is_dir():
        raise FileNotFoundError(f"output directory does not exist: {path.parent}")
    quantized = np.round(img.data * 255.0).astype(np.uint8)
    Image.fromarray(quantized, mode="RGB").save(path, format="PNG")


def _resize_bilinear(img: RgbImage, size: int) -> RgbImage:
    planes = []
    for ch in range(3):
        plane = Image.fromarray(img.data[..., ch].astype(np.float32), mode="F")
        resized = plane.resize((size, size), resample=Image.Resampling.BILINEAR)
        planes.append(np.asarray(resized, dtype=np.float64))
    # Resampling can overshoot the hull by float error only.
    return RgbImage(data=np.clip(np.stack(planes, axis=-1), 0.0, 1.0))


def prepare(
    img: RgbImage, spec: PreparationSpec, rng: np.random.Generator | None = None
) -> RgbImage:
    """Resize (and optionally crop) an image per the preparation spec.

    Random crop offsets come from ``rng`` when given, else from a generator
    seeded with ``spec.seed``, so a bare call is deterministic.
    """
    resized = _resize_bilinear(img, spec.load_size)
    if spec.mode == RESIZE_ONLY:
        return resized
    margin = spec.load_size - spec.crop_size
    if spec.mode == RESIZE_THEN_CENTER_CROP:
        i = j = margin // 2
    else:
        if rng is None:
            rng = np.random.default_rng(spec.seed)
        i = int(rng.integers(0, margin + 1))
        j = int(rng.integers(0, margin + 1))
    window = resized.data[i : i + spec.crop_size, j : j + spec.crop_size, :]
    return RgbImage(data=window.copy())


def derive_gray(img: RgbImage) -> GrayImage:
    """Grayscale view of a color image: keep luma, discard chroma."""
    return colorspace.grayscale_of(img)


def gray_as_yuv(g: GrayImage) -> YuvImage:
    """Grayscale image rendered as full YUV (chroma zero-filled)."""
    return colorspace.combine_luma_chroma(
        g, colorspace.neutral_chroma(g.height, g.width)
    )


def sample_unpaired_batch(
    manifest: DatasetManifest,
    spec: PreparationSpec,
    batch: int,
    rng_seed: int | np.random.Generator,
) -> list[SamplePair]:
    """Draw ``batch`` unpaired (gray, color) sample pairs from the train split.

    Gray and color sources are chosen independently. Gray sources come from
    gray-domain entries when the manifest has any, otherwise grayscale views
    of the color entries are used. Deterministic under a fixed seed.
    """
    check_count(batch, "batch")
    rng = (
        rng_seed
        if isinstance(rng_seed, np.random.Generator)
        else np.random.default_rng(rng_seed)
    )
    color_entries = manifest.select("train", "color")
    if not color_entries:
        raise ManifestError("manifest has no color entries in the train split")
    gray_entries = manifest.select("train", "gray") or color_entries

    pairs = []
    for _ in range(batch):
        g_entry = gray_entries[int(rng.integers(0, len(gray_entries)))]
        c_entry = color_entries[int(rng.integers(0, len(color_entries)))]
        g_img = prepare(load_image(manifest.resolve(g_entry)), spec, rng=rng)
        c_img = prepare(load_image(manifest.resolve(c_entry)), spec, rng=rng)
        pairs.append(
            SamplePair(
                gray=derive_gray(g_img),
                color_yuv=colorspace.rgb_to_yuv(c_img),
                provenance=(g_entry.path, c_entry.path),
            )
        )
    return pairs


def _draw_shapes(rng: np.random.Generator, size: int) -> np.ndarray:
    """One flat-color composition: background plus 2-4 solid shapes."""
    colors = _PALETTE[rng.permutation(len(_PALETTE))]
    canvas = np.empty((size, size, 3))
    canvas[:] = colors[0]
    yy, xx = np.mgrid[0:size, 0:size]
    n_shapes = int(rng.integers(2, 5))
    for k in range(n_shapes):
        color = colors[1 + k]  # distinct from background by construction
        if rng.random() < 0.5:
            cx, cy = rng.uniform(0.15, 0.85, size=2) * size
            r = rng.uniform(0.1, 0.3) * size
            mask = (xx - cx) ** 2 + (yy - cy) ** 2 <= r**2
        else:
            x0, y0 = rng.uniform(0.0, 0.6, size=2) * size
            w, h = rng.uniform(0.2, 0.4, size=2) * size
            mask = (xx >= x0) & (xx < x0 + w) & (yy >= y0) & (yy < y0 + h)
        canvas[mask] = color
    return canvas


def generate_synthetic_dataset(
    out_dir: str | Path,
    n: int,
    size: int,
    seed: int,
    test_fraction: float = 0.0,
) -> DatasetManifest:
    """Write ``n`` synthetic flat-color images plus a manifest.json.

    Content is deterministic under the seed. With a positive
    ``test_fraction`` the last entries are tagged split=test.
    """
    check_count(n, "n")
    check_count(size, "size")
    out_dir = Path(out_dir)
    if not out_dir.parent.exists():
        raise FileNotFoundError(f"cannot create dataset under {out_dir.parent}")
    out_dir.mkdir(exist_ok=True)
    rng = np.random.default_rng(seed)
    n_test = int(round(n * test_fraction))
    entries = []
    for i in range(n):
        name = f"synthetic_{i:04d}.png"
        save_image(RgbImage(data=_draw_shapes(rng, size)), out_dir / name)
        split = "test" if i >= n - n_test else "train"
        entries.append(ManifestEntry(path=name, split=split, domain="color"))
    manifest = DatasetManifest(root=out_dir, entries=entries)
    save_manifest(
        DatasetManifest(root=Path("."), entries=entries), out_dir / "manifest.json"
    )
    return manifest
