"""RGB <-> YUV conversion and luma/chroma channel surgery.

Uses the BT.601 full-range convention with chroma centered at zero:
Y in [0, 1], U and V in [-0.5, 0.5]. All pixel data is floating point;
8-bit quantization happens only at file I/O boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeMismatchError
from .validation import check_plane, check_range

# BT.601 full-range RGB -> YUV. Luma row sums to 1, chroma rows to 0, so
# neutral gray maps to (Y, 0, 0).
RGB_TO_YUV = np.array(
    [
        [0.299, 0.587, 0.114],
        [-0.168736, -0.331264, 0.5],
        [0.5, -0.418688, -0.081312],
    ],
    dtype=np.float64,
)

# Exact numerical inverse, not the conventional rounded constants: the
# round-trip contract is tighter than the rounded inverse can deliver.
YUV_TO_RGB = np.linalg.inv(RGB_TO_YUV)


@dataclass(frozen=True)
class RgbImage:
    """H x W x 3 image, channels R,G,B, every component in [0, 1]."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 3 or data.shape[2] != 3 or data.shape[0] < 1 or data.shape[1] < 1:
            raise ShapeMismatchError(f"expected H x W x 3 array, got shape {data.shape}")
        check_range(data, 0.0, 1.0, name="rgb")
        object.__setattr__(self, "data", data)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class GrayImage:
    """Single luma plane, values in [0, 1]."""

    y: np.ndarray

    def __post_init__(self):
        y = check_plane(self.y, name="y")
        check_range(y, 0.0, 1.0, name="y")
        object.__setattr__(self, "y", y)

    @property
    def height(self) -> int:
        return self.y.shape[0]

    @property
    def width(self) -> int:
        return self.y.shape[1]


@dataclass(frozen=True)
class ChromaImage:
    """U and V planes, values in [-0.5, 0.5], identical shapes."""

    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        u = check_plane(self.u, name="u")
        v = check_plane(self.v, name="v")
        if u.shape != v.shape:
            raise ShapeMismatchError(f"u shape {u.shape} != v shape {v.shape}")
        check_range(u, -0.5, 0.5, name="u")
        check_range(v, -0.5, 0.5, name="v")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @property
    def height(self) -> int:
        return self.u.shape[0]

    @property
    def width(self) -> int:
        return self.u.shape[1]


@dataclass(frozen=True)
class YuvImage:
    """Full YUV image as three planes sharing one H x W shape."""

    y: np.ndarray
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        y = check_plane(self.y, name="y")
        u = check_plane(self.u, name="u")
        v = check_plane(self.v, name="v")
        if not (y.shape == u.shape == v.shape):
            raise ShapeMismatchError(
                f"planes disagree: y {y.shape}, u {u.shape}, v {v.shape}"
            )
        check_range(y, 0.0, 1.0, name="y")
        check_range(u, -0.5, 0.5, name="u")
        check_range(v, -0.5, 0.5, name="v")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @property
    def height(self) -> int:
        return self.y.shape[0]

    @property
    def width(self) -> int:
        return self.y.shape[1]


def rgb_to_yuv(img: RgbImage) -> YuvImage:
    """Convert an RGB image to YUV (BT.601 full range, zero-centered chroma).

    Chroma is clamped to [-0.5, 0.5]: the transform only leaves that range
    by float rounding, never by more than a few ulps.
    """
    yuv = img.data @ RGB_TO_YUV.T
    y = np.clip(yuv[..., 0], 0.0, 1.0)
    u = np.clip(yuv[..., 1], -0.5, 0.5)
    v = np.clip(yuv[..., 2], -0.5, 0.5)
    return YuvImage(y=y, u=u, v=v)


def yuv_to_rgb(img: YuvImage) -> RgbImage:
    """Invert rgb_to_yuv, clamping to [0, 1].

    Generated chroma may describe colors outside the RGB gamut; those
    pixels are clamped componentwise.
    """
    yuv = np.stack([img.y, img.u, img.v], axis=-1)
    rgb = yuv @ YUV_TO_RGB.T
    return RgbImage(data=np.clip(rgb, 0.0, 1.0))


def split_luma_chroma(img: YuvImage) -> tuple[GrayImage, ChromaImage]:
    """Split a YUV image into its luma plane and chroma plane pair."""
    return GrayImage(y=img.y), ChromaImage(u=img.u, v=img.v)


def combine_luma_chroma(g: GrayImage, c: ChromaImage) -> YuvImage:
    """Concatenate a luma plane with a chroma pair, without modification."""
    if g.y.shape != c.u.shape:
        raise ShapeMismatchError(
            f"luma shape {g.y.shape} != chroma shape {c.u.shape}"
        )
    return YuvImage(y=g.y, u=c.u, v=c.v)


def grayscale_of(img: RgbImage) -> GrayImage:
    """Luma plane of an RGB image (BT.601 weights)."""
    return split_luma_chroma(rgb_to_yuv(img))[0]


def neutral_chroma(height: int, width: int) -> ChromaImage:
    """All-zero chroma: the YUV rendering of a purely grayscale image."""
    zeros = np.zeros((height, width), dtype=np.float64)
    return ChromaImage(u=zeros, v=zeros.copy())


def replicate_gray_rgb(g: GrayImage) -> RgbImage:
    """Render a grayscale image as 3-channel RGB with equal channels."""
    return RgbImage(data=np.repeat(g.y[:, :, None], 3, axis=2))
