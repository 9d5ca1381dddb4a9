"""Generator and discriminator networks for all four training regimes.

Generators are fully convolutional encoder / residual / decoder stacks with
instance normalization; outputs are tanh-bounded into the range of the
channel type they produce (chroma planes are zero-centered, luma and RGB are
not). Discriminators are stacked stride-2 convolutions ending in a 1-channel
logit map averaged to one score per image.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field

import numpy as np
import torch
from torch import nn

from .colorspace import ChromaImage, GrayImage, RgbImage, YuvImage
from .errors import ShapeMismatchError

WASSERSTEIN_SCALAR = "wasserstein_scalar"
SIGMOID_PROBABILITY = "sigmoid_probability"

_VALID_CHANNELS = (1, 2, 3)


def _fingerprint(kind: str, config) -> str:
    blob = json.dumps({"kind": kind, **asdict(config)}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class GeneratorConfig:
    in_channels: int
    out_channels: int
    base_width: int = 16
    n_down: int = 2
    n_res: int = 2
    use_noise: bool = False
    noise_dim: int = 16

    def __post_init__(self):
        if self.in_channels not in _VALID_CHANNELS or self.out_channels not in _VALID_CHANNELS:
            raise ValueError("generator channels must be 1, 2, or 3")
        if self.base_width < 4:
            raise ValueError("base_width must be >= 4")
        if self.n_down < 0 or self.n_res < 0:
            raise ValueError("n_down and n_res must be >= 0")
        if self.use_noise and self.noise_dim < 1:
            raise ValueError("noise_dim must be >= 1 when use_noise is set")

    @property
    def fingerprint(self) -> str:
        return _fingerprint("generator", self)


@dataclass(frozen=True)
class DiscriminatorConfig:
    in_channels: int
    base_width: int = 16
    n_layers: int = 3
    head: str = SIGMOID_PROBABILITY

    def __post_init__(self):
        if self.in_channels not in _VALID_CHANNELS:
            raise ValueError("discriminator in_channels must be 1, 2, or 3")
        if self.n_layers < 1:
            raise ValueError("n_layers must be >= 1")
        if self.head not in (WASSERSTEIN_SCALAR, SIGMOID_PROBABILITY):
            raise ValueError(f"unknown discriminator head {self.head!r}")

    @property
    def fingerprint(self) -> str:
        return _fingerprint("discriminator", self)


@dataclass(frozen=True)
class NoiseVector:
    """A standard-normal latent vector for noise-conditioned generators."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if values.size < 1:
            raise ValueError("noise vector must have dim >= 1")
        if not np.all(np.isfinite(values)):
            raise ValueError("noise vector contains non-finite values")
        object.__setattr__(self, "values", values)

    @property
    def dim(self) -> int:
        return self.values.size


def sample_noise(dim: int, seed: int | torch.Generator | None = None) -> NoiseVector:
    gen = seed if isinstance(seed, torch.Generator) else torch.Generator()
    if isinstance(seed, int):
        gen.manual_seed(seed)
    values = torch.randn(dim, generator=gen, dtype=torch.float64)
    return NoiseVector(values=values.numpy())


class ResidualBlock(nn.Module):
    def __init__(self, width: int):
        super().__init__()
        self.body = nn.Sequential(
            nn.Conv2d(width, width, 3, padding=1),
            nn.InstanceNorm2d(width, affine=True),
            nn.ReLU(inplace=True),
            nn.Conv2d(width, width, 3, padding=1),
            nn.InstanceNorm2d(width, affine=True),
        )

    def forward(self, x):
        return x + self.body(x)


class Generator(nn.Module):
    """Encoder -> residual blocks -> decoder, spatial size preserving."""

    def __init__(self, config: GeneratorConfig):
        super().__init__()
        self.config = config
        w = config.base_width
        in_ch = config.in_channels + (config.noise_dim if config.use_noise else 0)
        self.stem = nn.Sequential(
            nn.Conv2d(in_ch, w, 3, padding=1, padding_mode="reflect"),
            nn.InstanceNorm2d(w, affine=True),
            nn.ReLU(inplace=True),
        )
        down = []
        for i in range(config.n_down):
            down += [
                nn.Conv2d(w * 2**i, w * 2 ** (i + 1), 3, stride=2, padding=1),
                nn.InstanceNorm2d(w * 2 ** (i + 1), affine=True),
                nn.ReLU(inplace=True),
            ]
        self.encoder = nn.Sequential(*down)
        wb = w * 2**config.n_down
        self.blocks = nn.Sequential(*[ResidualBlock(wb) for _ in range(config.n_res)])
        up = []
        for i in range(config.n_down, 0, -1):
            up += [
                nn.ConvTranspose2d(
                    w * 2**i, w * 2 ** (i - 1), 3, stride=2, padding=1, output_padding=1
                ),
                nn.InstanceNorm2d(w * 2 ** (i - 1), affine=True),
                nn.ReLU(inplace=True),
            ]
        self.decoder = nn.Sequential(*up)
        self.head = nn.Conv2d(w, config.out_channels, 3, padding=1, padding_mode="reflect")

    def forward(self, x: torch.Tensor, z: torch.Tensor | None = None) -> torch.Tensor:
        cfg = self.config
        if x.ndim != 4 or x.shape[1] != cfg.in_channels:
            raise ShapeMismatchError(
                f"expected (B, {cfg.in_channels}, H, W) input, got {tuple(x.shape)}"
            )
        factor = 2**cfg.n_down
        if x.shape[2] % factor or x.shape[3] % factor:
            raise ShapeMismatchError(
                f"spatial size {tuple(x.shape[2:])} not divisible by {factor}"
            )
        if cfg.use_noise:
            if z is None:
                raise ValueError("generator configured with use_noise requires z")
            if z.ndim != 2 or z.shape != (x.shape[0], cfg.noise_dim):
                raise ShapeMismatchError(
                    f"expected noise of shape ({x.shape[0]}, {cfg.noise_dim}), "
                    f"got {tuple(z.shape)}"
                )
            planes = z[:, :, None, None].expand(-1, -1, x.shape[2], x.shape[3])
            x = torch.cat([x, planes], dim=1)
        elif z is not None:
            raise ValueError("generator has no noise input")
        h = self.head(self.decoder(self.blocks(self.encoder(self.stem(x)))))
        out = torch.tanh(h)
        if cfg.out_channels == 2:
            return 0.5 * out  # chroma planes, centered at zero
        return 0.5 * (out + 1.0)  # luma or RGB planes in [0, 1]


class Discriminator(nn.Module):
    """Stride-2 convolution stack ending in a patch-averaged scalar score."""

    def __init__(self, config: DiscriminatorConfig):
        super().__init__()
        self.config = config
        w = config.base_width
        layers: list[nn.Module] = [
            nn.Conv2d(config.in_channels, w, 4, stride=2, padding=1),
            nn.LeakyReLU(0.2, inplace=True),
        ]
        for i in range(1, config.n_layers):
            layers += [
                nn.Conv2d(w * 2 ** (i - 1), w * 2**i, 4, stride=2, padding=1),
                nn.InstanceNorm2d(w * 2**i, affine=True),
                nn.LeakyReLU(0.2, inplace=True),
            ]
        self.features = nn.Sequential(*layers)
        self.logits = nn.Conv2d(w * 2 ** (config.n_layers - 1), 1, 3, padding=1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        cfg = self.config
        if x.ndim != 4 or x.shape[1] != cfg.in_channels:
            raise ShapeMismatchError(
                f"expected (B, {cfg.in_channels}, H, W) input, got {tuple(x.shape)}"
            )
        if min(x.shape[2], x.shape[3]) < 2**cfg.n_layers:
            raise ShapeMismatchError(
                f"input {tuple(x.shape[2:])} too small for {cfg.n_layers} stride-2 layers"
            )
        score = self.logits(self.features(x)).mean(dim=(1, 2, 3))
        if cfg.head == SIGMOID_PROBABILITY:
            score = torch.sigmoid(score)
        return score


@dataclass
class ParameterSet:
    """Named weight tensors of one network plus its config fingerprint."""

    kind: str  # "generator" | "discriminator"
    config: GeneratorConfig | DiscriminatorConfig
    tensors: dict[str, np.ndarray] = field(repr=False)

    def __post_init__(self):
        for name, arr in self.tensors.items():
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"parameter tensor {name!r} has non-finite values")

    @property
    def fingerprint(self) -> str:
        return self.config.fingerprint


def snapshot(module: Generator | Discriminator) -> ParameterSet:
    kind = "generator" if isinstance(module, Generator) else "discriminator"
    tensors = {
        name: t.detach().cpu().numpy().copy() for name, t in module.state_dict().items()
    }
    return ParameterSet(kind=kind, config=module.config, tensors=tensors)


def restore(params: ParameterSet) -> Generator | Discriminator:
    module: Generator | Discriminator
    if params.kind == "generator":
        module = Generator(params.config)
    elif params.kind == "discriminator":
        module = Discriminator(params.config)
    else:
        raise ValueError(f"unknown parameter set kind {params.kind!r}")
    state = {k: torch.from_numpy(v.copy()) for k, v in params.tensors.items()}
    module.load_state_dict(state)
    return module


def _init_weights(module: nn.Module, seed: int) -> None:
    gen = torch.Generator().manual_seed(seed)
    for m in module.modules():
        if isinstance(m, (nn.Conv2d, nn.ConvTranspose2d)):
            m.weight.data.normal_(0.0, 0.02, generator=gen)
            if m.bias is not None:
                m.bias.data.zero_()


def init_generator(config: GeneratorConfig, seed: int) -> Generator:
    gen = Generator(config)
    _init_weights(gen, seed)
    return gen


def init_discriminator(config: DiscriminatorConfig, seed: int) -> Discriminator:
    dis = Discriminator(config)
    _init_weights(dis, seed)
    return dis


def init_params(config: GeneratorConfig | DiscriminatorConfig, seed: int) -> ParameterSet:
    """Deterministic parameter initialization for a network config."""
    if isinstance(config, GeneratorConfig):
        return snapshot(init_generator(config, seed))
    if isinstance(config, DiscriminatorConfig):
        return snapshot(init_discriminator(config, seed))
    raise TypeError(f"unsupported config type {type(config).__name__}")


# --- bridges between plane-based images and batched tensors ---


def gray_to_tensor(g: GrayImage) -> torch.Tensor:
    return torch.from_numpy(g.y[None, None].astype(np.float32))


def chroma_to_tensor(c: ChromaImage) -> torch.Tensor:
    return torch.from_numpy(np.stack([c.u, c.v])[None].astype(np.float32))


def yuv_to_tensor(img: YuvImage) -> torch.Tensor:
    return torch.from_numpy(np.stack([img.y, img.u, img.v])[None].astype(np.float32))


def rgb_to_tensor(img: RgbImage) -> torch.Tensor:
    return torch.from_numpy(img.data.transpose(2, 0, 1)[None].astype(np.float32))


def tensor_to_chroma(t: torch.Tensor) -> ChromaImage:
    arr = t.detach().numpy().astype(np.float64)
    return ChromaImage(u=arr[0, 0], v=arr[0, 1])


def tensor_to_gray(t: torch.Tensor) -> GrayImage:
    return GrayImage(y=t.detach().numpy().astype(np.float64)[0, 0])


def tensor_to_rgb(t: torch.Tensor) -> RgbImage:
    arr = t.detach().numpy().astype(np.float64)[0].transpose(1, 2, 0)
    return RgbImage(data=np.clip(arr, 0.0, 1.0))


def _as_module(params, expect: type) -> Generator | Discriminator:
    module = restore(params) if isinstance(params, ParameterSet) else params
    if not isinstance(module, expect):
        raise TypeError(f"expected {expect.__name__} parameters")
    return module


def baseline_generator_forward(
    params: ParameterSet | Generator, g: GrayImage, z: NoiseVector
) -> ChromaImage:
    """Noise-conditioned chroma prediction from a luma plane.

    The noise vector is broadcast to constant feature planes and joined at
    the first layer only.
    """
    gen = _as_module(params, Generator)
    if not gen.config.use_noise:
        raise ValueError("baseline generator requires a use_noise config")
    zt = torch.from_numpy(z.values[None].astype(np.float32))
    with torch.no_grad():
        out = gen(gray_to_tensor(g), zt)
    return tensor_to_chroma(out)


def gen_g2c_forward(params: ParameterSet | Generator, g: GrayImage) -> ChromaImage:
    """Luma -> chroma generator (the colorizing direction), noise-free."""
    gen = _as_module(params, Generator)
    if gen.config.use_noise:
        raise ValueError("conditional generator must be noise-free")
    with torch.no_grad():
        out = gen(gray_to_tensor(g))
    return tensor_to_chroma(out)


def gen_c2g_forward(params: ParameterSet | Generator, c: ChromaImage) -> GrayImage:
    """Chroma -> luma generator (the inverse direction of the cycle)."""
    gen = _as_module(params, Generator)
    with torch.no_grad():
        out = gen(chroma_to_tensor(c))
    return tensor_to_gray(out)


def discriminator_forward(params: ParameterSet | Discriminator, img: YuvImage) -> float:
    """Score one full YUV image: unbounded for the wasserstein head,
    in (0, 1) for the sigmoid head."""
    dis = _as_module(params, Discriminator)
    with torch.no_grad():
        score = dis(yuv_to_tensor(img))
    return float(score[0])
