"""Optimization loops for the four adversarial regimes.

One loop owns all parameter sets exclusively. Every random draw comes from
two local generators (one numpy for sampling, one torch for noise) seeded by
``TrainConfig.seed``, so a fixed config fixes the entire trajectory. While a
loop runs, torch is pinned to one CPU thread; reduction order, and with it
the loss-log bytes, would otherwise depend on the host's thread count.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
import torch

from . import losses
from .dataio import DatasetManifest, PreparationSpec, sample_unpaired_batch
from .errors import CheckpointError, RegimeMismatchError, TrainingDivergedError
from .models import (
    SIGMOID_PROBABILITY,
    WASSERSTEIN_SCALAR,
    Discriminator,
    DiscriminatorConfig,
    Generator,
    GeneratorConfig,
    ParameterSet,
    init_discriminator,
    init_generator,
    restore,
    snapshot,
)
from .validation import check_count

REGIME_WGAN = "wgan"
REGIME_GAN = "gan"
REGIME_CYCLEGAN = "cyclegan"
REGIME_COND_CYCLEGAN = "cond_cyclegan"
REGIMES = (REGIME_WGAN, REGIME_GAN, REGIME_CYCLEGAN, REGIME_COND_CYCLEGAN)
BASELINE_REGIMES = (REGIME_WGAN, REGIME_GAN)
CYCLE_REGIMES = (REGIME_CYCLEGAN, REGIME_COND_CYCLEGAN)

# Network roles a checkpoint must carry, per regime.
REGIME_ROLES = {
    REGIME_WGAN: ("generator", "discriminator"),
    REGIME_GAN: ("generator", "discriminator"),
    REGIME_CYCLEGAN: ("gen_g2c", "gen_c2g", "dis_c", "dis_g"),
    REGIME_COND_CYCLEGAN: ("gen_g2c", "gen_c2g", "dis_c", "dis_g"),
}

LOG_LOSS_G = "LOSS_G"
LOG_LOSS_D = "LOSS_D"
CYCLE_LOG_NAMES = ("adv_dis_c", "adv_dis_g", "adv_gen", "cyc", "total")

CHECKPOINT_MAGIC = b"CHROMACYCLE-CKPT-1"
LOSS_LOG_HEADER = "iteration,name,value"

_OPTIMIZERS = ("adam", "rmsprop")
_TENSOR_DTYPES = {"float32": "<f4", "float64": "<f8"}


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters of one run. ``clip_value`` and ``n_critic`` only act
    under the wgan regime; ``lambda_cyc`` only under the cycle regimes."""

    regime: str
    learning_rate: float = 2e-4
    optimizer: str = "adam"
    beta1: float = 0.5
    beta2: float = 0.999
    alpha: float = 0.9
    clip_value: float = 0.01
    n_critic: int = 5
    lambda_cyc: float = 10.0
    batch_size: int = 4
    iterations: int = 500
    seed: int = 0
    checkpoint_every: int = 0
    image_size: int = 64

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise ValueError(f"unknown regime {self.regime!r}; expected one of {REGIMES}")
        if self.optimizer not in _OPTIMIZERS:
            raise ValueError(f"unknown optimizer {self.optimizer!r}; expected one of {_OPTIMIZERS}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.regime == REGIME_WGAN and self.clip_value <= 0:
            raise ValueError(f"clip_value must be > 0 under wgan, got {self.clip_value}")
        if self.n_critic < 1:
            raise ValueError(f"n_critic must be >= 1, got {self.n_critic}")
        if self.lambda_cyc < 0:
            raise ValueError(f"lambda_cyc must be >= 0, got {self.lambda_cyc}")
        check_count(self.batch_size, "batch_size")
        check_count(self.iterations, "iterations")
        if self.checkpoint_every < 0:
            raise ValueError("checkpoint_every must be >= 0 (0 disables the schedule)")
        if self.image_size < 8 or self.image_size % 4:
            raise ValueError(f"image_size must be >= 8 and divisible by 4, got {self.image_size}")

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, data: dict) -> "TrainConfig":
        expected = set(cls.__dataclass_fields__)
        if set(data) != expected:
            raise ValueError(
                f"config fields {sorted(set(data) ^ expected)} missing or unexpected"
            )
        return cls(**data)

    @property
    def fingerprint(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def default_config(regime: str, **overrides) -> TrainConfig:
    """Desk-scale defaults; wgan swaps in the RMSprop recipe."""
    base: dict = {"regime": regime}
    if regime == REGIME_WGAN:
        base.update(optimizer="rmsprop", learning_rate=5e-5)
    base.update(overrides)
    return TrainConfig(**base)


@dataclass
class LossLog:
    """Per-iteration loss rows for one run, append-only.

    Iterations must strictly increase per loss name and values must stay
    finite; both are enforced at append time.
    """

    regime: str
    run_id: str
    rows: list[tuple[int, str, float]] = field(default_factory=list, init=False)
    _last: dict[str, int] = field(default_factory=dict, init=False, repr=False, compare=False)

    def append(self, iteration: int, name: str, value: float) -> None:
        iteration, value = int(iteration), float(value)
        if not math.isfinite(value):
            raise ValueError(f"loss {name!r} at iteration {iteration} is not finite")
        prev = self._last.get(name)
        if prev is not None and iteration <= prev:
            raise ValueError(
                f"iterations must strictly increase per loss name "
                f"({name!r}: {prev} then {iteration})"
            )
        self._last[name] = iteration
        self.rows.append((iteration, name, value))

    def names(self) -> list[str]:
        return sorted({name for _, name, _ in self.rows})

    def values(self, name: str) -> list[float]:
        return [v for _, n, v in self.rows if n == name]


@dataclass
class Checkpoint:
    """Trained parameter sets for every network of the regime, plus the
    config that produced them."""

    config: TrainConfig
    iteration: int
    params: dict[str, ParameterSet]
    rng_fingerprint: str = ""

    def __post_init__(self):
        expected = set(REGIME_ROLES[self.config.regime])
        if set(self.params) != expected:
            raise CheckpointError(
                f"regime {self.config.regime!r} expects networks {sorted(expected)}, "
                f"got {sorted(self.params)}"
            )
        if self.iteration < 0:
            raise ValueError(f"iteration must be >= 0, got {self.iteration}")


def network_configs(config: TrainConfig) -> dict[str, GeneratorConfig | DiscriminatorConfig]:
    """Architecture configs for every network the regime trains.

    Baselines: one noise-conditioned luma->chroma generator and one critic
    over full YUV (unbounded score for wgan, probability for gan). The
    conditional cycle splits channels (1->2 and 2->1); the unconditional
    cycle maps 3-channel images to 3-channel images in both directions.
    """
    if config.regime in BASELINE_REGIMES:
        head = WASSERSTEIN_SCALAR if config.regime == REGIME_WGAN else SIGMOID_PROBABILITY
        return {
            "generator": GeneratorConfig(in_channels=1, out_channels=2, use_noise=True),
            "discriminator": DiscriminatorConfig(in_channels=3, head=head),
        }
    if config.regime == REGIME_COND_CYCLEGAN:
        return {
            "gen_g2c": GeneratorConfig(in_channels=1, out_channels=2),
            "gen_c2g": GeneratorConfig(in_channels=2, out_channels=1),
            "dis_c": DiscriminatorConfig(in_channels=3),
            "dis_g": DiscriminatorConfig(in_channels=3),
        }
    return {
        "gen_g2c": GeneratorConfig(in_channels=3, out_channels=3),
        "gen_c2g": GeneratorConfig(in_channels=3, out_channels=3),
        "dis_c": DiscriminatorConfig(in_channels=3),
        "dis_g": DiscriminatorConfig(in_channels=3),
    }


def init_networks(config: TrainConfig) -> dict[str, Generator | Discriminator]:
    nets: dict[str, Generator | Discriminator] = {}
    for offset, (role, cfg) in enumerate(network_configs(config).items()):
        if isinstance(cfg, GeneratorConfig):
            nets[role] = init_generator(cfg, config.seed + offset)
        else:
            nets[role] = init_discriminator(cfg, config.seed + offset)
    return nets


def restore_networks(ck: Checkpoint) -> dict[str, Generator | Discriminator]:
    return {role: restore(ps) for role, ps in ck.params.items()}


# --- concatenation conventions of the conditional cycle ---
# The gray domain carries no chroma; it is rendered as YUV with zero-filled
# U and V. The fake presented to the gray-side discriminator joins the
# generated luma with the color sample's own chroma. Kept as standalone
# functions so the convention can be swapped in one place.


def fake_color_concat(real_y: torch.Tensor, fake_uv: torch.Tensor) -> torch.Tensor:
    return torch.cat([real_y, fake_uv], dim=1)


def fake_gray_concat(fake_y: torch.Tensor, real_uv: torch.Tensor) -> torch.Tensor:
    return torch.cat([fake_y, real_uv], dim=1)


def real_gray_as_yuv(real_y: torch.Tensor) -> torch.Tensor:
    zeros = torch.zeros(real_y.shape[0], 2, *real_y.shape[2:], dtype=real_y.dtype)
    return torch.cat([real_y, zeros], dim=1)


# --- loop plumbing ---


@contextmanager
def _single_thread():
    n = torch.get_num_threads()
    torch.set_num_threads(1)
    try:
        yield
    finally:
        torch.set_num_threads(n)


def _make_optimizer(config: TrainConfig, params) -> torch.optim.Optimizer:
    if config.optimizer == "adam":
        return torch.optim.Adam(
            params, lr=config.learning_rate, betas=(config.beta1, config.beta2)
        )
    return torch.optim.RMSprop(params, lr=config.learning_rate, alpha=config.alpha)


def _gray_batch(pairs) -> torch.Tensor:
    return torch.from_numpy(np.stack([p.gray.y for p in pairs])[:, None].astype(np.float32))


def _yuv_batch(pairs) -> torch.Tensor:
    planes = [np.stack([p.color_yuv.y, p.color_yuv.u, p.color_yuv.v]) for p in pairs]
    return torch.from_numpy(np.stack(planes).astype(np.float32))


def _gray_rgb_batch(pairs) -> torch.Tensor:
    return torch.from_numpy(
        np.stack([np.repeat(p.gray.y[None], 3, axis=0) for p in pairs]).astype(np.float32)
    )


def _color_rgb_batch(pairs) -> torch.Tensor:
    from .colorspace import yuv_to_rgb

    planes = [yuv_to_rgb(p.color_yuv).data.transpose(2, 0, 1) for p in pairs]
    return torch.from_numpy(np.stack(planes).astype(np.float32))


def _clip_weights(module: torch.nn.Module, clip: float) -> None:
    with torch.no_grad():
        for p in module.parameters():
            p.clamp_(-clip, clip)


def max_abs_weight(module: torch.nn.Module) -> float:
    """Largest absolute entry over all parameters; the weight-scan probe."""
    return max(float(p.detach().abs().max()) for p in module.parameters())


def _finite_or_abort(term: str, value: torch.Tensor, iteration: int) -> float:
    v = float(value.detach())
    if not math.isfinite(v):
        raise TrainingDivergedError(term, iteration)
    return v


def _ensure_finite_weights(nets: dict[str, torch.nn.Module], iteration: int) -> None:
    for role, module in nets.items():
        for p in module.parameters():
            if not torch.isfinite(p).all():
                raise TrainingDivergedError(f"{role} weights", iteration)


def _rng_fingerprint(torch_rng: torch.Generator, np_rng: np.random.Generator) -> str:
    h = hashlib.sha256()
    h.update(torch_rng.get_state().numpy().tobytes())
    h.update(json.dumps(np_rng.bit_generator.state, sort_keys=True, default=int).encode())
    return h.hexdigest()[:16]


def _checkpoint(
    config: TrainConfig,
    nets: dict[str, Generator | Discriminator],
    iteration: int,
    torch_rng: torch.Generator,
    np_rng: np.random.Generator,
) -> Checkpoint:
    return Checkpoint(
        config=config,
        iteration=iteration,
        params={role: snapshot(m) for role, m in nets.items()},
        rng_fingerprint=_rng_fingerprint(torch_rng, np_rng),
    )


def _maybe_emit(config, nets, iteration, torch_rng, np_rng, on_checkpoint) -> None:
    if on_checkpoint is None or config.checkpoint_every == 0:
        return
    if iteration % config.checkpoint_every == 0:
        on_checkpoint(_checkpoint(config, nets, iteration, torch_rng, np_rng))


def _prep_spec(config: TrainConfig) -> PreparationSpec:
    return PreparationSpec(load_size=config.image_size, crop_size=config.image_size)


def _run_id(config: TrainConfig) -> str:
    return f"{config.regime}-seed{config.seed}"


# --- training loops ---


def train_baseline(
    config: TrainConfig,
    data: DatasetManifest,
    *,
    on_checkpoint: Callable[[Checkpoint], None] | None = None,
    after_disc_update: Callable[[int, Discriminator], None] | None = None,
) -> tuple[Checkpoint, LossLog]:
    """Single-generator adversarial training (wgan or gan regime).

    Per iteration: n_critic discriminator steps under wgan (one under gan),
    each followed by a weight clamp to [-clip_value, clip_value] when the
    regime is wgan, then one generator step. The fake shown to the
    discriminator joins the input luma with the generated chroma. LOSS_D
    logged per iteration is the final discriminator step's value.

    ``after_disc_update`` runs right after every discriminator update with
    (iteration, discriminator); treat the module as read-only.
    """
    if config.regime not in BASELINE_REGIMES:
        raise RegimeMismatchError(
            f"train_baseline requires regime in {BASELINE_REGIMES}, got {config.regime!r}"
        )
    wgan = config.regime == REGIME_WGAN
    prep = _prep_spec(config)
    np_rng = np.random.default_rng(config.seed)
    torch_rng = torch.Generator().manual_seed(config.seed)
    nets = init_networks(config)
    gen, dis = nets["generator"], nets["discriminator"]
    opt_g = _make_optimizer(config, gen.parameters())
    opt_d = _make_optimizer(config, dis.parameters())
    log = LossLog(regime=config.regime, run_id=_run_id(config))

    def fake_yuv(requires_grad: bool):
        pairs = sample_unpaired_batch(data, prep, config.batch_size, np_rng)
        gray_t = _gray_batch(pairs)
        z = torch.randn(config.batch_size, gen.config.noise_dim, generator=torch_rng)
        if requires_grad:
            return fake_color_concat(gray_t, gen(gray_t, z)), pairs
        with torch.no_grad():
            return fake_color_concat(gray_t, gen(gray_t, z)), pairs

    with _single_thread():
        for it in range(1, config.iterations + 1):
            d_value = 0.0
            for _ in range(config.n_critic if wgan else 1):
                fake_t, pairs = fake_yuv(requires_grad=False)
                real_t = _yuv_batch(pairs)
                if wgan:
                    loss_d = losses.wgan_loss_d(dis(real_t), dis(fake_t))
                else:
                    loss_d = losses.gan_loss_d(dis(real_t), dis(fake_t))
                d_value = _finite_or_abort(LOG_LOSS_D, loss_d.value, it)
                opt_d.zero_grad(set_to_none=True)
                loss_d.value.backward()
                opt_d.step()
                if wgan:
                    _clip_weights(dis, config.clip_value)
                if after_disc_update is not None:
                    after_disc_update(it, dis)

            fake_t, _ = fake_yuv(requires_grad=True)
            score = dis(fake_t)
            loss_g = losses.wgan_loss_g(score) if wgan else losses.gan_loss_g(score)
            g_value = _finite_or_abort(LOG_LOSS_G, loss_g.value, it)
            opt_g.zero_grad(set_to_none=True)
            loss_g.value.backward()
            opt_g.step()

            _ensure_finite_weights(nets, it)
            log.append(it, LOG_LOSS_D, d_value)
            log.append(it, LOG_LOSS_G, g_value)
            _maybe_emit(config, nets, it, torch_rng, np_rng, on_checkpoint)

    return _checkpoint(config, nets, config.iterations, torch_rng, np_rng), log


def train_cyclegan(
    config: TrainConfig,
    data: DatasetManifest,
    *,
    on_checkpoint: Callable[[Checkpoint], None] | None = None,
) -> tuple[Checkpoint, LossLog]:
    """Dual-generator, dual-discriminator cycle training.

    Conditional regime: samples are split into luma and chroma; gen_g2c maps
    Y to UV and gen_c2g maps UV back to Y, fakes are rebuilt by channel
    concatenation, and both discriminators judge full YUV images. The
    unconditional regime runs the same loop on 3-channel images (replicated
    grayscale vs. color RGB) without any channel splitting.

    Per iteration both generators update jointly on the total objective
    (adversarial terms plus lambda_cyc-weighted cycle loss), then both
    discriminators update on their own adversarial losses against detached
    fakes. The logged ``cyc`` row is the raw, unweighted cycle loss.
    """
    if config.regime not in CYCLE_REGIMES:
        raise RegimeMismatchError(
            f"train_cyclegan requires regime in {CYCLE_REGIMES}, got {config.regime!r}"
        )
    conditional = config.regime == REGIME_COND_CYCLEGAN
    prep = _prep_spec(config)
    np_rng = np.random.default_rng(config.seed)
    torch_rng = torch.Generator().manual_seed(config.seed)
    nets = init_networks(config)
    g2c, c2g, dis_c, dis_g = (nets[role] for role in REGIME_ROLES[config.regime])
    opt_gen = _make_optimizer(config, list(g2c.parameters()) + list(c2g.parameters()))
    opt_dis = _make_optimizer(config, list(dis_c.parameters()) + list(dis_g.parameters()))
    log = LossLog(regime=config.regime, run_id=_run_id(config))

    with _single_thread():
        for it in range(1, config.iterations + 1):
            pairs = sample_unpaired_batch(data, prep, config.batch_size, np_rng)
            if conditional:
                g_y = _gray_batch(pairs)
                c_yuv = _yuv_batch(pairs)
                c_uv = c_yuv[:, 1:]
                fake_color = fake_color_concat(g_y, g2c(g_y))
                fake_y = c2g(c_uv)
                fake_gray = fake_gray_concat(fake_y, c_uv)
                rec_y = c2g(fake_color[:, 1:])
                rec_uv = g2c(fake_y)
                real_color, real_gray = c_yuv, real_gray_as_yuv(g_y)
                cyc = losses.cycle_consistency_loss(g_y, rec_y, c_uv, rec_uv)
            else:
                g_rgb = _gray_rgb_batch(pairs)
                c_rgb = _color_rgb_batch(pairs)
                fake_color = g2c(g_rgb)
                fake_gray = c2g(c_rgb)
                rec_gray = c2g(fake_color)
                rec_color = g2c(fake_gray)
                real_color, real_gray = c_rgb, g_rgb
                cyc = losses.cycle_consistency_loss(g_rgb, rec_gray, c_rgb, rec_color)

            adv_g2c = losses.gan_loss_g(dis_c(fake_color))
            adv_c2g = losses.gan_loss_g(dis_g(fake_gray))
            total = losses.total_cyclegan_generator_loss(adv_g2c, adv_c2g, cyc, config.lambda_cyc)
            adv_gen_value = _finite_or_abort("adv_gen", adv_g2c.value + adv_c2g.value, it)
            cyc_value = _finite_or_abort("cyc", cyc.value, it)
            total_value = _finite_or_abort("total", total.value, it)
            opt_gen.zero_grad(set_to_none=True)
            total.value.backward()
            opt_gen.step()

            loss_dis_c = losses.gan_loss_d(dis_c(real_color), dis_c(fake_color.detach()))
            loss_dis_g = losses.gan_loss_d(dis_g(real_gray), dis_g(fake_gray.detach()))
            dis_c_value = _finite_or_abort("adv_dis_c", loss_dis_c.value, it)
            dis_g_value = _finite_or_abort("adv_dis_g", loss_dis_g.value, it)
            opt_dis.zero_grad(set_to_none=True)
            (loss_dis_c.value + loss_dis_g.value).backward()
            opt_dis.step()

            _ensure_finite_weights(nets, it)
            values = (dis_c_value, dis_g_value, adv_gen_value, cyc_value, total_value)
            for name, value in zip(CYCLE_LOG_NAMES, values):
                log.append(it, name, value)
            _maybe_emit(config, nets, it, torch_rng, np_rng, on_checkpoint)

    return _checkpoint(config, nets, config.iterations, torch_rng, np_rng), log


def train(
    config: TrainConfig,
    data: DatasetManifest,
    *,
    on_checkpoint: Callable[[Checkpoint], None] | None = None,
) -> tuple[Checkpoint, LossLog]:
    """Dispatch to the loop matching ``config.regime``."""
    if config.regime in BASELINE_REGIMES:
        return train_baseline(config, data, on_checkpoint=on_checkpoint)
    return train_cyclegan(config, data, on_checkpoint=on_checkpoint)


# --- checkpoint container format ---
# Layout: magic line, decimal header length line, JSON header, then the raw
# little-endian bytes of every tensor in header order. The header pins each
# network's config and a fingerprint of it, so a checkpoint never silently
# loads into a different architecture.


def save_checkpoint(ck: Checkpoint, path: str | Path) -> None:
    header: dict = {
        "format": 1,
        "config": ck.config.to_json(),
        "config_fingerprint": ck.config.fingerprint,
        "iteration": ck.iteration,
        "rng_fingerprint": ck.rng_fingerprint,
        "networks": [],
    }
    blobs: list[bytes] = []
    for role in REGIME_ROLES[ck.config.regime]:
        ps = ck.params[role]
        entry = {
            "role": role,
            "kind": ps.kind,
            "config": asdict(ps.config),
            "config_fingerprint": ps.fingerprint,
            "tensors": [],
        }
        for name, arr in ps.tensors.items():
            dtype = str(arr.dtype)
            if dtype not in _TENSOR_DTYPES:
                raise CheckpointError(f"unsupported tensor dtype {dtype!r} for {role}.{name}")
            entry["tensors"].append({"name": name, "shape": list(arr.shape), "dtype": dtype})
            blobs.append(np.ascontiguousarray(arr).astype(_TENSOR_DTYPES[dtype]).tobytes())
        header["networks"].append(entry)
    head_bytes = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as f:
        f.write(CHECKPOINT_MAGIC + b"\n")
        f.write(f"{len(head_bytes)}\n".encode())
        f.write(head_bytes)
        for blob in blobs:
            f.write(blob)


def load_checkpoint(path: str | Path) -> Checkpoint:
    path = Path(path)
    data = path.read_bytes()
    prefix = CHECKPOINT_MAGIC + b"\n"
    if not data.startswith(prefix):
        raise CheckpointError(f"{path}: not a {CHECKPOINT_MAGIC.decode()} file")
    rest = data[len(prefix):]
    newline = rest.find(b"\n")
    if newline < 0:
        raise CheckpointError(f"{path}: truncated before header")
    try:
        head_len = int(rest[:newline])
    except ValueError:
        raise CheckpointError(f"{path}: malformed header length") from None
    body = rest[newline + 1:]
    if len(body) < head_len:
        raise CheckpointError(f"{path}: truncated header")
    try:
        header = json.loads(body[:head_len])
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"{path}: malformed header ({exc})") from None
    payload = body[head_len:]

    try:
        config = TrainConfig.from_json(header["config"])
        if config.fingerprint != header["config_fingerprint"]:
            raise CheckpointError(f"{path}: train config fingerprint mismatch")
        params: dict[str, ParameterSet] = {}
        offset = 0
        for entry in header["networks"]:
            if entry["kind"] == "generator":
                net_cfg = GeneratorConfig(**entry["config"])
            elif entry["kind"] == "discriminator":
                net_cfg = DiscriminatorConfig(**entry["config"])
            else:
                raise CheckpointError(f"{path}: unknown network kind {entry['kind']!r}")
            if net_cfg.fingerprint != entry["config_fingerprint"]:
                raise CheckpointError(
                    f"{path}: network config fingerprint mismatch for {entry['role']!r}"
                )
            tensors: dict[str, np.ndarray] = {}
            for spec in entry["tensors"]:
                wire = np.dtype(_TENSOR_DTYPES[spec["dtype"]])
                nbytes = int(math.prod(spec["shape"])) * wire.itemsize
                chunk = payload[offset : offset + nbytes]
                if len(chunk) < nbytes:
                    raise CheckpointError(
                        f"{path}: truncated tensor data at {entry['role']}.{spec['name']}"
                    )
                arr = np.frombuffer(chunk, dtype=wire).reshape(spec["shape"]).copy()
                tensors[spec["name"]] = arr.astype(spec["dtype"], copy=False)
                offset += nbytes
            params[entry["role"]] = ParameterSet(
                kind=entry["kind"], config=net_cfg, tensors=tensors
            )
        if offset != len(payload):
            raise CheckpointError(f"{path}: {len(payload) - offset} trailing bytes after tensors")
        return Checkpoint(
            config=config,
            iteration=int(header["iteration"]),
            params=params,
            rng_fingerprint=header["rng_fingerprint"],
        )
    except CheckpointError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"{path}: malformed checkpoint ({exc})") from None


# --- loss log CSV ---


def write_loss_log(log: LossLog, path: str | Path) -> None:
    """CSV with header ``iteration,name,value``, rows in append order.

    Values are printed with 17 significant digits so the file both shows
    full precision and parses back to the exact same floats.
    """
    lines = [LOSS_LOG_HEADER]
    for iteration, name, value in log.rows:
        lines.append(f"{iteration},{name},{value:.16e}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_loss_log(path: str | Path, *, regime: str = "", run_id: str | None = None) -> LossLog:
    path = Path(path)
    log = LossLog(regime=regime, run_id=run_id if run_id is not None else path.stem)
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != LOSS_LOG_HEADER.split(","):
            raise ValueError(f"{path}: expected header {LOSS_LOG_HEADER!r}, got {header}")
        for row in reader:
            if len(row) != 3:
                raise ValueError(f"{path}: malformed row {row!r}")
            log.append(int(row[0]), row[1], float(row[2]))
    return log
