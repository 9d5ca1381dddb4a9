"""Adversarial and cycle-consistency objectives as differentiable scalars.

Conventions: every loss is returned as a value the trainer MINIMIZES.
Critic scores enter the Wasserstein losses raw; probabilities entering a
logarithm are clamped by ``EPS`` to avoid -inf. The generator uses the
non-saturating form -log D(G(z)).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import torch

from .colorspace import ChromaImage, GrayImage
from .errors import ShapeMismatchError

EPS = 1e-7


@dataclass
class LossValue:
    """A scalar objective plus its named additive contributions."""

    value: torch.Tensor
    components: dict[str, torch.Tensor] = field(default_factory=dict)

    def __float__(self) -> float:
        return float(self.value)

    def item(self) -> float:
        return float(self.value)


def _as_tensor(x, name: str) -> torch.Tensor:
    if isinstance(x, torch.Tensor):
        t = x
    else:
        t = torch.as_tensor(np.asarray(x), dtype=torch.float64)
    if t.numel() == 0:
        raise ValueError(f"{name} must be nonempty")
    return t


def _as_probability(x, name: str) -> torch.Tensor:
    t = _as_tensor(x, name)
    with torch.no_grad():
        if t.min() < 0 or t.max() > 1:
            raise ValueError(f"{name} must lie in [0, 1]")
    return t


def wgan_loss_g(d_fake) -> LossValue:
    """Generator objective against a critic: negated mean fake score."""
    value = -_as_tensor(d_fake, "d_fake").mean()
    return LossValue(value=value, components={"wgan_g": value})


def wgan_loss_d(d_real, d_fake) -> LossValue:
    """Critic objective: -(mean real score - mean fake score)."""
    value = -(_as_tensor(d_real, "d_real").mean() - _as_tensor(d_fake, "d_fake").mean())
    return LossValue(value=value, components={"wgan_d": value})


def gan_loss_d(p_real, p_fake) -> LossValue:
    """Discriminator cross-entropy, negated for minimization.

    -(mean log p_real + mean log(1 - p_fake)), the saturating two-sided form.
    """
    p_real = _as_probability(p_real, "p_real")
    p_fake = _as_probability(p_fake, "p_fake")
    value = -(
        torch.clamp(p_real, min=EPS).log().mean()
        + torch.clamp(1.0 - p_fake, min=EPS).log().mean()
    )
    return LossValue(value=value, components={"gan_d": value})


def gan_loss_g(p_fake) -> LossValue:
    """Non-saturating generator loss: -mean log p_fake."""
    p_fake = _as_probability(p_fake, "p_fake")
    value = -torch.clamp(p_fake, min=EPS).log().mean()
    return LossValue(value=value, components={"gan_g": value})


def cycle_adv_losses(
    p_real_c, p_fake_c, p_real_g, p_fake_g
) -> tuple[LossValue, LossValue, LossValue, LossValue]:
    """Adversarial losses of both GANs in the cycle.

    Returns (dis_c loss, dis_g loss, g2c generator loss, c2g generator loss):
    the color-side discriminator scores fakes built on the luma->chroma path,
    the gray-side discriminator scores fakes from the chroma->luma path.
    """
    return (
        gan_loss_d(p_real_c, p_fake_c),
        gan_loss_d(p_real_g, p_fake_g),
        gan_loss_g(p_fake_c),
        gan_loss_g(p_fake_g),
    )


def _plane_tensor(x, name: str) -> torch.Tensor:
    if isinstance(x, GrayImage):
        return torch.as_tensor(x.y)
    if isinstance(x, ChromaImage):
        return torch.as_tensor(np.stack([x.u, x.v]))
    return _as_tensor(x, name)


def cycle_consistency_loss(real_g, rec_g, real_c, rec_c) -> LossValue:
    """L1 reconstruction penalty over both round trips.

    mean |rec_g - real_g| + mean |rec_c - real_c|; zero iff both
    reconstructions equal their originals.
    """
    real_g, rec_g = _plane_tensor(real_g, "real_g"), _plane_tensor(rec_g, "rec_g")
    real_c, rec_c = _plane_tensor(real_c, "real_c"), _plane_tensor(rec_c, "rec_c")
    if real_g.shape != rec_g.shape:
        raise ShapeMismatchError(f"gray planes {tuple(real_g.shape)} vs {tuple(rec_g.shape)}")
    if real_c.shape != rec_c.shape:
        raise ShapeMismatchError(f"chroma planes {tuple(real_c.shape)} vs {tuple(rec_c.shape)}")
    g_term = (rec_g - real_g).abs().mean()
    c_term = (rec_c - real_c).abs().mean()
    return LossValue(value=g_term + c_term, components={"cyc_g": g_term, "cyc_c": c_term})


def total_cyclegan_generator_loss(
    adv_g2c: LossValue, adv_c2g: LossValue, cyc: LossValue, lambda_cyc: float
) -> LossValue:
    """Joint generator objective: both adversarial terms plus weighted cycle.

    Components hold the additive contributions, so they sum to the value;
    the "cyc" entry is already scaled by lambda_cyc.
    """
    if lambda_cyc < 0:
        raise ValueError(f"lambda_cyc must be >= 0, got {lambda_cyc}")
    weighted_cyc = lambda_cyc * cyc.value
    value = adv_g2c.value + adv_c2g.value + weighted_cyc
    return LossValue(
        value=value,
        components={
            "adv_g2c": adv_g2c.value,
            "adv_c2g": adv_c2g.value,
            "cyc": weighted_cyc,
        },
    )
