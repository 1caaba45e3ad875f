"""Training losses: adversarial (BCE and least-squares), L1, cycle, combined."""

from __future__ import annotations

import json
from dataclasses import dataclass

import torch
import torch.nn.functional as F

from windcomfort.errors import ShapeMismatch

LAMBDA_L1 = 100.0
LAMBDA_CYCLE = 10.0


def _check_same_shape(a: torch.Tensor, b: torch.Tensor) -> None:
    if a.shape != b.shape:
        raise ShapeMismatch(f"{tuple(a.shape)} vs {tuple(b.shape)}")


def adv_loss(d_real_logits: torch.Tensor, d_fake_logits: torch.Tensor):
    """Patch-wise BCE adversarial losses.

    The discriminator loss averages its real-target and fake-target halves and
    is then halved again, slowing D's effective learning rate relative to G.
    The generator term is the non-saturating form (fake labeled real).
    """
    _check_same_shape(d_real_logits, d_fake_logits)
    ones = torch.ones_like(d_real_logits)
    zeros = torch.zeros_like(d_fake_logits)
    loss_real = F.binary_cross_entropy_with_logits(d_real_logits, ones)
    loss_fake = F.binary_cross_entropy_with_logits(d_fake_logits, zeros)
    loss_d = 0.5 * ((loss_real + loss_fake) / 2.0)
    loss_g = F.binary_cross_entropy_with_logits(d_fake_logits, ones)
    return loss_d, loss_g


def l1_loss(pred: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    _check_same_shape(pred, target)
    return (pred - target).abs().mean()


def pix2pix_objective(adv: torch.Tensor, l1: torch.Tensor,
                      lam: float = LAMBDA_L1) -> torch.Tensor:
    return adv + lam * l1


def lsgan_loss(d_out: torch.Tensor, target: float) -> torch.Tensor:
    """Mean squared distance of patch outputs to the 0/1 label."""
    return ((d_out - target) ** 2).mean()


def cycle_loss(x: torch.Tensor, x_cycled: torch.Tensor,
               y: torch.Tensor, y_cycled: torch.Tensor) -> torch.Tensor:
    """Forward plus backward reconstruction error (weighted by the caller)."""
    return l1_loss(x_cycled, x) + l1_loss(y_cycled, y)


@dataclass
class LossReport:
    epoch: int
    step: int
    loss_G_adv: float
    loss_G_L1: float
    loss_G_total: float
    loss_D: float
    lr: float
    lambda_l1: float = LAMBDA_L1
    loss_cycle: float | None = None
    lambda_cycle: float | None = None
    disc_accuracy: float | None = None

    def to_json_line(self) -> str:
        d = {k: v for k, v in self.__dict__.items() if v is not None}
        return json.dumps(d)
