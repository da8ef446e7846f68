"""Loss components and the weighted composite objective.

Pixel losses use mean reduction so the loss weights stay meaningful across
image sizes. The adversarial criterion is binary cross-entropy on raw
logits, averaged over all patch scores; generator updates use the
non-saturating form (fake logits scored against the real target).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import torch
import torch.nn.functional as F


@dataclass(frozen=True)
class LossWeights:
    """Weights for the six objective components."""

    image_rec: float = 100.0
    mask_rec: float = 100.0
    gland_rec: float = 100.0
    adv_mask: float = 1.0
    adv_image: float = 1.0
    adv_gland: float = 1.0

    def __post_init__(self):
        for name, value in self.__dict__.items():
            if value < 0:
                raise ValueError(f"loss weight {name} must be non-negative, got {value}")


def gland_mask_reconstruction(
    generated: Sequence[torch.Tensor], truth: Sequence[torch.Tensor]
) -> torch.Tensor:
    """Sum over glands of the per-mask mean squared error."""
    if len(generated) != len(truth):
        raise ValueError(f"{len(generated)} generated masks vs {len(truth)} ground truth")
    total = None
    for m, m_hat in zip(generated, truth):
        term = F.mse_loss(m, m_hat)
        total = term if total is None else total + term
    if total is None:
        raise ValueError("no gland masks to compare")
    return total


def mask_reconstruction(generated: torch.Tensor, truth: torch.Tensor) -> torch.Tensor:
    """Mean squared error over all mask pixels."""
    if generated.shape != truth.shape:
        raise ValueError(f"shape mismatch: {tuple(generated.shape)} vs {tuple(truth.shape)}")
    return F.mse_loss(generated, truth)


def image_reconstruction(generated: torch.Tensor, truth: torch.Tensor) -> torch.Tensor:
    """Mean absolute error over all image elements."""
    if generated.shape != truth.shape:
        raise ValueError(f"shape mismatch: {tuple(generated.shape)} vs {tuple(truth.shape)}")
    return F.l1_loss(generated, truth)


def adversarial(logits: torch.Tensor, target_is_real: bool) -> torch.Tensor:
    """Binary cross-entropy of sigmoid(logits) against a real/fake target,
    averaged over all logits."""
    target = torch.ones_like(logits) if target_is_real else torch.zeros_like(logits)
    return F.binary_cross_entropy_with_logits(logits, target)


def composite_objective(
    image_rec: torch.Tensor,
    mask_rec: torch.Tensor,
    gland_rec: torch.Tensor,
    adv_mask: torch.Tensor,
    adv_image: torch.Tensor,
    adv_gland: torch.Tensor,
    weights: LossWeights,
) -> torch.Tensor:
    """Weighted linear combination of the six loss components."""
    return (
        weights.image_rec * image_rec
        + weights.mask_rec * mask_rec
        + weights.gland_rec * gland_rec
        + weights.adv_mask * adv_mask
        + weights.adv_image * adv_image
        + weights.adv_gland * adv_gland
    )
