"""Adversaries: patch discriminators for mask and image realism, and a
single-score discriminator for individual gland crops.
"""

from __future__ import annotations

from typing import Sequence

import torch
import torch.nn as nn

from .composition import crop_and_resize
from .geometry import BoundingBox
from .networks import init_weights

GLAND_CROP_SIZE = 64


class PatchDiscriminator(nn.Module):
    """Scores overlapping patches of a canvas-sized input as a logit grid.

    Five 4x4 convolutions, the first four stride 2 (16 -> 32 -> 64 -> 128 ->
    256 channels, leaky ReLU 0.2, instance norm from the second block on),
    then a stride-1 projection to one channel; a 256 x 256 input yields a
    7 x 7 grid.
    """

    def __init__(self, in_channels: int):
        super().__init__()
        self.in_channels = in_channels
        layers: list[nn.Module] = []
        channels = [in_channels, 16, 32, 64, 128, 256]
        for i, (c_in, c_out) in enumerate(zip(channels[:-1], channels[1:])):
            layers.append(nn.Conv2d(c_in, c_out, kernel_size=4, stride=2, padding=1))
            layers.append(nn.LeakyReLU(0.2, inplace=True))
            if i > 0:
                # running stats keep eval-mode scoring local to each patch's
                # receptive field (instance statistics couple all patches)
                layers.append(nn.InstanceNorm2d(c_out, track_running_stats=True))
        layers.append(nn.Conv2d(channels[-1], 1, kernel_size=4, stride=1, padding=1))
        self.stack = nn.Sequential(*layers)
        self.apply(init_weights)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.dim() != 4 or x.shape[1] != self.in_channels:
            raise ValueError(
                f"expected n x {self.in_channels} x H x W input, got {tuple(x.shape)}"
            )
        return self.stack(x)


class GlandDiscriminator(nn.Module):
    """Single realism logit for a 3 x 64 x 64 gland crop.

    Three unpadded 5x5 stride-2 convolutions (3 -> 16 -> 32 -> 64, batch
    norm + leaky ReLU after the first two), global average pooling, then
    affine layers 64 -> 1024 -> 1.
    """

    def __init__(self, in_channels: int = 3):
        super().__init__()
        self.in_channels = in_channels
        self.features = nn.Sequential(
            nn.Conv2d(in_channels, 16, kernel_size=5, stride=2),  # 64 -> 30
            nn.BatchNorm2d(16),
            nn.LeakyReLU(0.2, inplace=True),
            nn.Conv2d(16, 32, kernel_size=5, stride=2),  # 30 -> 13
            nn.BatchNorm2d(32),
            nn.LeakyReLU(0.2, inplace=True),
            nn.Conv2d(32, 64, kernel_size=5, stride=2),  # 13 -> 5
        )
        self.pool = nn.AdaptiveAvgPool2d(1)
        self.classifier = nn.Sequential(
            nn.Linear(64, 1024),
            nn.LeakyReLU(0.2, inplace=True),
            nn.Linear(1024, 1),
        )
        self.apply(init_weights)

    def forward(self, crop: torch.Tensor) -> torch.Tensor:
        if crop.dim() != 4 or crop.shape[1] != self.in_channels:
            raise ValueError(
                f"expected n x {self.in_channels} x H x W crops, got {tuple(crop.shape)}"
            )
        x = self.features(crop)
        x = self.pool(x).flatten(1)  # n x 64
        return self.classifier(x)


def crop_and_resize_glands(
    image: torch.Tensor,
    bboxes: Sequence[BoundingBox],
    out_size: int = GLAND_CROP_SIZE,
) -> torch.Tensor:
    """Differentiable bilinear crops of each gland box, resized to a fixed size."""
    return crop_and_resize(image, bboxes, out_size)
