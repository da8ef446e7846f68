"""Generator-side networks: gland embedding, mask generation, channel
reduction, and the skip-connected encoder-decoder image generator.

Default sizes: noise 6, embedding 32, gland mask 64 x 64, canvas 256 x 256.
All networks take batched tensors.
"""

from __future__ import annotations

import math

import torch
import torch.nn as nn


def _log2_size(size: int, name: str) -> int:
    power = int(math.log2(size))
    if 2**power != size or size < 4:
        raise ValueError(f"{name} must be a power of two >= 4, got {size}")
    return power


def init_weights(module: nn.Module) -> None:
    """Normal(0, 0.02) init for conv and affine weights, zero biases."""
    if isinstance(module, (nn.Conv2d, nn.ConvTranspose2d, nn.Linear)):
        nn.init.normal_(module.weight, 0.0, 0.02)
        if module.bias is not None:
            nn.init.zeros_(module.bias)


class GlandEmbedder(nn.Module):
    """Affine map from a gland noise vector to its latent embedding."""

    def __init__(self, noise_dim: int = 6, embed_dim: int = 32):
        super().__init__()
        self.noise_dim = noise_dim
        self.embed_dim = embed_dim
        self.affine = nn.Linear(noise_dim, embed_dim)
        self.apply(init_weights)

    def forward(self, z: torch.Tensor) -> torch.Tensor:
        if z.shape[-1] != self.noise_dim:
            raise ValueError(f"expected noise of length {self.noise_dim}, got {z.shape[-1]}")
        return self.affine(z)


class MaskGeneratorBlock(nn.Module):
    """Upsample x2 -> 3x3 conv -> batch norm -> ReLU."""

    def __init__(self, channels: int = 32):
        super().__init__()
        self.block = nn.Sequential(
            nn.Upsample(scale_factor=2, mode="nearest"),
            nn.Conv2d(channels, channels, kernel_size=3, stride=1, padding=1),
            nn.BatchNorm2d(channels),
            nn.ReLU(inplace=True),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.block(x)


class GlandMaskGenerator(nn.Module):
    """Latent embedding -> soft gland mask in (0, 1).

    Reshapes the embedding to D x 1 x 1 and doubles the spatial size per
    block up to mask_size, then projects to one channel with a 1x1 conv and
    a sigmoid.
    """

    def __init__(self, embed_dim: int = 32, mask_size: int = 64):
        super().__init__()
        self.embed_dim = embed_dim
        self.mask_size = mask_size
        n_blocks = _log2_size(mask_size, "mask_size")
        self.blocks = nn.Sequential(*[MaskGeneratorBlock(embed_dim) for _ in range(n_blocks)])
        self.head = nn.Conv2d(embed_dim, 1, kernel_size=1)
        self.apply(init_weights)

    def forward(self, a: torch.Tensor) -> torch.Tensor:
        if a.dim() != 2 or a.shape[-1] != self.embed_dim:
            raise ValueError(f"expected n x {self.embed_dim} embeddings, got {tuple(a.shape)}")
        x = a.view(a.shape[0], self.embed_dim, 1, 1)
        x = self.blocks(x)  # n x D x mask_size x mask_size
        return torch.sigmoid(self.head(x))


class ChannelReducer(nn.Module):
    """Reduce the cumulative mask to a single-channel tissue component mask.

    Four 3x3 convolutions (32 -> 16 -> 8 -> 4 -> 1), leaky ReLU 0.2 after
    each; `forward` adds a final sigmoid so the mask is comparable to binary
    ground truth, `stack` exposes the raw convolution chain.
    """

    def __init__(self, in_channels: int = 32):
        super().__init__()
        self.in_channels = in_channels
        channels = [in_channels, 16, 8, 4, 1]
        layers = []
        for c_in, c_out in zip(channels[:-1], channels[1:]):
            layers.append(nn.Conv2d(c_in, c_out, kernel_size=3, stride=1, padding=1))
            layers.append(nn.LeakyReLU(0.2, inplace=True))
        self.stack = nn.Sequential(*layers)
        self.apply(init_weights)

    def forward(self, cumulative: torch.Tensor) -> torch.Tensor:
        if cumulative.dim() != 4 or cumulative.shape[1] != self.in_channels:
            raise ValueError(
                f"expected n x {self.in_channels} x H x W input, got {tuple(cumulative.shape)}"
            )
        return torch.sigmoid(self.stack(cumulative))


class EncodeBlock(nn.Module):
    """4x4 stride-2 conv, optional instance norm, leaky ReLU 0.2, optional dropout."""

    def __init__(self, c_in: int, c_out: int, normalize: bool = True, dropout: float = 0.0):
        super().__init__()
        layers: list[nn.Module] = [nn.Conv2d(c_in, c_out, kernel_size=4, stride=2, padding=1)]
        if normalize:
            layers.append(nn.InstanceNorm2d(c_out))
        layers.append(nn.LeakyReLU(0.2, inplace=True))
        if dropout:
            layers.append(nn.Dropout(dropout))
        self.block = nn.Sequential(*layers)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.block(x)


class DecodeBlock(nn.Module):
    """4x4 stride-2 transposed conv, instance norm, ReLU, optional dropout."""

    def __init__(self, c_in: int, c_out: int, dropout: float = 0.0):
        super().__init__()
        layers: list[nn.Module] = [
            nn.ConvTranspose2d(c_in, c_out, kernel_size=4, stride=2, padding=1),
            nn.InstanceNorm2d(c_out),
            nn.ReLU(inplace=True),
        ]
        if dropout:
            layers.append(nn.Dropout(dropout))
        self.block = nn.Sequential(*layers)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.block(x)


class ImageGenerator(nn.Module):
    """Skip-connected encoder-decoder mapping the component mask to a tissue
    image in [-1, 1].

    Encodes down to a 512 x 1 x 1 bottleneck, decodes back up with each
    decoder block concatenated to the mirrored encoder feature map. The
    first and bottleneck encode blocks are unnormalized; the three innermost
    decode blocks use dropout 0.5.
    """

    ENCODER_CHANNELS = [64, 128, 256, 512, 512, 512, 512, 512]

    def __init__(self, in_channels: int = 1, out_channels: int = 3, image_size: int = 256):
        super().__init__()
        self.in_channels = in_channels
        self.image_size = image_size
        depth = _log2_size(image_size, "image_size")
        if depth > len(self.ENCODER_CHANNELS):
            raise ValueError(f"image_size {image_size} exceeds the supported depth")
        enc = self.ENCODER_CHANNELS[:depth]

        encoders = []
        for i, (c_in, c_out) in enumerate(zip([in_channels] + enc[:-1], enc)):
            # instance norm is undefined on the 1x1 bottleneck; first block
            # is conventionally unnormalized
            normalize = 0 < i < depth - 1
            encoders.append(EncodeBlock(c_in, c_out, normalize=normalize))
        self.encoders = nn.ModuleList(encoders)

        decoders = []
        c_prev = enc[-1]
        for j in range(depth - 1):
            skip_channels = enc[depth - 2 - j]
            dropout = 0.5 if j < 3 else 0.0
            decoders.append(DecodeBlock(c_prev, skip_channels, dropout=dropout))
            c_prev = skip_channels * 2  # decoder output concatenated with the skip
        self.decoders = nn.ModuleList(decoders)

        self.head = nn.Sequential(
            nn.Upsample(scale_factor=2, mode="nearest"),
            nn.ZeroPad2d((1, 0, 1, 0)),
            nn.Conv2d(c_prev, out_channels, kernel_size=4, padding=1),
            nn.Tanh(),
        )
        self.apply(init_weights)

    def forward(self, mask: torch.Tensor) -> torch.Tensor:
        if mask.dim() != 4 or mask.shape[1] != self.in_channels:
            raise ValueError(
                f"expected n x {self.in_channels} x H x W input, got {tuple(mask.shape)}"
            )
        skips = []
        x = mask
        for encode in self.encoders:
            x = encode(x)
            skips.append(x)
        for j, decode in enumerate(self.decoders):
            x = decode(x)
            x = torch.cat([x, skips[-2 - j]], dim=1)
        return self.head(x)
