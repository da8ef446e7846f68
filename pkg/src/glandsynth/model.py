"""The full synthesis pipeline and its checkpoint container.

`SynthesisModel` chains gland embedding, per-gland mask generation, bilinear
layout composition, channel reduction, and the encoder-decoder image
generator. Checkpoints bundle generator and discriminator weights with a
manifest describing the model geometry, and loading rebuilds the model from
that manifest.
"""

from __future__ import annotations

import hashlib
import io
from dataclasses import asdict, dataclass, field
from pathlib import Path

import torch
import torch.nn as nn

from .composition import compose_cumulative_mask
from .discriminators import GlandDiscriminator, PatchDiscriminator
from .geometry import (
    DEFAULT_MAX_GLANDS,
    BoundingBox,
    GlandLayout,
    layout_bboxes,
    validate_layout,
)
from .networks import ChannelReducer, GlandEmbedder, GlandMaskGenerator, ImageGenerator


@dataclass(frozen=True)
class ModelConfig:
    canvas_size: int = 256
    gland_mask_size: int = 64
    embed_dim: int = 32
    noise_dim: int = 6
    max_glands: int = DEFAULT_MAX_GLANDS


@dataclass
class GeneratedPair:
    """A synthesized tissue image with its segmentation annotation."""

    image: torch.Tensor  # 3 x N x N in [-1, 1]
    component_mask: torch.Tensor  # 1 x N x N in (0, 1)
    gland_masks: torch.Tensor  # n x 1 x B x B
    bboxes: list[BoundingBox] = field(default_factory=list)
    seed: int | None = None
    checkpoint_id: str | None = None


class SynthesisModel(nn.Module):
    """Gland layout -> (tissue image, component mask) generator."""

    def __init__(self, config: ModelConfig = ModelConfig()):
        super().__init__()
        self.config = config
        self.checkpoint_id: str | None = None
        self.embedder = GlandEmbedder(config.noise_dim, config.embed_dim)
        self.mask_generator = GlandMaskGenerator(config.embed_dim, config.gland_mask_size)
        self.reducer = ChannelReducer(config.embed_dim)
        self.image_generator = ImageGenerator(1, 3, config.canvas_size)

    def noise_for_layout(self, layout: GlandLayout, rng_seed: int) -> torch.Tensor:
        """Per-gland noise rows: gland seeds override the shared seed stream."""
        stream = torch.Generator().manual_seed(rng_seed)
        rows = []
        for gland in layout.glands:
            if gland.seed is not None:
                own = torch.Generator().manual_seed(gland.seed)
                rows.append(torch.randn(self.config.noise_dim, generator=own))
            else:
                rows.append(torch.randn(self.config.noise_dim, generator=stream))
        return torch.stack(rows)

    def generate(
        self, noise: torch.Tensor, bboxes: list[BoundingBox]
    ) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
        """Differentiable forward pass from noise rows and bounding boxes.

        Returns (image 1x3xNxN, component mask 1x1xNxN, gland masks nx1xBxB).
        """
        if noise.shape[0] != len(bboxes):
            raise ValueError(f"{noise.shape[0]} noise rows vs {len(bboxes)} boxes")
        embeddings = self.embedder(noise)  # n x D
        gland_masks = self.mask_generator(embeddings)  # n x 1 x B x B
        cumulative = compose_cumulative_mask(
            list(embeddings), list(gland_masks), bboxes, self.config.canvas_size
        )
        component = self.reducer(cumulative.unsqueeze(0))  # 1 x 1 x N x N
        image = self.image_generator(component)  # 1 x 3 x N x N
        return image, component, gland_masks

    @torch.no_grad()
    def synthesize(self, layout: GlandLayout, rng_seed: int = 0) -> GeneratedPair:
        """Generate an annotated pair from a layout, deterministically for a
        given (layout, seed, checkpoint)."""
        report = validate_layout(layout, max_glands=self.config.max_glands)
        if not report.ok:
            raise ValueError("invalid layout: " + "; ".join(report.violations))
        if layout.canvas_size != self.config.canvas_size:
            raise ValueError(
                f"layout canvas {layout.canvas_size} does not match "
                f"model canvas {self.config.canvas_size}"
            )
        bboxes = layout_bboxes(layout)
        noise = self.noise_for_layout(layout, rng_seed)
        was_training = self.training
        self.eval()
        try:
            image, component, gland_masks = self.generate(noise, bboxes)
        finally:
            self.train(was_training)
        return GeneratedPair(
            image=image[0],
            component_mask=component[0],
            gland_masks=gland_masks,
            bboxes=bboxes,
            seed=rng_seed,
            checkpoint_id=self.checkpoint_id,
        )


class DiscriminatorSet(nn.Module):
    """The three adversaries: component mask, tissue image, gland crops."""

    def __init__(self, config: ModelConfig = ModelConfig()):
        super().__init__()
        self.mask_disc = PatchDiscriminator(in_channels=1)
        self.image_disc = PatchDiscriminator(in_channels=3)
        self.gland_disc = GlandDiscriminator(in_channels=3)


def _state_digest(state: dict) -> str:
    buf = io.BytesIO()
    torch.save({k: v.cpu() for k, v in state.items()}, buf)
    return hashlib.sha256(buf.getvalue()).hexdigest()[:12]


def save_checkpoint(
    path: str | Path,
    model: SynthesisModel,
    discriminators: DiscriminatorSet | None = None,
    iteration: int = 0,
    loss_weights: dict | None = None,
) -> str:
    """Write a checkpoint archive; returns its content-derived id."""
    generator_state = model.state_dict()
    checkpoint_id = _state_digest(generator_state)
    manifest = {
        **asdict(model.config),
        "iteration": iteration,
        "loss_weights": loss_weights,
        "checkpoint_id": checkpoint_id,
    }
    payload = {
        "manifest": manifest,
        "generator": generator_state,
        "discriminators": discriminators.state_dict() if discriminators else None,
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    torch.save(payload, path)
    model.checkpoint_id = checkpoint_id
    return checkpoint_id


def load_checkpoint(
    path: str | Path, with_discriminators: bool = False
) -> tuple[SynthesisModel, DiscriminatorSet | None, dict]:
    """Rebuild the model (and optionally discriminators) from an archive.

    The manifest is authoritative for the model geometry; weight shapes are
    verified by the strict state-dict load.
    """
    payload = torch.load(Path(path), map_location="cpu", weights_only=True)
    manifest = payload["manifest"]
    config = ModelConfig(
        canvas_size=manifest["canvas_size"],
        gland_mask_size=manifest["gland_mask_size"],
        embed_dim=manifest["embed_dim"],
        noise_dim=manifest["noise_dim"],
        max_glands=manifest["max_glands"],
    )
    model = SynthesisModel(config)
    model.load_state_dict(payload["generator"])
    model.checkpoint_id = manifest["checkpoint_id"]
    model.eval()

    discriminators = None
    if with_discriminators:
        if payload["discriminators"] is None:
            raise ValueError(f"checkpoint {path} holds no discriminator weights")
        discriminators = DiscriminatorSet(config)
        discriminators.load_state_dict(payload["discriminators"])
    return model, discriminators, manifest
