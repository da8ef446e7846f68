"""Alternating adversarial training: one generator update minimizing the
weighted composite objective, then one update for each discriminator on
real-vs-detached-fake pairs.
"""

from __future__ import annotations

import json
import random
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import torch

from . import losses
from .data import TrainingSample
from .discriminators import crop_and_resize_glands
from .losses import LossWeights
from .model import DiscriminatorSet, ModelConfig, SynthesisModel, save_checkpoint

METRIC_KEYS = (
    "img_rec", "mask_rec", "gland_rec",
    "adv_T", "adv_Z", "adv_G",
    "d_T", "d_Z", "d_G",
)


@dataclass
class TrainConfig:
    learning_rate: float = 1e-4
    batch_size: int = 1
    total_iterations: int = 300_000
    adam_betas: tuple[float, float] = (0.5, 0.999)
    weights: LossWeights = field(default_factory=LossWeights)
    checkpoint_interval: int = 10_000
    rng_seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.total_iterations < 1:
            raise ValueError("total_iterations must be >= 1")
        if self.batch_size != 1:
            raise ValueError("only batch size 1 is supported")


def set_seed(seed: int) -> None:
    torch.manual_seed(seed)
    np.random.seed(seed % 2**32)
    random.seed(seed)


def _check_finite(name: str, value: torch.Tensor) -> torch.Tensor:
    if not torch.isfinite(value):
        raise FloatingPointError(f"non-finite loss component {name}: {value.item()}")
    return value


class Trainer:
    """Owns the model, adversaries, and their optimizers for one run."""

    def __init__(
        self,
        config: TrainConfig,
        model: SynthesisModel,
        discriminators: DiscriminatorSet,
    ):
        self.config = config
        self.model = model
        self.discriminators = discriminators
        betas = config.adam_betas
        lr = config.learning_rate
        self.opt_generator = torch.optim.Adam(model.parameters(), lr=lr, betas=betas)
        self.opt_mask_disc = torch.optim.Adam(
            discriminators.mask_disc.parameters(), lr=lr, betas=betas
        )
        self.opt_image_disc = torch.optim.Adam(
            discriminators.image_disc.parameters(), lr=lr, betas=betas
        )
        self.opt_gland_disc = torch.optim.Adam(
            discriminators.gland_disc.parameters(), lr=lr, betas=betas
        )
        self.noise_generator = torch.Generator().manual_seed(config.rng_seed)

    def _disc_update(self, optimizer, disc, real, fake, name) -> float:
        optimizer.zero_grad()
        loss = losses.adversarial(disc(real), True) + losses.adversarial(disc(fake), False)
        _check_finite(name, loss)
        loss.backward()
        optimizer.step()
        return loss.item()

    def train_step(self, sample: TrainingSample) -> dict[str, float]:
        """One generator update followed by one update per discriminator."""
        model, discs, weights = self.model, self.discriminators, self.config.weights
        model.train()
        discs.train()

        noise = torch.stack(
            [
                torch.randn(model.config.noise_dim, generator=self.noise_generator)
                for _ in sample.bboxes
            ]
        )
        image, component, gland_masks = model.generate(noise, sample.bboxes)
        fake_crops = crop_and_resize_glands(image[0], sample.bboxes)

        img_rec = _check_finite(
            "img_rec", losses.image_reconstruction(image[0], sample.image)
        )
        mask_rec = _check_finite(
            "mask_rec", losses.mask_reconstruction(component[0], sample.mask)
        )
        gland_rec = _check_finite(
            "gland_rec",
            losses.gland_mask_reconstruction(list(gland_masks), sample.gland_masks),
        )
        adv_mask = _check_finite(
            "adv_T", losses.adversarial(discs.mask_disc(component), True)
        )
        adv_image = _check_finite(
            "adv_Z", losses.adversarial(discs.image_disc(image), True)
        )
        adv_gland = _check_finite(
            "adv_G", losses.adversarial(discs.gland_disc(fake_crops), True)
        )
        total = losses.composite_objective(
            img_rec, mask_rec, gland_rec, adv_mask, adv_image, adv_gland, weights
        )
        self.opt_generator.zero_grad()
        total.backward()
        self.opt_generator.step()

        d_mask = self._disc_update(
            self.opt_mask_disc,
            discs.mask_disc,
            sample.mask.unsqueeze(0),
            component.detach(),
            "d_T",
        )
        d_image = self._disc_update(
            self.opt_image_disc,
            discs.image_disc,
            sample.image.unsqueeze(0),
            image.detach(),
            "d_Z",
        )
        real_crops = crop_and_resize_glands(sample.image, sample.bboxes)
        d_gland = self._disc_update(
            self.opt_gland_disc,
            discs.gland_disc,
            real_crops,
            crop_and_resize_glands(image[0].detach(), sample.bboxes),
            "d_G",
        )

        return {
            "img_rec": img_rec.item(),
            "mask_rec": mask_rec.item(),
            "gland_rec": gland_rec.item(),
            "adv_T": adv_mask.item(),
            "adv_Z": adv_image.item(),
            "adv_G": adv_gland.item(),
            "d_T": d_mask,
            "d_Z": d_image,
            "d_G": d_gland,
        }


def run_training(
    config: TrainConfig,
    dataset: Sequence[TrainingSample],
    out_dir: str | Path,
    model_config: ModelConfig = ModelConfig(),
) -> list[Path]:
    """Train from scratch over a dataset of single samples.

    Iterates `train_step` in seeded shuffled order, appends one NDJSON
    metrics record per step to metrics.ndjson, and writes a checkpoint every
    `checkpoint_interval` iterations. Returns the checkpoint paths.
    """
    if len(dataset) == 0:
        raise ValueError("dataset is empty")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    set_seed(config.rng_seed)
    model = SynthesisModel(model_config)
    discriminators = DiscriminatorSet(model_config)
    trainer = Trainer(config, model, discriminators)
    order_rng = random.Random(config.rng_seed)

    weight_map = {
        "lambda1": config.weights.image_rec,
        "lambda2": config.weights.mask_rec,
        "lambda3": config.weights.gland_rec,
        "lambda4": config.weights.adv_mask,
        "lambda5": config.weights.adv_image,
        "lambda6": config.weights.adv_gland,
    }

    checkpoints: list[Path] = []
    order: list[int] = []
    metrics_path = out_dir / "metrics.ndjson"
    with open(metrics_path, "w") as log:
        for iteration in range(1, config.total_iterations + 1):
            if not order:
                order = list(range(len(dataset)))
                order_rng.shuffle(order)
            sample = dataset[order.pop()]

            started = time.perf_counter()
            try:
                metrics = trainer.train_step(sample)
            except FloatingPointError as err:
                raise FloatingPointError(f"iteration {iteration}: {err}") from err
            wall_ms = (time.perf_counter() - started) * 1000.0

            record = {"iter": iteration, **metrics, "wall_ms": round(wall_ms, 3)}
            log.write(json.dumps(record) + "\n")

            if iteration % config.checkpoint_interval == 0:
                ckpt = out_dir / f"checkpoint_{iteration:07d}.pt"
                save_checkpoint(
                    ckpt, model, discriminators, iteration=iteration, loss_weights=weight_map
                )
                checkpoints.append(ckpt)
    return checkpoints
