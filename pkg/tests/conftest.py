import numpy as np
import pytest
import torch

from glandsynth.data import TrainingSample, derive_individual_gt_masks
from glandsynth.geometry import BoundingBox
from glandsynth.model import ModelConfig, SynthesisModel, save_checkpoint
from glandsynth.training import set_seed

TINY = ModelConfig(canvas_size=64, gland_mask_size=32)


def rect_mask(canvas: int, rects: list[tuple[int, int, int, int]]) -> torch.Tensor:
    """Binary 1 x canvas x canvas mask from (x0, y0, x1, y1) rectangles."""
    mask = torch.zeros(1, canvas, canvas)
    for x0, y0, x1, y1 in rects:
        mask[0, y0:y1, x0:x1] = 1.0
    return mask


def rect_sample(
    canvas: int = TINY.canvas_size,
    rects: list[tuple[int, int, int, int]] | None = None,
    gland_mask_size: int = TINY.gland_mask_size,
    seed: int = 0,
) -> TrainingSample:
    """Deterministic synthetic sample: tinted rectangles over a gradient."""
    if rects is None:
        rects = [(12, 16, 40, 44)]
    gen = torch.Generator().manual_seed(seed)
    ramp = torch.linspace(-0.6, 0.2, canvas)
    image = ramp.expand(canvas, canvas).unsqueeze(0).repeat(3, 1, 1).clone()
    image += 0.05 * torch.randn(3, canvas, canvas, generator=gen)
    mask = rect_mask(canvas, rects)
    tint = torch.tensor([0.7, -0.3, 0.1]).view(3, 1, 1)
    image = image * (1 - mask) + tint * mask
    image = image.clamp(-1, 1)
    gland_masks, bboxes = derive_individual_gt_masks(mask, gland_mask_size)
    return TrainingSample(image=image, mask=mask, gland_masks=gland_masks, bboxes=bboxes)


@pytest.fixture()
def tiny_config() -> ModelConfig:
    return TINY


@pytest.fixture(scope="session")
def tiny_checkpoint(tmp_path_factory):
    """Randomly initialized desk-scale checkpoint on disk."""
    set_seed(1234)
    model = SynthesisModel(TINY)
    path = tmp_path_factory.mktemp("ckpt") / "tiny.pt"
    checkpoint_id = save_checkpoint(path, model, iteration=0)
    return path, checkpoint_id


@pytest.fixture()
def box() -> BoundingBox:
    return BoundingBox(16.0, 20.0, 48.0, 44.0)


def as_np(mask: torch.Tensor) -> np.ndarray:
    return mask.detach().cpu().numpy()
