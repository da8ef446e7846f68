"""Differentiable placement of per-gland tensors on the canvas and back.

Both directions are bilinear resampling with a fixed (non-learned) sampling
grid: `warp_into_bbox` stretches a B x B gland tensor into its bounding box
on an N x N canvas, `crop_and_resize` pulls a bounding-box region out of a
canvas-sized tensor at a fixed resolution. Pixel (i, j) is treated as a unit
square with center (j + 0.5, i + 0.5).
"""

from __future__ import annotations

import math
from typing import Sequence

import torch
import torch.nn.functional as F

from .geometry import BoundingBox


def _pixel_window(lo: float, hi: float, limit: int) -> tuple[int, int]:
    """Integer pixel range whose centers fall inside [lo, hi), clamped to [0, limit)."""
    start = max(0, math.ceil(lo - 0.5))
    stop = min(limit, math.ceil(hi - 0.5))
    return start, stop


def warp_into_bbox(
    tensor: torch.Tensor, bbox: BoundingBox, canvas_size: int
) -> torch.Tensor:
    """Resample a C x B x B tensor into `bbox` on a zero C x N x N canvas.

    Pixels outside the box stay exactly zero. When the box is B x B at an
    integer offset the warp reduces to direct placement.
    """
    if tensor.dim() != 3:
        raise ValueError(f"expected C x H x W tensor, got shape {tuple(tensor.shape)}")
    channels, src_h, src_w = tensor.shape
    canvas = tensor.new_zeros(channels, canvas_size, canvas_size)

    ix0, ix1 = _pixel_window(bbox.x0, bbox.x1, canvas_size)
    iy0, iy1 = _pixel_window(bbox.y0, bbox.y1, canvas_size)
    if ix0 >= ix1 or iy0 >= iy1:
        return canvas  # box thinner than one pixel

    xs = torch.arange(ix0, ix1, dtype=tensor.dtype, device=tensor.device) + 0.5
    ys = torch.arange(iy0, iy1, dtype=tensor.dtype, device=tensor.device) + 0.5
    # canvas pixel center -> source pixel coordinate -> grid_sample [-1, 1]
    gx = 2.0 * (xs - bbox.x0) / bbox.width - 1.0
    gy = 2.0 * (ys - bbox.y0) / bbox.height - 1.0
    grid = torch.stack(torch.meshgrid(gy, gx, indexing="ij")[::-1], dim=-1)

    sampled = F.grid_sample(
        tensor.unsqueeze(0),
        grid.unsqueeze(0),
        mode="bilinear",
        padding_mode="border",
        align_corners=False,
    )[0]
    canvas[:, iy0:iy1, ix0:ix1] = sampled
    return canvas


def compose_cumulative_mask(
    embeddings: Sequence[torch.Tensor],
    masks: Sequence[torch.Tensor],
    bboxes: Sequence[BoundingBox],
    canvas_size: int,
) -> torch.Tensor:
    """Sum embedding-weighted gland masks warped into their boxes.

    Each gland contributes embedding[:, None, None] * mask (a D x B x B
    tensor) warped into its bounding box; overlaps add. Returns D x N x N.
    """
    if not (len(embeddings) == len(masks) == len(bboxes)):
        raise ValueError(
            f"mismatched gland counts: {len(embeddings)} embeddings, "
            f"{len(masks)} masks, {len(bboxes)} boxes"
        )
    if len(embeddings) == 0:
        raise ValueError("cannot compose an empty gland list")

    canvas = None
    for a, m, bbox in zip(embeddings, masks, bboxes):
        if a.dim() != 1:
            raise ValueError(f"embedding must be 1-d, got shape {tuple(a.shape)}")
        if m.dim() != 3 or m.shape[0] != 1:
            raise ValueError(f"mask must be 1 x B x B, got shape {tuple(m.shape)}")
        field = a[:, None, None] * m  # D x B x B
        warped = warp_into_bbox(field, bbox, canvas_size)
        canvas = warped if canvas is None else canvas + warped
    return canvas


def crop_and_resize(
    image: torch.Tensor, bboxes: Sequence[BoundingBox], out_size: int
) -> torch.Tensor:
    """Bilinearly crop each bounding box out of a C x N x N tensor.

    Returns an n x C x out_size x out_size stack; gradients flow back into
    `image`. A box exactly out_size wide at an integer offset is cropped
    verbatim.
    """
    if image.dim() != 3:
        raise ValueError(f"expected C x H x W tensor, got shape {tuple(image.shape)}")
    if len(bboxes) == 0:
        raise ValueError("no bounding boxes to crop")
    _, height, width = image.shape

    grids = []
    for bbox in bboxes:
        ts = (torch.arange(out_size, dtype=image.dtype, device=image.device) + 0.5) / out_size
        src_x = bbox.x0 + ts * bbox.width
        src_y = bbox.y0 + ts * bbox.height
        gx = 2.0 * src_x / width - 1.0
        gy = 2.0 * src_y / height - 1.0
        grids.append(torch.stack(torch.meshgrid(gy, gx, indexing="ij")[::-1], dim=-1))
    grid = torch.stack(grids)  # n x out x out x 2

    batch = image.unsqueeze(0).expand(len(bboxes), *image.shape)
    return F.grid_sample(
        batch, grid, mode="bilinear", padding_mode="border", align_corners=False
    )
