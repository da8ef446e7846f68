import pytest
import torch

from glandsynth.composition import compose_cumulative_mask, crop_and_resize, warp_into_bbox
from glandsynth.geometry import BoundingBox

D, B, N = 8, 16, 64


def gland(seed: int = 0):
    gen = torch.Generator().manual_seed(seed)
    a = torch.randn(D, generator=gen)
    m = torch.rand(1, B, B, generator=gen)
    return a, m


# --- warp oracle ----------------------------------------------------------------

def test_identity_warp_equals_direct_placement():
    # B x B box at an integer offset: warping must be exact pasting.
    a, m = gland(3)
    field = a[:, None, None] * m
    bbox = BoundingBox(8, 24, 8 + B, 24 + B)
    warped = warp_into_bbox(field, bbox, N)
    direct = torch.zeros(D, N, N)
    direct[:, 24 : 24 + B, 8 : 8 + B] = field
    assert (warped - direct).abs().max().item() < 1e-5


def test_warp_zero_outside_bbox():
    a, m = gland(4)
    bbox = BoundingBox(0, 0, N // 2, N)  # left half
    warped = warp_into_bbox(a[:, None, None] * m, bbox, N)
    assert warped[:, :, N // 2 :].abs().max().item() == 0.0


def test_warp_requires_3d():
    with pytest.raises(ValueError, match="C x H x W"):
        warp_into_bbox(torch.zeros(B, B), BoundingBox(0, 0, B, B), N)


def test_warp_box_covering_no_pixel_center_is_all_zero():
    a, m = gland(5)
    warped = warp_into_bbox(a[:, None, None] * m, BoundingBox(10.6, 10.2, 10.9, 30.0), N)
    assert warped.abs().max().item() == 0.0


def test_warp_fractional_box_stays_inside_window():
    a, m = gland(6)
    bbox = BoundingBox(10.3, 5.7, 29.9, 22.4)
    warped = warp_into_bbox(a[:, None, None] * m, bbox, N)
    outside = warped.clone()
    ix0, ix1 = 10, 30  # ceil(10.3-0.5)=10, ceil(29.9-0.5)=30
    iy0, iy1 = 6, 22
    outside[:, iy0:iy1, ix0:ix1] = 0.0
    assert outside.abs().max().item() == 0.0


# --- composition ----------------------------------------------------------------

def test_full_canvas_constant_mask_broadcasts_embedding():
    a = torch.randn(D, generator=torch.Generator().manual_seed(9))
    m = torch.ones(1, B, B)
    c = compose_cumulative_mask([a], [m], [BoundingBox(0, 0, N, N)], N)
    expected = a[:, None, None].expand(D, N, N)
    assert (c - expected).abs().max().item() < 1e-5


def test_zero_masks_compose_to_zero():
    a1, _ = gland(1)
    a2, _ = gland(2)
    zero = torch.zeros(1, B, B)
    c = compose_cumulative_mask(
        [a1, a2], [zero, zero],
        [BoundingBox(0, 0, B, B), BoundingBox(20, 20, 20 + B, 20 + B)], N,
    )
    assert c.abs().max().item() == 0.0


def test_zero_outside_box_union():
    a, m = gland(11)
    c = compose_cumulative_mask([a], [m], [BoundingBox(0, 0, N // 2, N)], N)
    assert c[:, :, N // 2 :].abs().max().item() == 0.0
    assert c[:, :, : N // 2].abs().sum().item() > 0.0


def test_additivity_overlapping_boxes():
    a1, m1 = gland(21)
    a2, m2 = gland(22)
    boxes = [BoundingBox(4, 4, 4 + B, 4 + B), BoundingBox(10, 8, 10 + B, 8 + B)]
    joint = compose_cumulative_mask([a1, a2], [m1, m2], boxes, N)
    solo1 = compose_cumulative_mask([a1], [m1], boxes[:1], N)
    solo2 = compose_cumulative_mask([a2], [m2], boxes[1:], N)
    assert torch.equal(joint, solo1 + solo2)


def test_compose_length_mismatch():
    a, m = gland(0)
    with pytest.raises(ValueError, match="mismatched"):
        compose_cumulative_mask([a], [m, m], [BoundingBox(0, 0, B, B)], N)


def test_compose_empty_rejected():
    with pytest.raises(ValueError, match="empty"):
        compose_cumulative_mask([], [], [], N)


def test_compose_differentiable():
    a, m = gland(31)
    a = a.requires_grad_(True)
    m = m.requires_grad_(True)
    c = compose_cumulative_mask([a], [m], [BoundingBox(5, 5, 5 + B, 5 + B)], N)
    c.sum().backward()
    assert a.grad is not None and torch.isfinite(a.grad).all() and a.grad.abs().sum() > 0
    assert m.grad is not None and torch.isfinite(m.grad).all() and m.grad.abs().sum() > 0


def test_locality_perturbation_confined_to_bbox():
    # Changing one gland's mask must not change the canvas outside its box.
    a1, m1 = gland(41)
    a2, m2 = gland(42)
    boxes = [BoundingBox(2, 2, 2 + B, 2 + B), BoundingBox(40, 40, 40 + B, 40 + B)]
    base = compose_cumulative_mask([a1, a2], [m1, m2], boxes, N)
    bumped = compose_cumulative_mask([a1, a2], [m1, m2 + 0.25], boxes, N)
    delta = (bumped - base).abs()
    outside = delta.clone()
    outside[:, 40 : 40 + B, 40 : 40 + B] = 0.0
    assert outside.max().item() == 0.0
    assert delta[:, 40 : 40 + B, 40 : 40 + B].max().item() > 0.0


# --- crop-and-resize --------------------------------------------------------------

def test_crop_identity_at_matching_size():
    gen = torch.Generator().manual_seed(5)
    image = torch.randn(3, N, N, generator=gen)
    bbox = BoundingBox(8, 16, 8 + 32, 16 + 32)
    crop = crop_and_resize(image, [bbox], 32)
    assert crop.shape == (1, 3, 32, 32)
    assert (crop[0] - image[:, 16:48, 8:40]).abs().max().item() < 1e-6


def test_crop_constant_region():
    image = torch.full((3, N, N), 0.37)
    crop = crop_and_resize(image, [BoundingBox(3, 5, 3 + 40, 5 + 40)], 32)
    assert (crop - 0.37).abs().max().item() < 1e-6


def test_crop_count_matches_boxes():
    image = torch.randn(3, N, N)
    boxes = [BoundingBox(0, 0, 10, 10), BoundingBox(5, 5, 30, 20), BoundingBox(40, 40, 64, 64)]
    assert crop_and_resize(image, boxes, 16).shape == (3, 3, 16, 16)


def test_crop_empty_rejected():
    with pytest.raises(ValueError, match="no bounding boxes"):
        crop_and_resize(torch.randn(3, N, N), [], 16)


def test_crop_gradient_confined_to_dilated_bbox():
    image = torch.randn(3, N, N).requires_grad_(True)
    bbox = BoundingBox(12, 20, 28, 36)
    crop_and_resize(image, [bbox], 16).sum().backward()
    grad = image.grad.abs().sum(dim=0)
    inside = torch.zeros(N, N, dtype=torch.bool)
    inside[19:37, 11:29] = True  # bbox dilated by one pixel
    assert grad[~inside].sum().item() == 0.0
    assert grad[inside].sum().item() > 0.0
