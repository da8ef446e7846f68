"""Evaluation metrics: FID over pluggable feature extractors, Dice overlap,
and a segmentation-based assessment harness.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import torch
import torch.nn.functional as F

FID_EPS = 1e-6

FeatureExtractor = Callable[[Sequence[torch.Tensor]], np.ndarray]


def _as_batch(images: Sequence[torch.Tensor], size: int) -> torch.Tensor:
    """Stack C x H x W images into an n x 3 x size x size float batch."""
    rows = []
    for image in images:
        if image.dim() != 3:
            raise ValueError(f"expected C x H x W image, got shape {tuple(image.shape)}")
        x = image.float()
        if x.shape[0] == 1:
            x = x.repeat(3, 1, 1)
        elif x.shape[0] != 3:
            raise ValueError(f"expected 1 or 3 channels, got {x.shape[0]}")
        x = F.interpolate(
            x.unsqueeze(0), size=(size, size), mode="bilinear", align_corners=False
        )
        rows.append(x[0])
    return torch.stack(rows)


class RandomProjectionExtractor:
    """Seeded Gaussian random projection of resized images.

    Deterministic and weight-free, so the FID pipeline is testable without a
    pretrained classifier.
    """

    def __init__(self, out_dim: int = 256, image_size: int = 64, seed: int = 0):
        self.image_size = image_size
        in_dim = 3 * image_size * image_size
        rng = np.random.default_rng(seed)
        self.projection = rng.standard_normal((in_dim, out_dim)) / np.sqrt(in_dim)

    def __call__(self, images: Sequence[torch.Tensor]) -> np.ndarray:
        batch = _as_batch(images, self.image_size)
        flat = batch.reshape(batch.shape[0], -1).numpy().astype(np.float64)
        return flat @ self.projection


class PixelExtractor:
    """Raw downsampled pixels as features."""

    def __init__(self, image_size: int = 16):
        self.image_size = image_size

    def __call__(self, images: Sequence[torch.Tensor]) -> np.ndarray:
        batch = _as_batch(images, self.image_size)
        return batch.reshape(batch.shape[0], -1).numpy().astype(np.float64)


EXTRACTORS: dict[str, Callable[[], FeatureExtractor]] = {
    "random-projection": RandomProjectionExtractor,
    "pixels": PixelExtractor,
}


def get_extractor(name: str) -> FeatureExtractor:
    if name not in EXTRACTORS:
        known = ", ".join(sorted(EXTRACTORS))
        raise ValueError(f"unknown extractor {name!r}; available: {known}")
    return EXTRACTORS[name]()


def _check_features(name: str, feats: np.ndarray) -> np.ndarray:
    feats = np.asarray(feats, dtype=np.float64)
    if feats.ndim != 2:
        raise ValueError(f"{name} features must be 2-d, got shape {feats.shape}")
    if feats.shape[0] < 2:
        raise ValueError(f"{name} needs >= 2 rows, got {feats.shape[0]}")
    if not np.isfinite(feats).all():
        raise ValueError(f"{name} features contain non-finite entries")
    return feats


def _sqrtm_psd(matrix: np.ndarray) -> np.ndarray:
    """Symmetric PSD square root via eigendecomposition."""
    values, vectors = np.linalg.eigh(matrix)
    values = np.clip(values, 0.0, None)
    return (vectors * np.sqrt(values)) @ vectors.T


def fid(real: np.ndarray, gen: np.ndarray, eps: float = FID_EPS) -> float:
    """Frechet distance between Gaussian fits of two feature sets.

    ||mu_r - mu_g||^2 + Tr(S_r + S_g - 2 (S_r S_g)^{1/2}), with population
    covariances regularized by eps on the diagonal. The cross term is
    computed through the symmetrized product sqrt(S_r) S_g sqrt(S_r), whose
    spectrum matches S_r S_g but stays real under eigh.
    """
    real = _check_features("real", real)
    gen = _check_features("gen", gen)
    if real.shape[1] != gen.shape[1]:
        raise ValueError(
            f"feature dims differ: real {real.shape[1]} vs gen {gen.shape[1]}"
        )
    dim = real.shape[1]
    mu_r, mu_g = real.mean(axis=0), gen.mean(axis=0)
    sigma_r = np.atleast_2d(np.cov(real, rowvar=False, ddof=0)) + eps * np.eye(dim)
    sigma_g = np.atleast_2d(np.cov(gen, rowvar=False, ddof=0)) + eps * np.eye(dim)

    root_r = _sqrtm_psd(sigma_r)
    cross = np.linalg.eigvalsh(root_r @ sigma_g @ root_r)
    trace_cross = np.sqrt(np.clip(cross, 0.0, None)).sum()

    diff = mu_r - mu_g
    value = diff @ diff + np.trace(sigma_r) + np.trace(sigma_g) - 2.0 * trace_cross
    return float(max(value, 0.0))


def dice(a: np.ndarray, b: np.ndarray) -> float:
    """Overlap score 2|a n b| / (|a| + |b|); 1.0 when both masks are empty."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    a = a.astype(bool)
    b = b.astype(bool)
    total = int(a.sum()) + int(b.sum())
    if total == 0:
        return 1.0
    return 2.0 * int(np.logical_and(a, b).sum()) / total


@dataclass
class SegmentationReport:
    """Aggregate Dice of a segmenter over (image, mask) pairs."""

    mean_dice: float | None
    std_dice: float | None
    per_pair: list[float | None] = field(default_factory=list)
    failures: list[tuple[int, str]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "mean_dice": self.mean_dice,
            "std_dice": self.std_dice,
            "per_pair": self.per_pair,
            "failures": [{"index": i, "error": msg} for i, msg in self.failures],
        }


def segmentation_assessment(
    segmenter: Callable[[np.ndarray], np.ndarray],
    pairs: Sequence[tuple[np.ndarray, np.ndarray]],
) -> SegmentationReport:
    """Score a segmenter against paired ground truth.

    Applies the segmenter to every image, Dice-scores the prediction against
    the paired mask, and aggregates mean and population standard deviation.
    Failed pairs (segmenter raised, or shape mismatch) are excluded from the
    aggregates and reported individually.
    """
    scores: list[float | None] = []
    failures: list[tuple[int, str]] = []
    for index, (image, mask) in enumerate(pairs):
        try:
            predicted = segmenter(image)
            scores.append(dice(predicted, mask))
        except Exception as err:
            scores.append(None)
            failures.append((index, str(err)))
    valid = [s for s in scores if s is not None]
    if valid:
        mean = float(np.mean(valid))
        std = float(np.std(valid))
    else:
        mean = std = None
    return SegmentationReport(mean_dice=mean, std_dice=std, per_pair=scores, failures=failures)


def otsu_segmenter(image: np.ndarray) -> np.ndarray:
    """Baseline intensity segmenter: Otsu threshold on the mean channel.

    Picks the polarity whose foreground is the smaller region, matching the
    convention that glands do not dominate the canvas.
    """
    from skimage.filters import threshold_otsu

    image = np.asarray(image, dtype=np.float64)
    if image.ndim == 3:
        gray = image.mean(axis=0)
    else:
        gray = image
    threshold = threshold_otsu(gray)
    below = gray < threshold
    return below if below.sum() <= below.size / 2 else ~below
