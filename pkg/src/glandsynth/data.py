"""Dataset preparation: patch extraction from large image/mask pairs,
per-gland ground-truth derivation, manifests, and sample loading.

Images are stored as 8-bit RGB PNG, masks as 8-bit single-channel PNG with
foreground 255. Loading normalizes images to [-1, 1] and masks to [0, 1];
mask resizing is nearest-neighbor plus thresholding so masks stay binary.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
import torch.nn.functional as F
from PIL import Image

from .geometry import BoundingBox, extract_gland_objects

DEFAULT_PATCH_SIZE = 512
DEFAULT_OUT_SIZE = 256
DEFAULT_MIN_FOREGROUND = 0.02
DEFAULT_GLAND_MASK_SIZE = 64


# --- PNG <-> tensor conventions ----------------------------------------------

def image_to_uint8(image: torch.Tensor) -> np.ndarray:
    """3 x H x W in [-1, 1] -> H x W x 3 uint8."""
    arr = image.detach().cpu().numpy().transpose(1, 2, 0)
    return np.clip(np.rint((arr + 1.0) * 127.5), 0, 255).astype(np.uint8)


def mask_to_uint8(mask: torch.Tensor) -> np.ndarray:
    """1 x H x W in [0, 1] -> H x W uint8."""
    arr = mask.detach().cpu().numpy()[0]
    return np.clip(np.rint(arr * 255.0), 0, 255).astype(np.uint8)


def load_image(path: str | Path) -> torch.Tensor:
    """8-bit RGB PNG -> 3 x H x W float tensor in [-1, 1]."""
    arr = np.asarray(Image.open(path).convert("RGB"), dtype=np.float32)
    return torch.from_numpy(arr.transpose(2, 0, 1) / 127.5 - 1.0)


def load_mask(path: str | Path) -> torch.Tensor:
    """8-bit grayscale PNG -> 1 x H x W float tensor in [0, 1]."""
    arr = np.asarray(Image.open(path).convert("L"), dtype=np.float32)
    return torch.from_numpy(arr / 255.0).unsqueeze(0)


def save_image(path: str | Path, image: torch.Tensor) -> None:
    Image.fromarray(image_to_uint8(image)).save(path)


def save_mask(path: str | Path, mask: torch.Tensor) -> None:
    Image.fromarray(mask_to_uint8(mask), mode="L").save(path)


# --- training samples ---------------------------------------------------------

@dataclass
class TrainingSample:
    """Ground-truth image, mask, derived per-gland masks, and their boxes."""

    image: torch.Tensor  # 3 x N x N in [-1, 1]
    mask: torch.Tensor  # 1 x N x N binary
    gland_masks: list[torch.Tensor]  # each 1 x B x B binary
    bboxes: list[BoundingBox]

    def __post_init__(self):
        if len(self.gland_masks) != len(self.bboxes):
            raise ValueError("gland mask / bbox count mismatch")
        if len(self.bboxes) < 1:
            raise ValueError("a training sample needs at least one gland")


def derive_individual_gt_masks(
    mask: torch.Tensor | np.ndarray,
    gland_mask_size: int = DEFAULT_GLAND_MASK_SIZE,
    min_area: int | None = None,
) -> tuple[list[torch.Tensor], list[BoundingBox]]:
    """Crop each gland blob out of a binary mask and resize to the
    per-gland mask resolution, re-thresholding at 0.5.

    Returns aligned (masks, bboxes) lists, empty for an empty mask.
    """
    tensor = torch.as_tensor(mask, dtype=torch.float32)
    if tensor.dim() == 2:
        tensor = tensor.unsqueeze(0)
    kwargs = {} if min_area is None else {"min_area": min_area}
    objects = extract_gland_objects(tensor.numpy(), **kwargs)
    masks, bboxes = [], []
    for _, bbox in objects:
        y0, y1 = int(bbox.y0), int(bbox.y1)
        x0, x1 = int(bbox.x0), int(bbox.x1)
        crop = tensor[:, y0:y1, x0:x1].unsqueeze(0)
        resized = F.interpolate(
            crop, size=(gland_mask_size, gland_mask_size), mode="bilinear", align_corners=False
        )[0]
        masks.append((resized > 0.5).float())
        bboxes.append(bbox)
    return masks, bboxes


# --- patch extraction ----------------------------------------------------------

@dataclass
class PatchExtraction:
    """Kept (image, mask) patch pairs plus grid/filter accounting."""

    pairs: list[tuple[np.ndarray, np.ndarray]]
    grid_positions: int
    dropped: int

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)


def extract_patches(
    image: np.ndarray,
    mask: np.ndarray,
    patch_size: int = DEFAULT_PATCH_SIZE,
    out_size: int = DEFAULT_OUT_SIZE,
    stride: int | None = None,
    min_foreground: float = DEFAULT_MIN_FOREGROUND,
) -> PatchExtraction:
    """Regular-grid crops resized to the model resolution.

    Image patches are resized bilinearly; mask patches nearest-neighbor then
    thresholded. Patches whose foreground fraction is below `min_foreground`
    are dropped.
    """
    image = np.asarray(image)
    mask = np.asarray(mask)
    if image.shape[:2] != mask.shape[:2]:
        raise ValueError(f"image {image.shape[:2]} vs mask {mask.shape[:2]} size mismatch")
    if stride is None:
        stride = patch_size
    if stride < 1:
        raise ValueError("stride must be >= 1")

    height, width = mask.shape[:2]
    binary = mask > 0.5 if mask.dtype != np.uint8 else mask > 127

    pairs = []
    grid_positions = 0
    for y in range(0, height - patch_size + 1, stride):
        for x in range(0, width - patch_size + 1, stride):
            grid_positions += 1
            mask_patch = binary[y : y + patch_size, x : x + patch_size]
            if mask_patch.mean() < min_foreground:
                continue
            img_patch = image[y : y + patch_size, x : x + patch_size]
            img_out = np.asarray(
                Image.fromarray(img_patch).resize((out_size, out_size), Image.Resampling.BILINEAR)
            )
            mask_out = np.asarray(
                Image.fromarray(mask_patch.astype(np.uint8) * 255).resize(
                    (out_size, out_size), Image.Resampling.NEAREST
                )
            )
            pairs.append((img_out, (mask_out > 127).astype(np.uint8)))
    return PatchExtraction(pairs, grid_positions, grid_positions - len(pairs))


# --- manifests and splits -------------------------------------------------------

@dataclass
class ManifestEntry:
    image_path: str
    mask_path: str
    split: str  # train | test


@dataclass
class DatasetManifest:
    entries: list[ManifestEntry]
    patch_size: int = DEFAULT_PATCH_SIZE
    out_size: int = DEFAULT_OUT_SIZE
    stride: int = DEFAULT_PATCH_SIZE
    extra: dict = field(default_factory=dict)

    def split_entries(self, split: str) -> list[ManifestEntry]:
        return [e for e in self.entries if e.split == split]


def split_dataset(
    entries: list[tuple[str, str]],
    train_fraction: float = 0.75,
    seed: int = 0,
    **patch_params,
) -> DatasetManifest:
    """Seeded shuffle then split into train/test manifest entries."""
    if not entries:
        raise ValueError("no dataset entries to split")
    if not 0 < train_fraction < 1:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    order = list(entries)
    random.Random(seed).shuffle(order)
    n_train = int(len(order) * train_fraction)
    manifest_entries = [
        ManifestEntry(img, msk, "train" if i < n_train else "test")
        for i, (img, msk) in enumerate(order)
    ]
    return DatasetManifest(manifest_entries, **patch_params)


def save_manifest(manifest: DatasetManifest, path: str | Path) -> None:
    payload = {
        "entries": [e.__dict__ for e in manifest.entries],
        "patch_size": manifest.patch_size,
        "out_size": manifest.out_size,
        "stride": manifest.stride,
        "extra": manifest.extra,
    }
    Path(path).write_text(json.dumps(payload, indent=2))


def load_manifest(path: str | Path) -> DatasetManifest:
    """Load a manifest; entry paths are resolved against the manifest's
    directory and must exist."""
    path = Path(path)
    payload = json.loads(path.read_text())
    entries = []
    for raw in payload["entries"]:
        if raw["split"] not in ("train", "test"):
            raise ValueError(f"bad split {raw['split']!r} in manifest")
        entry = ManifestEntry(**raw)
        for p in (entry.image_path, entry.mask_path):
            if not (path.parent / p).exists():
                raise FileNotFoundError(f"manifest references missing file {p}")
        entries.append(entry)
    return DatasetManifest(
        entries,
        patch_size=payload["patch_size"],
        out_size=payload["out_size"],
        stride=payload["stride"],
        extra=payload.get("extra", {}),
    )


def prepare_dataset(
    images_dir: str | Path,
    masks_dir: str | Path,
    out_dir: str | Path,
    patch_size: int = DEFAULT_PATCH_SIZE,
    out_size: int = DEFAULT_OUT_SIZE,
    stride: int | None = None,
    train_fraction: float = 0.75,
    seed: int = 0,
    min_foreground: float = DEFAULT_MIN_FOREGROUND,
) -> dict:
    """Turn a directory of (image, mask) pairs into a patch dataset.

    Pairs are matched by filename stem. Patches that keep no gland object
    after blob filtering are dropped (every training sample needs n >= 1).
    Writes patch PNGs plus manifest.json under `out_dir`; returns a summary.
    """
    images_dir, masks_dir, out_dir = Path(images_dir), Path(masks_dir), Path(out_dir)
    masks_by_stem = {p.stem: p for p in sorted(masks_dir.iterdir()) if p.is_file()}
    image_files = [p for p in sorted(images_dir.iterdir()) if p.is_file()]
    if not image_files:
        raise ValueError(f"no images found in {images_dir}")

    (out_dir / "images").mkdir(parents=True, exist_ok=True)
    (out_dir / "masks").mkdir(parents=True, exist_ok=True)

    entries: list[tuple[str, str]] = []
    grid_total = dropped_fg = dropped_empty = 0
    for image_file in image_files:
        mask_file = masks_by_stem.get(image_file.stem)
        if mask_file is None:
            raise FileNotFoundError(f"no mask for image {image_file.name}")
        image = np.asarray(Image.open(image_file).convert("RGB"))
        mask = np.asarray(Image.open(mask_file).convert("L"))
        extraction = extract_patches(
            image, mask, patch_size, out_size, stride, min_foreground
        )
        grid_total += extraction.grid_positions
        dropped_fg += extraction.dropped
        for i, (img_patch, mask_patch) in enumerate(extraction):
            gland_masks, _ = derive_individual_gt_masks(mask_patch.astype(np.float32))
            if not gland_masks:
                dropped_empty += 1
                continue
            name = f"{image_file.stem}_{i:04d}.png"
            Image.fromarray(img_patch).save(out_dir / "images" / name)
            Image.fromarray(mask_patch * 255, mode="L").save(out_dir / "masks" / name)
            entries.append((f"images/{name}", f"masks/{name}"))

    manifest = split_dataset(
        entries,
        train_fraction,
        seed,
        patch_size=patch_size,
        out_size=out_size,
        stride=stride if stride is not None else patch_size,
    )
    save_manifest(manifest, out_dir / "manifest.json")
    return {
        "patches": len(entries),
        "train": len(manifest.split_entries("train")),
        "test": len(manifest.split_entries("test")),
        "grid_positions": grid_total,
        "dropped_low_foreground": dropped_fg,
        "dropped_no_glands": dropped_empty,
        "manifest": str(out_dir / "manifest.json"),
    }


class GlandDataset:
    """Training samples materialized from a prepared dataset manifest."""

    def __init__(
        self,
        manifest_path: str | Path,
        split: str = "train",
        gland_mask_size: int = DEFAULT_GLAND_MASK_SIZE,
    ):
        self.root = Path(manifest_path).parent
        self.manifest = load_manifest(manifest_path)
        self.entries = self.manifest.split_entries(split)
        self.gland_mask_size = gland_mask_size

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, index: int) -> TrainingSample:
        entry = self.entries[index]
        image = load_image(self.root / entry.image_path)
        mask = (load_mask(self.root / entry.mask_path) > 0.5).float()
        gland_masks, bboxes = derive_individual_gt_masks(mask, self.gland_mask_size)
        return TrainingSample(image=image, mask=mask, gland_masks=gland_masks, bboxes=bboxes)
