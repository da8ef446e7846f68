"""glandsynth: interactive synthesis of colorectal tissue images with paired
gland segmentation masks from user-authored gland layouts.
"""

from .composition import compose_cumulative_mask, crop_and_resize, warp_into_bbox
from .data import (
    DatasetManifest,
    GlandDataset,
    ManifestEntry,
    PatchExtraction,
    TrainingSample,
    derive_individual_gt_masks,
    extract_patches,
    load_image,
    load_manifest,
    load_mask,
    prepare_dataset,
    save_image,
    save_manifest,
    save_mask,
    split_dataset,
)
from .evaluation import (
    EXTRACTORS,
    SegmentationReport,
    dice,
    fid,
    get_extractor,
    segmentation_assessment,
)
from .geometry import (
    BoundingBox,
    GlandLayout,
    GlandSpec,
    ValidationReport,
    bbox_from_spec,
    extract_gland_objects,
    layout_bboxes,
    layout_from_dict,
    layout_from_json,
    layout_to_dict,
    layout_to_json,
    validate_layout,
)
from .losses import LossWeights, composite_objective
from .model import (
    DiscriminatorSet,
    GeneratedPair,
    ModelConfig,
    SynthesisModel,
    load_checkpoint,
    save_checkpoint,
)
from .training import TrainConfig, Trainer, run_training

__version__ = "0.1.0"

__all__ = [
    "BoundingBox",
    "DatasetManifest",
    "DiscriminatorSet",
    "EXTRACTORS",
    "GeneratedPair",
    "GlandDataset",
    "GlandLayout",
    "GlandSpec",
    "LossWeights",
    "ManifestEntry",
    "ModelConfig",
    "PatchExtraction",
    "SegmentationReport",
    "SynthesisModel",
    "TrainConfig",
    "Trainer",
    "TrainingSample",
    "ValidationReport",
    "bbox_from_spec",
    "compose_cumulative_mask",
    "composite_objective",
    "crop_and_resize",
    "derive_individual_gt_masks",
    "dice",
    "extract_gland_objects",
    "extract_patches",
    "fid",
    "get_extractor",
    "layout_bboxes",
    "layout_from_dict",
    "layout_from_json",
    "layout_to_dict",
    "layout_to_json",
    "load_checkpoint",
    "load_image",
    "load_manifest",
    "load_mask",
    "prepare_dataset",
    "run_training",
    "save_checkpoint",
    "save_image",
    "save_manifest",
    "save_mask",
    "segmentation_assessment",
    "split_dataset",
    "validate_layout",
    "warp_into_bbox",
]
