"""Command-line interface: dataset preparation, training, offline generation,
evaluation reports, and the HTTP service."""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click
import numpy as np
from PIL import Image

from .data import (
    GlandDataset,
    image_to_uint8,
    load_image,
    load_manifest,
    load_mask,
    prepare_dataset,
)
from .evaluation import (
    EXTRACTORS,
    dice as dice_score,
    fid as fid_score,
    get_extractor,
    otsu_segmenter,
    segmentation_assessment,
)
from .geometry import GlandLayout, GlandSpec, extract_gland_objects, layout_from_json
from .losses import LossWeights
from .model import ModelConfig, load_checkpoint
from .training import TrainConfig, run_training


def runtime_errors(fn):
    """Map runtime failures to exit code 1, leaving usage errors at 2."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except click.ClickException:
            raise
        except Exception as err:
            raise click.ClickException(str(err)) from err

    return wrapper


def _emit(payload: dict) -> None:
    click.echo(json.dumps(payload, indent=2))


@click.group()
@click.version_option(package_name="glandsynth")
def main():
    """Synthesize colorectal tissue images with paired gland masks."""


@main.command()
@click.option("--images", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--masks", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--out", required=True, type=click.Path(file_okay=False))
@click.option("--patch", default=512, show_default=True, help="Source patch size in pixels.")
@click.option("--size", default=256, show_default=True, help="Output patch size in pixels.")
@click.option("--stride", default=None, type=int, help="Defaults to --patch.")
@click.option("--train-frac", default=0.75, show_default=True)
@click.option("--min-foreground", default=0.02, show_default=True)
@click.option("--seed", default=0, show_default=True)
@runtime_errors
def prepare(images, masks, out, patch, size, stride, train_frac, min_foreground, seed):
    """Cut (image, mask) pairs into training patches and write a manifest."""
    summary = prepare_dataset(
        images, masks, out,
        patch_size=patch, out_size=size, stride=stride,
        train_fraction=train_frac, seed=seed, min_foreground=min_foreground,
    )
    _emit(summary)


@main.command()
@click.option("--data-dir", required=True, type=click.Path(exists=True, file_okay=False),
              help="Prepared dataset directory (holds manifest.json).")
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
@click.option("--iters", default=300_000, show_default=True, type=click.IntRange(min=1))
@click.option("--lr", default=1e-4, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--ckpt-every", default=10_000, show_default=True, type=click.IntRange(min=1))
@click.option("--gland-mask-size", default=64, show_default=True)
@click.option("--lambda1", default=100.0, show_default=True, help="Image reconstruction weight.")
@click.option("--lambda2", default=100.0, show_default=True, help="Mask reconstruction weight.")
@click.option("--lambda3", default=100.0, show_default=True, help="Gland mask reconstruction weight.")
@click.option("--lambda4", default=1.0, show_default=True, help="Mask adversarial weight.")
@click.option("--lambda5", default=1.0, show_default=True, help="Image adversarial weight.")
@click.option("--lambda6", default=1.0, show_default=True, help="Gland adversarial weight.")
@runtime_errors
def train(data_dir, out_dir, iters, lr, seed, ckpt_every, gland_mask_size,
          lambda1, lambda2, lambda3, lambda4, lambda5, lambda6):
    """Train from a prepared dataset; logs metrics and writes checkpoints."""
    manifest_path = Path(data_dir) / "manifest.json"
    if not manifest_path.exists():
        raise click.ClickException(f"no manifest.json in {data_dir}")
    dataset = GlandDataset(manifest_path, split="train", gland_mask_size=gland_mask_size)
    if len(dataset) == 0:
        raise click.ClickException("manifest has no train entries")
    weights = LossWeights(
        image_rec=lambda1, mask_rec=lambda2, gland_rec=lambda3,
        adv_mask=lambda4, adv_image=lambda5, adv_gland=lambda6,
    )
    config = TrainConfig(
        learning_rate=lr, total_iterations=iters,
        weights=weights, checkpoint_interval=ckpt_every, rng_seed=seed,
    )
    model_config = ModelConfig(
        canvas_size=dataset.manifest.out_size, gland_mask_size=gland_mask_size
    )
    checkpoints = run_training(config, dataset, out_dir, model_config=model_config)
    _emit({
        "iterations": iters,
        "checkpoints": [str(p) for p in checkpoints],
        "metrics": str(Path(out_dir) / "metrics.ndjson"),
    })


@main.command()
@click.option("--layout", "layout_file", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--checkpoint", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", default=0, show_default=True)
@click.option("--out", required=True, type=click.Path(file_okay=False))
@runtime_errors
def generate(layout_file, checkpoint, seed, out):
    """Synthesize one annotated pair from a layout JSON file."""
    layout = layout_from_json(Path(layout_file).read_text())
    model, _, _ = load_checkpoint(checkpoint)
    pair = model.synthesize(layout, rng_seed=seed)

    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    Image.fromarray(image_to_uint8(pair.image)).save(out / "image.png")
    mask_u8 = (pair.component_mask[0] > 0.5).numpy().astype(np.uint8) * np.uint8(255)
    Image.fromarray(mask_u8, mode="L").save(out / "mask.png")
    meta = {
        "seed": pair.seed,
        "checkpoint_id": pair.checkpoint_id,
        "canvas_size": layout.canvas_size,
        "bboxes": [b.to_dict() for b in pair.bboxes],
    }
    (out / "meta.json").write_text(json.dumps(meta, indent=2))
    _emit({"out": str(out), "files": ["image.png", "mask.png", "meta.json"], **meta})


@main.group(name="eval")
def evaluate():
    """Evaluation reports (JSON to standard output)."""


def _png_paths(directory: str | Path) -> list[Path]:
    paths = sorted(Path(directory).glob("*.png"))
    if not paths:
        raise click.ClickException(f"no PNG files in {directory}")
    return paths


@evaluate.command(name="fid")
@click.option("--real", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--gen", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--extractor", default="random-projection", show_default=True,
              type=click.Choice(sorted(EXTRACTORS)))
@runtime_errors
def eval_fid(real, gen, extractor):
    """Frechet distance between two image directories."""
    extract = get_extractor(extractor)
    real_feats = extract([load_image(p) for p in _png_paths(real)])
    gen_feats = extract([load_image(p) for p in _png_paths(gen)])
    _emit({
        "fid": fid_score(real_feats, gen_feats),
        "extractor": extractor,
        "n_real": int(real_feats.shape[0]),
        "n_gen": int(gen_feats.shape[0]),
    })


@evaluate.command(name="dice")
@click.option("--pred", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--truth", required=True, type=click.Path(exists=True, file_okay=False))
@runtime_errors
def eval_dice(pred, truth):
    """Mean Dice between same-named masks in two directories."""
    pred_by_name = {p.name: p for p in _png_paths(pred)}
    truth_by_name = {p.name: p for p in _png_paths(truth)}
    names = sorted(set(pred_by_name) & set(truth_by_name))
    if not names:
        raise click.ClickException("no matching mask filenames between --pred and --truth")
    per_pair = {}
    for name in names:
        a = (load_mask(pred_by_name[name])[0] > 0.5).numpy()
        b = (load_mask(truth_by_name[name])[0] > 0.5).numpy()
        per_pair[name] = dice_score(a, b)
    scores = list(per_pair.values())
    _emit({
        "mean_dice": float(np.mean(scores)),
        "std_dice": float(np.std(scores)),
        "per_pair": per_pair,
    })


@evaluate.command(name="seg-assess")
@click.option("--checkpoint", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--manifest", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--split", default="test", show_default=True,
              type=click.Choice(["train", "test"]))
@click.option("--limit", default=None, type=click.IntRange(min=1))
@click.option("--seed", default=0, show_default=True)
@runtime_errors
def eval_seg_assess(checkpoint, manifest, split, limit, seed):
    """Score a baseline segmenter on real pairs and on pairs the model
    generates from layouts extracted from the same masks, side by side."""
    model, _, _ = load_checkpoint(checkpoint)
    manifest_path = Path(manifest)
    data = load_manifest(manifest_path)
    if data.out_size != model.config.canvas_size:
        raise click.ClickException(
            f"manifest patches are {data.out_size} px but the model canvas "
            f"is {model.config.canvas_size} px"
        )
    entries = data.split_entries(split)
    if limit is not None:
        entries = entries[:limit]
    if not entries:
        raise click.ClickException(f"manifest has no {split} entries")

    real_pairs, gen_pairs, skipped = [], [], 0
    for index, entry in enumerate(entries):
        image = load_image(manifest_path.parent / entry.image_path)
        mask = (load_mask(manifest_path.parent / entry.mask_path) > 0.5).float()
        objects = extract_gland_objects(mask[0].numpy())
        if not objects:
            skipped += 1
            continue
        objects = objects[: model.config.max_glands]
        layout = GlandLayout(
            glands=tuple(
                GlandSpec(location=centroid, size=(box.width, box.height))
                for centroid, box in objects
            ),
            canvas_size=model.config.canvas_size,
        )
        real_pairs.append((image.numpy(), mask[0].numpy() > 0.5))
        pair = model.synthesize(layout, rng_seed=seed + index)
        gen_pairs.append(
            (pair.image.numpy(), (pair.component_mask[0] > 0.5).numpy())
        )

    if not real_pairs:
        raise click.ClickException("every entry was skipped (no gland objects)")
    _emit({
        "segmenter": "otsu",
        "split": split,
        "pairs": len(real_pairs),
        "skipped_no_glands": skipped,
        "real": segmentation_assessment(otsu_segmenter, real_pairs).to_dict(),
        "generated": segmentation_assessment(otsu_segmenter, gen_pairs).to_dict(),
    })


@main.command()
@click.option("--checkpoint", default=None, envvar="GLANDSYNTH_CHECKPOINT",
              type=click.Path(exists=True, dir_okay=False),
              help="Checkpoint to serve; also via GLANDSYNTH_CHECKPOINT.")
@click.option("--port", default=8000, show_default=True, envvar="GLANDSYNTH_PORT")
@click.option("--host", default="127.0.0.1", show_default=True)
@runtime_errors
def serve(checkpoint, port, host):
    """Run the HTTP inference service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(checkpoint=checkpoint), host=host, port=port)


if __name__ == "__main__":
    sys.exit(main())
