"""Gland layout data model and canvas geometry.

Coordinates follow image conventions: x runs along columns, y along rows,
origin at the top-left of the canvas. Bounding boxes are half-open pixel
rectangles [x0, x1) x [y0, y1).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

DEFAULT_MAX_GLANDS = 20
DEFAULT_MIN_BLOB_AREA = 16


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned pixel rectangle, half-open convention [x0,x1) x [y0,y1)."""

    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self):
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise ValueError(f"degenerate bounding box {self.as_tuple()}")

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    @property
    def centroid(self) -> tuple[float, float]:
        return ((self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x0, self.y0, self.x1, self.y1)

    def to_dict(self) -> dict:
        return {"x0": self.x0, "y0": self.y0, "x1": self.x1, "y1": self.y1}


@dataclass(frozen=True)
class GlandSpec:
    """One gland in a layout: center location, pixel span, optional noise seed."""

    location: tuple[float, float]
    size: tuple[float, float]
    seed: int | None = None


@dataclass(frozen=True)
class GlandLayout:
    """Ordered set of glands on a square canvas of `canvas_size` pixels."""

    glands: tuple[GlandSpec, ...]
    canvas_size: int = 256

    def __post_init__(self):
        object.__setattr__(self, "glands", tuple(self.glands))

    def __len__(self) -> int:
        return len(self.glands)


@dataclass
class ValidationReport:
    ok: bool
    violations: list[str] = field(default_factory=list)


def bbox_from_spec(spec: GlandSpec, canvas_size: int) -> BoundingBox:
    """Build the gland's bounding box from its center and span, clamped to the canvas.

    Raises ValueError if the clamped box has zero area (gland entirely
    off-canvas).
    """
    lx, ly = spec.location
    sx, sy = spec.size
    x0 = max(0.0, lx - sx / 2.0)
    y0 = max(0.0, ly - sy / 2.0)
    x1 = min(float(canvas_size), lx + sx / 2.0)
    y1 = min(float(canvas_size), ly + sy / 2.0)
    if x0 >= x1 or y0 >= y1:
        raise ValueError(
            f"gland at {spec.location} with size {spec.size} lies entirely "
            f"outside the {canvas_size}x{canvas_size} canvas"
        )
    return BoundingBox(x0, y0, x1, y1)


def layout_bboxes(layout: GlandLayout) -> list[BoundingBox]:
    return [bbox_from_spec(g, layout.canvas_size) for g in layout.glands]


def extract_gland_objects(
    mask: np.ndarray, min_area: int = DEFAULT_MIN_BLOB_AREA
) -> list[tuple[tuple[float, float], BoundingBox]]:
    """Find gland blobs in a binary mask.

    Returns one ((cx, cy), bbox) entry per 8-connected foreground component,
    ordered by (y0, x0). Components smaller than `min_area` pixels are
    dropped. The mask is binarized at 0.5 first; a leading channel axis is
    accepted.
    """
    arr = np.asarray(mask)
    if arr.ndim == 3:
        arr = arr[0]
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-d mask, got shape {arr.shape}")
    binary = arr > 0.5

    structure = np.ones((3, 3), dtype=bool)  # 8-connectivity
    labels, _ = ndimage.label(binary, structure=structure)
    out = []
    for idx, sl in enumerate(ndimage.find_objects(labels), start=1):
        if sl is None:
            continue
        ys, xs = sl
        component = labels[sl] == idx
        area = int(component.sum())
        if area < min_area:
            continue
        yy, xx = np.nonzero(component)
        cx = float(xx.mean() + xs.start)
        cy = float(yy.mean() + ys.start)
        bbox = BoundingBox(float(xs.start), float(ys.start), float(xs.stop), float(ys.stop))
        out.append(((cx, cy), bbox))
    out.sort(key=lambda e: (e[1].y0, e[1].x0))
    return out


def validate_layout(
    layout: GlandLayout, max_glands: int = DEFAULT_MAX_GLANDS
) -> ValidationReport:
    """Check layout invariants; violations are returned, never raised."""
    violations = []
    n = len(layout.glands)
    if not 1 <= n <= max_glands:
        violations.append(f"n out of range: {n} glands, expected 1..{max_glands}")
    if layout.canvas_size <= 0:
        violations.append(f"non-positive canvas size {layout.canvas_size}")
    for i, g in enumerate(layout.glands):
        sx, sy = g.size
        if sx <= 0 or sy <= 0:
            violations.append(f"gland {i}: non-positive size ({sx}, {sy})")
        lx, ly = g.location
        if not (0 <= lx < layout.canvas_size and 0 <= ly < layout.canvas_size):
            violations.append(f"gland {i}: off-canvas location ({lx}, {ly})")
    return ValidationReport(ok=not violations, violations=violations)


# --- layout JSON schema -----------------------------------------------------
#
# {"canvas_size": 256, "glands": [{"x": 128, "y": 128, "sx": 64, "sy": 32,
#  "seed": 7}, ...]}   (seed optional; unknown fields rejected)

_GLAND_KEYS = {"x", "y", "sx", "sy", "seed"}
_LAYOUT_KEYS = {"canvas_size", "glands"}


def layout_from_dict(data: dict) -> GlandLayout:
    if not isinstance(data, dict):
        raise ValueError("layout must be a JSON object")
    unknown = set(data) - _LAYOUT_KEYS
    if unknown:
        raise ValueError(f"unknown layout fields: {sorted(unknown)}")
    if "canvas_size" not in data or "glands" not in data:
        raise ValueError("layout requires 'canvas_size' and 'glands'")
    glands = []
    for i, g in enumerate(data["glands"]):
        if not isinstance(g, dict):
            raise ValueError(f"gland {i} must be a JSON object")
        unknown = set(g) - _GLAND_KEYS
        if unknown:
            raise ValueError(f"gland {i}: unknown fields {sorted(unknown)}")
        missing = {"x", "y", "sx", "sy"} - set(g)
        if missing:
            raise ValueError(f"gland {i}: missing fields {sorted(missing)}")
        seed = g.get("seed")
        if seed is not None and not isinstance(seed, int):
            raise ValueError(f"gland {i}: seed must be an integer")
        glands.append(
            GlandSpec(
                location=(float(g["x"]), float(g["y"])),
                size=(float(g["sx"]), float(g["sy"])),
                seed=seed,
            )
        )
    return GlandLayout(glands=tuple(glands), canvas_size=int(data["canvas_size"]))


def layout_to_dict(layout: GlandLayout) -> dict:
    glands = []
    for g in layout.glands:
        entry = {"x": g.location[0], "y": g.location[1], "sx": g.size[0], "sy": g.size[1]}
        if g.seed is not None:
            entry["seed"] = g.seed
        glands.append(entry)
    return {"canvas_size": layout.canvas_size, "glands": glands}


def layout_from_json(text: str) -> GlandLayout:
    return layout_from_dict(json.loads(text))


def layout_to_json(layout: GlandLayout) -> str:
    return json.dumps(layout_to_dict(layout))
