"""Request/response models for the inference service."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, field_validator

from ..geometry import GlandLayout, GlandSpec

SEED_MIN = -(2**63)
SEED_MAX = 2**63 - 1


class GlandIn(BaseModel):
    model_config = ConfigDict(extra="forbid")

    x: float
    y: float
    sx: float
    sy: float
    seed: int | None = None

    @field_validator("seed")
    @classmethod
    def _seed_fits_64_bits(cls, v):
        if v is not None and not (SEED_MIN <= v <= SEED_MAX):
            raise ValueError("seed must fit in 64 bits")
        return v


class LayoutIn(BaseModel):
    model_config = ConfigDict(extra="forbid")

    canvas_size: int = 256
    glands: list[GlandIn]

    def to_layout(self) -> GlandLayout:
        return GlandLayout(
            glands=tuple(
                GlandSpec(location=(g.x, g.y), size=(g.sx, g.sy), seed=g.seed)
                for g in self.glands
            ),
            canvas_size=self.canvas_size,
        )


class GenerateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    layout: LayoutIn
    seed: int | None = None
    checkpoint_id: str | None = None

    @field_validator("seed")
    @classmethod
    def _seed_fits_64_bits(cls, v):
        if v is not None and not (SEED_MIN <= v <= SEED_MAX):
            raise ValueError("seed must fit in 64 bits")
        return v


class BoundingBoxOut(BaseModel):
    x0: float
    y0: float
    x1: float
    y1: float


class GenerateResponse(BaseModel):
    image: str  # base64 PNG, canvas_size x canvas_size RGB
    mask: str  # base64 PNG, canvas_size x canvas_size grayscale
    bboxes: list[BoundingBoxOut]
    seed_used: int
    checkpoint_id: str
    latency_ms: float


class HealthResponse(BaseModel):
    status: Literal["ready", "loading", "no_model"]
    checkpoint_id: str | None = None
