"""FastAPI inference service over a single loaded checkpoint.

Model weights are read-only after load; every request derives its own RNG
from the request seed, so concurrent generations never share state.
"""

from __future__ import annotations

import base64
import io
import secrets
import time
from contextlib import asynccontextmanager
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from PIL import Image

from ..data import image_to_uint8
from ..geometry import validate_layout
from ..model import SynthesisModel, _state_digest, load_checkpoint
from .schemas import BoundingBoxOut, GenerateRequest, GenerateResponse, HealthResponse


class ServiceState:
    """Lifecycle of the single model a service process serves."""

    def __init__(self):
        self.model: SynthesisModel | None = None
        self.status: str = "no_model"

    def attach(self, model: SynthesisModel) -> None:
        if model.checkpoint_id is None:
            model.checkpoint_id = _state_digest(model.state_dict())
        model.eval()
        self.model = model
        self.status = "ready"

    def load(self, path: str | Path) -> None:
        self.status = "loading"
        try:
            model, _, _ = load_checkpoint(path)
        except Exception:
            self.status = "no_model"
            raise
        self.attach(model)

    @property
    def checkpoint_id(self) -> str | None:
        return self.model.checkpoint_id if self.model is not None else None


def _png_base64(array: np.ndarray, mode: str) -> str:
    buf = io.BytesIO()
    Image.fromarray(array, mode=mode).save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


def create_app(
    checkpoint: str | Path | None = None, model: SynthesisModel | None = None
) -> FastAPI:
    """Build the service; `checkpoint` is loaded on startup, `model` eagerly."""
    state = ServiceState()
    if model is not None:
        state.attach(model)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        if checkpoint is not None:
            state.load(checkpoint)
        yield

    app = FastAPI(title="glandsynth", lifespan=lifespan)
    app.state.service = state

    @app.exception_handler(RequestValidationError)
    async def on_invalid_request(request: Request, exc: RequestValidationError):
        violations = [
            ".".join(str(part) for part in err["loc"]) + ": " + err["msg"]
            for err in exc.errors()
        ]
        return JSONResponse(
            status_code=400,
            content={"detail": {"error": "invalid request", "violations": violations}},
        )

    @app.get("/api/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(
            status=state.status,
            checkpoint_id=state.checkpoint_id if state.status == "ready" else None,
        )

    @app.post("/api/generate", response_model=GenerateResponse)
    def generate(request: GenerateRequest) -> GenerateResponse:
        if state.status != "ready" or state.model is None:
            raise HTTPException(status_code=503, detail="model not loaded")
        model = state.model
        if request.checkpoint_id is not None and request.checkpoint_id != model.checkpoint_id:
            raise HTTPException(
                status_code=404, detail=f"unknown checkpoint {request.checkpoint_id}"
            )

        layout = request.layout.to_layout()
        report = validate_layout(layout, max_glands=model.config.max_glands)
        violations = list(report.violations)
        if layout.canvas_size != model.config.canvas_size:
            violations.append(
                f"canvas_size {layout.canvas_size} not supported; "
                f"model expects {model.config.canvas_size}"
            )
        if violations:
            raise HTTPException(
                status_code=400,
                detail={"error": "invalid layout", "violations": violations},
            )

        seed_used = request.seed if request.seed is not None else secrets.randbits(63)
        started = time.perf_counter()
        pair = model.synthesize(layout, rng_seed=seed_used)
        latency_ms = (time.perf_counter() - started) * 1000.0

        image_u8 = image_to_uint8(pair.image)
        mask_u8 = (
            (pair.component_mask[0] > 0.5).numpy().astype(np.uint8) * np.uint8(255)
        )
        return GenerateResponse(
            image=_png_base64(image_u8, "RGB"),
            mask=_png_base64(mask_u8, "L"),
            bboxes=[BoundingBoxOut(**b.to_dict()) for b in pair.bboxes],
            seed_used=seed_used,
            checkpoint_id=model.checkpoint_id,
            latency_ms=round(latency_ms, 3),
        )

    return app
