from .app import ServiceState, create_app
from .schemas import (
    BoundingBoxOut,
    GenerateRequest,
    GenerateResponse,
    GlandIn,
    HealthResponse,
    LayoutIn,
)

__all__ = [
    "BoundingBoxOut",
    "GenerateRequest",
    "GenerateResponse",
    "GlandIn",
    "HealthResponse",
    "LayoutIn",
    "ServiceState",
    "create_app",
]
