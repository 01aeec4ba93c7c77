"""Request/response models for the query service."""
from __future__ import annotations

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str
    models: int = 0
    schedule_rows: int = 0


class ModelInfo(BaseModel):
    id: str
    display_name: str
    class_name: str
    silhouette: list[list[float]]  # closed polyline, (x, y) pairs
    deck_span: list[float]
    bow_index: int
    stern_index: int


class RankedEntry(BaseModel):
    """One line of the ranking document (documented here; the endpoint
    returns the canonical pre-serialized JSON so its bytes match the CLI)."""

    rank: int
    id: str
    display_name: str
    class_name: str
    cost: float
    mirrored: bool
    shift: float


class QueryResponseDoc(BaseModel):
    version: int
    query_sha256: str
    params: dict
    total_models: int
    entries: list[RankedEntry]


class DecisionRequest(BaseModel):
    query_sha256: str
    model_id: str
    note: str = ""
    idempotency_key: str = Field(default="", description="repeat submissions with the same key are logged once")


class DecisionResponse(BaseModel):
    logged: bool
    duplicate: bool = False
