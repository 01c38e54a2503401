"""Request/response models for the annotation service JSON API."""

from __future__ import annotations

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str = "ok"


class DatasetInfo(BaseModel):
    classes: list[str]
    image_count: int


class ImageInfo(BaseModel):
    stem: str
    width: int
    height: int
    instance_count: int
    revision: int


class AnnotationModel(BaseModel):
    # Vertex count, coordinate bounds, and class range are validated by the
    # save handler so the 400 body can carry per-annotation reasons.
    class_id: int
    vertices: list[tuple[float, float]]


class AnnotationsResponse(BaseModel):
    revision: int
    annotations: list[AnnotationModel]


class SaveRequest(BaseModel):
    base_revision: int = Field(ge=0)
    annotations: list[AnnotationModel]


class SaveResponse(BaseModel):
    revision: int


class ErrorBody(BaseModel):
    error: str
    details: list[str] | None = None
