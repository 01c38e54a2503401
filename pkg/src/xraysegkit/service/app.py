"""HTTP/JSON annotation backend.

Serves dataset images, persists polygon annotations as YOLO label files
(atomic write-then-rename, optimistic concurrency via per-image revision
counters), and renders classical-segmentation previews for annotators to
trace against.  The on-disk label files are the single source of truth, so
the CLI and this service can never diverge.
"""

from __future__ import annotations

import threading
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import HTMLResponse, JSONResponse, Response
from fastapi.staticfiles import StaticFiles

from ..imageio import encode_png, load_image
from ..labels import (
    DatasetDescriptor,
    LabelParseError,
    PolygonAnnotation,
    load_dataset,
    parse_label_file,
    write_label_file,
)
from ..pipeline import METHODS, options_from_query, run_segmentation
from .schemas import (
    AnnotationModel,
    AnnotationsResponse,
    DatasetInfo,
    HealthResponse,
    ImageInfo,
    SaveRequest,
    SaveResponse,
)

_PLACEHOLDER_PAGE = """<!doctype html>
<html><head><title>xraysegkit annotator</title></head>
<body><h1>xraysegkit annotation service</h1>
<p>The annotator UI bundle is not installed. The JSON API is available under
<code>/api/</code> (see <code>/api/health</code>).</p></body></html>
"""


class ApiError(Exception):
    """Error carrying an HTTP status and the documented JSON body shape."""

    def __init__(self, status_code: int, error: str, details: list[str] | None = None):
        self.status_code = status_code
        self.error = error
        self.details = details
        super().__init__(error)


class AnnotationSession:
    """Dataset snapshot plus per-image revision counters and write locks."""

    def __init__(self, descriptor_path: str | Path):
        dataset = load_dataset(descriptor_path)
        self.descriptor: DatasetDescriptor = dataset.descriptor
        self.images = {r.stem: r for r in dataset.images}
        self.revisions: dict[str, int] = {stem: 0 for stem in self.images}
        self._locks: dict[str, threading.Lock] = {stem: threading.Lock() for stem in self.images}

    def require_stem(self, stem: str):
        if stem not in self.images:
            raise ApiError(404, f"unknown image {stem!r}")
        return self.images[stem]

    def label_path(self, stem: str) -> Path:
        return self.descriptor.labels_dir / f"{stem}.txt"

    def read_annotations(self, stem: str) -> list[PolygonAnnotation]:
        if not self.descriptor.labels_dir.is_dir():
            raise ApiError(500, f"labels directory {self.descriptor.labels_dir} is missing")
        path = self.label_path(stem)
        if not path.exists():
            return []
        try:
            return parse_label_file(
                path.read_text(encoding="utf-8"), self.descriptor.num_classes
            )
        except (OSError, LabelParseError) as exc:
            raise ApiError(500, f"cannot read label file for {stem!r}: {exc}") from exc

    def lock(self, stem: str) -> threading.Lock:
        return self._locks[stem]


def _validated_annotations(
    session: AnnotationSession, models: list[AnnotationModel]
) -> list[PolygonAnnotation]:
    annotations = []
    problems = []
    for index, model in enumerate(models):
        try:
            if len(model.vertices) < 3:
                raise ValueError("fewer than 3 vertices")
            if model.class_id >= session.descriptor.num_classes:
                raise ValueError(
                    f"class id {model.class_id} out of range "
                    f"(have {session.descriptor.num_classes} classes)"
                )
            annotations.append(
                PolygonAnnotation(class_id=model.class_id, vertices=tuple(model.vertices))
            )
        except ValueError as exc:
            problems.append(f"annotation {index}: {exc}")
    if problems:
        raise ApiError(400, "invalid annotations", details=problems)
    return annotations


def create_app(descriptor_path: str | Path, ui_dir: str | Path | None = None) -> FastAPI:
    session = AnnotationSession(descriptor_path)
    app = FastAPI(title="xraysegkit annotation service", version="0.1.0")

    @app.exception_handler(ApiError)
    async def handle_api_error(request: Request, exc: ApiError):
        body: dict = {"error": exc.error}
        if exc.details is not None:
            body["details"] = exc.details
        return JSONResponse(status_code=exc.status_code, content=body)

    @app.exception_handler(RequestValidationError)
    async def handle_validation_error(request: Request, exc: RequestValidationError):
        details = [
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in exc.errors()
        ]
        return JSONResponse(status_code=400, content={"error": "invalid request", "details": details})

    @app.exception_handler(Exception)
    async def handle_unexpected(request: Request, exc: Exception):
        return JSONResponse(status_code=500, content={"error": str(exc)})

    @app.get("/api/health", response_model=HealthResponse)
    def health():
        return HealthResponse()

    @app.get("/api/dataset", response_model=DatasetInfo)
    def dataset_info():
        return DatasetInfo(
            classes=list(session.descriptor.class_names), image_count=len(session.images)
        )

    @app.get("/api/images", response_model=list[ImageInfo])
    def list_images():
        out = []
        for stem in sorted(session.images):
            record = session.images[stem]
            out.append(
                ImageInfo(
                    stem=stem,
                    width=record.width,
                    height=record.height,
                    instance_count=len(session.read_annotations(stem)),
                    revision=session.revisions[stem],
                )
            )
        return out

    @app.get("/api/images/{stem}")
    def image_bytes(stem: str):
        record = session.require_stem(stem)
        try:
            png = encode_png(load_image(record.path))
        except (OSError, ValueError) as exc:
            raise ApiError(500, f"cannot read image {stem!r}: {exc}") from exc
        return Response(content=png, media_type="image/png")

    @app.get("/api/annotations/{stem}", response_model=AnnotationsResponse)
    def get_annotations(stem: str):
        session.require_stem(stem)
        annotations = session.read_annotations(stem)
        return AnnotationsResponse(
            revision=session.revisions[stem],
            annotations=[
                AnnotationModel(class_id=a.class_id, vertices=list(a.vertices))
                for a in annotations
            ],
        )

    @app.put("/api/annotations/{stem}", response_model=SaveResponse)
    def put_annotations(stem: str, body: SaveRequest):
        session.require_stem(stem)
        annotations = _validated_annotations(session, body.annotations)
        with session.lock(stem):
            current = session.revisions[stem]
            if body.base_revision != current:
                raise ApiError(
                    409,
                    f"stale revision: base_revision {body.base_revision} != current {current}",
                )
            try:
                write_label_file(session.label_path(stem), annotations)
            except OSError as exc:
                raise ApiError(500, f"cannot write label file for {stem!r}: {exc}") from exc
            session.revisions[stem] = current + 1
            return SaveResponse(revision=session.revisions[stem])

    @app.get("/api/preview/{stem}")
    def preview(stem: str, request: Request):
        record = session.require_stem(stem)
        params = dict(request.query_params)
        method = params.pop("method", None)
        if method is None or method not in METHODS:
            raise ApiError(400, f"method must be one of {', '.join(METHODS)}")
        try:
            options = options_from_query(method, params)
        except ValueError as exc:
            raise ApiError(400, f"invalid parameters: {exc}") from exc
        try:
            image = load_image(record.path)
            result = run_segmentation(image, options)
        except ValueError as exc:
            raise ApiError(400, str(exc)) from exc
        except OSError as exc:
            raise ApiError(500, f"cannot read image {stem!r}: {exc}") from exc
        return Response(content=encode_png(result), media_type="image/png")

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    else:

        @app.get("/", response_class=HTMLResponse)
        def placeholder():
            return _PLACEHOLDER_PAGE

    return app
