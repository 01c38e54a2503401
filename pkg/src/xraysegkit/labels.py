"""YOLO-segmentation label files, prediction files, and dataset layout.

Label files hold one instance per line: a class index followed by a flat
list of normalized polygon vertices (``class v1x v1y v2x v2y ...``, at
least three vertices).  Prediction files insert a confidence after the
class index; box-only predictions carry exactly four coordinates and a
trailing ``#box`` token.  A dataset descriptor is a plain text file of
``class <index> <name>``, ``images_dir <path>``, and ``labels_dir <path>``
directives; ``#`` starts a comment.  A missing label file means an image
with zero instances.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .imageio import ImageFormatError, image_size

Vertex = tuple[float, float]


class LabelParseError(ValueError):
    """One or more malformed label/prediction lines; ``errors`` lists them all."""

    def __init__(self, errors: list[str]):
        self.errors = errors
        super().__init__("; ".join(errors))


class DatasetError(ValueError):
    """Malformed descriptor or aggregated per-file label errors."""

    def __init__(self, errors: list[str]):
        self.errors = errors
        super().__init__("\n".join(errors))


@dataclass(frozen=True)
class BoundingBox:
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        if not (0.0 <= self.x_min <= self.x_max <= 1.0 and 0.0 <= self.y_min <= self.y_max <= 1.0):
            raise ValueError(f"invalid normalized box {self}")

    @property
    def area(self) -> float:
        return (self.x_max - self.x_min) * (self.y_max - self.y_min)


@dataclass(frozen=True)
class PolygonAnnotation:
    """One labelled instance: class index plus a normalized polygon."""

    class_id: int
    vertices: tuple[Vertex, ...]

    def __post_init__(self):
        if self.class_id < 0:
            raise ValueError(f"class_id must be >= 0, got {self.class_id}")
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        if len(verts) < 3:
            raise ValueError(f"polygon needs at least 3 vertices, got {len(verts)}")
        for x, y in verts:
            if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
                raise ValueError(f"vertex ({x}, {y}) outside [0, 1]")
        object.__setattr__(self, "vertices", verts)


def polygon_bbox(poly: PolygonAnnotation | Sequence[Vertex]) -> BoundingBox:
    """Axis-aligned bounding box over the polygon's vertices."""
    verts = poly.vertices if isinstance(poly, PolygonAnnotation) else tuple(poly)
    xs = [v[0] for v in verts]
    ys = [v[1] for v in verts]
    return BoundingBox(min(xs), min(ys), max(xs), max(ys))


@dataclass(frozen=True)
class Detection:
    """One model prediction: class, confidence, box, optional mask polygon."""

    class_id: int
    confidence: float
    box: BoundingBox
    mask_polygon: tuple[Vertex, ...] | None = None

    def __post_init__(self):
        if self.class_id < 0:
            raise ValueError(f"class_id must be >= 0, got {self.class_id}")
        if not (0.0 <= self.confidence <= 1.0):
            raise ValueError(f"confidence must be in [0, 1], got {self.confidence}")
        if self.mask_polygon is not None:
            poly = tuple((float(x), float(y)) for x, y in self.mask_polygon)
            object.__setattr__(self, "mask_polygon", poly)
            pb = polygon_bbox(poly)
            eps = 1e-6
            if (
                pb.x_min < self.box.x_min - eps
                or pb.y_min < self.box.y_min - eps
                or pb.x_max > self.box.x_max + eps
                or pb.y_max > self.box.y_max + eps
            ):
                raise ValueError("detection box does not contain its mask polygon")


def _parse_float(token: str) -> float:
    value = float(token)  # raises ValueError on non-numeric tokens
    if value != value or value in (float("inf"), float("-inf")):
        raise ValueError(f"non-finite value {token!r}")
    return value


def _parse_class(token: str, num_classes: int | None) -> int:
    if not token.isdigit():
        raise ValueError(f"non-numeric class id {token!r}")
    class_id = int(token)
    if num_classes is not None and class_id >= num_classes:
        raise ValueError(f"class id {class_id} out of range (have {num_classes} classes)")
    return class_id


def _parse_coords(tokens: list[str]) -> tuple[Vertex, ...]:
    if len(tokens) % 2 != 0 or len(tokens) < 6:
        raise ValueError("odd/insufficient coordinates")
    values = [_parse_float(t) for t in tokens]
    for v in values:
        if not (0.0 <= v <= 1.0):
            raise ValueError(f"coordinate {v} outside [0, 1]")
    return tuple((values[i], values[i + 1]) for i in range(0, len(values), 2))


def parse_label_file(text: str, num_classes: int | None = None) -> list[PolygonAnnotation]:
    """Parse label text; raises :class:`LabelParseError` listing every bad line."""
    annotations: list[PolygonAnnotation] = []
    errors: list[str] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        tokens = line.split()
        if not tokens:
            continue
        try:
            class_id = _parse_class(tokens[0], num_classes)
            vertices = _parse_coords(tokens[1:])
            annotations.append(PolygonAnnotation(class_id=class_id, vertices=vertices))
        except ValueError as exc:
            errors.append(f"line {lineno}: {exc}")
    if errors:
        raise LabelParseError(errors)
    return annotations


def serialize_label_file(annotations: Iterable[PolygonAnnotation]) -> str:
    """Render annotations as label-file text, coordinates to 6 decimal places."""
    lines = []
    for a in annotations:
        coords = " ".join(f"{c:.6f}" for v in a.vertices for c in v)
        lines.append(f"{a.class_id} {coords}")
    return "\n".join(lines) + "\n" if lines else ""


def parse_prediction_file(text: str, num_classes: int | None = None) -> list[Detection]:
    """Parse prediction text (confidence after the class index).

    Polygon predictions get their box from the polygon; ``#box`` lines carry
    ``x_min y_min x_max y_max`` directly and no polygon.
    """
    detections: list[Detection] = []
    errors: list[str] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        tokens = line.split()
        if not tokens:
            continue
        try:
            if len(tokens) < 2:
                raise ValueError("missing confidence")
            class_id = _parse_class(tokens[0], num_classes)
            confidence = _parse_float(tokens[1])
            if not (0.0 <= confidence <= 1.0):
                raise ValueError(f"confidence {confidence} outside [0, 1]")
            rest = tokens[2:]
            if rest and rest[-1] == "#box":
                coords = [_parse_float(t) for t in rest[:-1]]
                if len(coords) != 4:
                    raise ValueError("#box lines need exactly 4 coordinates")
                box = BoundingBox(*coords)
                detections.append(Detection(class_id, confidence, box))
            else:
                vertices = _parse_coords(rest)
                box = polygon_bbox(vertices)
                detections.append(Detection(class_id, confidence, box, mask_polygon=vertices))
        except ValueError as exc:
            errors.append(f"line {lineno}: {exc}")
    if errors:
        raise LabelParseError(errors)
    return detections


def serialize_prediction_file(detections: Iterable[Detection]) -> str:
    lines = []
    for d in detections:
        if d.mask_polygon is not None:
            coords = " ".join(f"{c:.6f}" for v in d.mask_polygon for c in v)
            lines.append(f"{d.class_id} {d.confidence:.6f} {coords}")
        else:
            b = d.box
            lines.append(
                f"{d.class_id} {d.confidence:.6f} {b.x_min:.6f} {b.y_min:.6f} "
                f"{b.x_max:.6f} {b.y_max:.6f} #box"
            )
    return "\n".join(lines) + "\n" if lines else ""


def write_label_file(path: str | os.PathLike, annotations: Iterable[PolygonAnnotation]) -> None:
    """Atomically write a label file (temp file + rename in one directory)."""
    path = Path(path)
    data = serialize_label_file(annotations).encode("utf-8")
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


@dataclass(frozen=True)
class DatasetDescriptor:
    class_names: tuple[str, ...]
    images_dir: Path
    labels_dir: Path

    @property
    def num_classes(self) -> int:
        return len(self.class_names)


@dataclass(frozen=True)
class ImageRecord:
    stem: str
    path: Path
    width: int
    height: int
    annotations: tuple[PolygonAnnotation, ...] = ()

    @property
    def label_count(self) -> int:
        return len(self.annotations)


@dataclass(frozen=True)
class LoadedDataset:
    descriptor: DatasetDescriptor
    images: tuple[ImageRecord, ...]

    @property
    def empty_stems(self) -> tuple[str, ...]:
        return tuple(r.stem for r in self.images if not r.annotations)

    def label_path(self, stem: str) -> Path:
        return self.descriptor.labels_dir / f"{stem}.txt"


def parse_descriptor(path: str | os.PathLike) -> DatasetDescriptor:
    """Parse a dataset descriptor; relative paths resolve against its directory."""
    path = Path(path)
    base = path.parent
    classes: dict[int, str] = {}
    images_dir: Path | None = None
    labels_dir: Path | None = None
    errors: list[str] = []
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split(None, 2)
        directive = parts[0]
        if directive == "class":
            if len(parts) != 3 or not parts[1].isdigit():
                errors.append(f"{path.name} line {lineno}: expected 'class <index> <name>'")
                continue
            index, name = int(parts[1]), parts[2].strip()
            if index in classes:
                errors.append(f"{path.name} line {lineno}: duplicate class index {index}")
            elif not name or name in classes.values():
                errors.append(f"{path.name} line {lineno}: class names must be unique and non-empty")
            else:
                classes[index] = name
        elif directive == "images_dir" and len(parts) >= 2:
            images_dir = base / line.split(None, 1)[1].strip()
        elif directive == "labels_dir" and len(parts) >= 2:
            labels_dir = base / line.split(None, 1)[1].strip()
        else:
            errors.append(f"{path.name} line {lineno}: unknown directive {directive!r}")
    if images_dir is None or labels_dir is None:
        errors.append(f"{path.name}: images_dir and labels_dir are both required")
    if classes and sorted(classes) != list(range(len(classes))):
        errors.append(f"{path.name}: class indices must cover 0..{len(classes) - 1}")
    if not classes:
        errors.append(f"{path.name}: at least one class is required")
    if errors:
        raise DatasetError(errors)
    names = tuple(classes[i] for i in range(len(classes)))
    return DatasetDescriptor(class_names=names, images_dir=images_dir, labels_dir=labels_dir)


def load_dataset(descriptor_path: str | os.PathLike) -> LoadedDataset:
    """Load a dataset: validate image headers and every label file.

    All problems (missing directories, unreadable images, label parse errors)
    are aggregated into one :class:`DatasetError` so a batch run reports
    everything at once.
    """
    descriptor = parse_descriptor(descriptor_path)
    errors: list[str] = []
    if not descriptor.images_dir.is_dir():
        errors.append(f"images_dir {descriptor.images_dir} does not exist")
    if not descriptor.labels_dir.is_dir():
        errors.append(f"labels_dir {descriptor.labels_dir} does not exist")
    if errors:
        raise DatasetError(errors)

    records: list[ImageRecord] = []
    for img_path in sorted(descriptor.images_dir.iterdir()):
        if img_path.suffix.lower() not in (".png", ".pgm") or not img_path.is_file():
            continue
        try:
            width, height = image_size(img_path)
        except (ImageFormatError, OSError) as exc:
            errors.append(f"{img_path.name}: {exc}")
            continue
        annotations: tuple[PolygonAnnotation, ...] = ()
        label_path = descriptor.labels_dir / f"{img_path.stem}.txt"
        if label_path.exists():
            try:
                annotations = tuple(
                    parse_label_file(label_path.read_text(encoding="utf-8"), descriptor.num_classes)
                )
            except LabelParseError as exc:
                errors.extend(f"{label_path.name}: {e}" for e in exc.errors)
        records.append(
            ImageRecord(
                stem=img_path.stem, path=img_path, width=width, height=height, annotations=annotations
            )
        )
    if errors:
        raise DatasetError(errors)
    records.sort(key=lambda r: r.stem)
    return LoadedDataset(descriptor=descriptor, images=tuple(records))
