"""X-ray segmentation toolkit: classical segmentation operators, YOLO
polygon labels, detection/segmentation evaluation, and an annotation
service for human labellers."""

from .imageio import ImageFormatError, load_image, save_image
from .imaging import convolve2d, gamma_correct, gaussian_kernel, unsharp_sharpen
from .labels import (
    BoundingBox,
    DatasetDescriptor,
    DatasetError,
    Detection,
    LabelParseError,
    PolygonAnnotation,
    load_dataset,
    parse_label_file,
    polygon_bbox,
    serialize_label_file,
)
from .metrics import (
    average_precision,
    confidence_curves,
    confusion_matrix,
    iou_box,
    iou_mask,
    map_summary,
    match_detections,
)
from .rasterize import mask_to_polygons, rasterize_polygon
from .segmentation import (
    GradientField,
    canny,
    gradient_operator,
    morph,
    region_grow,
    threshold_fixed,
    threshold_otsu,
)
from .snake import Contour, SnakeParams, circle_contour, snake_evolve

__version__ = "0.1.0"

__all__ = [
    "BoundingBox",
    "Contour",
    "DatasetDescriptor",
    "DatasetError",
    "Detection",
    "GradientField",
    "ImageFormatError",
    "LabelParseError",
    "PolygonAnnotation",
    "SnakeParams",
    "average_precision",
    "canny",
    "circle_contour",
    "confidence_curves",
    "confusion_matrix",
    "convolve2d",
    "gamma_correct",
    "gaussian_kernel",
    "gradient_operator",
    "iou_box",
    "iou_mask",
    "load_dataset",
    "load_image",
    "map_summary",
    "mask_to_polygons",
    "match_detections",
    "morph",
    "parse_label_file",
    "polygon_bbox",
    "rasterize_polygon",
    "region_grow",
    "save_image",
    "serialize_label_file",
    "snake_evolve",
    "threshold_fixed",
    "threshold_otsu",
    "unsharp_sharpen",
    "__version__",
]
