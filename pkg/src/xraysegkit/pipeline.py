"""One entry point for running a named segmentation method with parameters.

The batch CLI and the annotation service's preview endpoint both call
:func:`run_segmentation`, so for equal inputs they produce identical masks
(and, downstream, identical encoded bytes).

Output type depends on the method: thresholding, region growing, Canny, and
snakes yield a boolean mask; the plain gradient operators yield an 8-bit
magnitude image scaled so the strongest response maps to 255 (gradients are
only clamped for display, never inside the pipeline).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping

import numpy as np

from .imaging import gamma_correct, gaussian_blur, to_gray, unsharp_sharpen
from .rasterize import rasterize_polygon
from .segmentation import canny, gradient_operator, morph, region_grow, threshold_fixed, threshold_otsu
from .snake import SnakeParams, circle_contour, snake_evolve

METHODS = ("fixed", "otsu", "region-grow", "sobel", "prewitt", "roberts", "canny", "snake")

# Demo defaults follow the reference hand X-ray parameters: fixed threshold
# 177; region growing from seed (640, 790) with tolerance 60.
DEFAULT_THRESHOLD = 177
DEFAULT_SEED = (640, 790)
DEFAULT_TAU = 60.0


@dataclass(frozen=True)
class SegmentOptions:
    method: str
    t: int = DEFAULT_THRESHOLD
    seed: tuple[int, int] = DEFAULT_SEED
    tau: float = DEFAULT_TAU
    mode: str = "seed-ref"
    connectivity: int = 8
    border: str = "replicate"
    sigma: float = 1.4
    t_low: float = 20.0
    t_high: float = 60.0
    snake_alpha: float = 0.05
    snake_beta: float = 0.1
    snake_gamma: float = 1.0
    snake_search_radius: int = 1
    snake_iters: int = 500
    snake_epsilon: float = 0.02
    init_circle: tuple[float, float, float] | None = None  # cx, cy, radius (pixels)
    init_points: int = 16
    pre_gamma: float | None = None
    sharpen_sigma: float | None = None
    sharpen_amount: float = 1.0
    morph_op: str | None = None
    morph_size: int = 3

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")


def preprocess(img: np.ndarray, options: SegmentOptions) -> np.ndarray:
    """Optional enhancement steps: gamma correction, then unsharp sharpening."""
    out = img
    if options.pre_gamma is not None:
        out = gamma_correct(out, options.pre_gamma)
    if options.sharpen_sigma is not None:
        out = unsharp_sharpen(out, options.sharpen_sigma, options.sharpen_amount)
    return out


def run_segmentation(img: np.ndarray, options: SegmentOptions) -> np.ndarray:
    """Run one segmentation method; returns a bool mask or an 8-bit edge image."""
    src = preprocess(img, options)
    h, w = src.shape
    method = options.method

    if method == "fixed":
        result: np.ndarray = threshold_fixed(src, options.t)
    elif method == "otsu":
        _, result = threshold_otsu(src)
    elif method == "region-grow":
        result = region_grow(src, options.seed, options.tau, options.mode, options.connectivity)
    elif method in ("sobel", "prewitt", "roberts"):
        magnitude = gradient_operator(src, method, options.border).magnitude
        peak = magnitude.max()
        scaled = magnitude * (255.0 / peak) if peak > 0 else magnitude
        result = to_gray(scaled)
    elif method == "canny":
        result = canny(src, options.sigma, options.t_low, options.t_high)
    else:  # snake
        if options.init_circle is not None:
            cx, cy, radius = options.init_circle
        else:
            cx, cy, radius = (w - 1) / 2.0, (h - 1) / 2.0, 0.35 * min(w, h)
        init = circle_contour(cx, cy, radius, options.init_points)
        field = gradient_operator(gaussian_blur(src, options.sigma), "sobel", options.border)
        params = SnakeParams(
            alpha=options.snake_alpha,
            beta=options.snake_beta,
            gamma_ext=options.snake_gamma,
            search_radius=options.snake_search_radius,
            max_iters=options.snake_iters,
            move_epsilon=options.snake_epsilon,
        )
        contour, _ = snake_evolve(field, init, params)
        # Contour coordinates address pixel centres; the rasterizer's
        # continuous space puts pixel i's centre at i + 0.5.
        normalized = [((x + 0.5) / w, (y + 0.5) / h) for x, y in contour.points]
        result = rasterize_polygon(normalized, w, h)

    if options.morph_op is not None and result.dtype == np.bool_:
        result = morph(result, options.morph_op, options.morph_size)
    return result


def options_from_query(method: str, params: Mapping[str, str]) -> SegmentOptions:
    """Build :class:`SegmentOptions` from string-valued query parameters.

    Raises ``ValueError`` for unknown parameters or unparseable values, so
    callers can map failures to a 400 response.
    """
    options = SegmentOptions(method=method)
    updates: dict[str, object] = {}
    for key, raw in params.items():
        if key == "t":
            updates["t"] = int(raw)
        elif key == "tau":
            updates["tau"] = float(raw)
        elif key == "seed":
            sx, sy = raw.split(",")
            updates["seed"] = (int(sx), int(sy))
        elif key == "mode":
            if raw not in ("seed-ref", "running-mean"):
                raise ValueError(f"mode must be seed-ref or running-mean, got {raw!r}")
            updates["mode"] = raw
        elif key == "connectivity":
            updates["connectivity"] = int(raw)
        elif key == "border":
            updates["border"] = raw
        elif key == "sigma":
            updates["sigma"] = float(raw)
        elif key == "t_low":
            updates["t_low"] = float(raw)
        elif key == "t_high":
            updates["t_high"] = float(raw)
        elif key in ("snake_alpha", "snake_beta", "snake_gamma", "snake_epsilon"):
            updates[key] = float(raw)
        elif key in ("snake_search_radius", "snake_iters", "init_points", "morph_size"):
            updates[key] = int(raw)
        elif key == "init_circle":
            cx, cy, radius = raw.split(",")
            updates["init_circle"] = (float(cx), float(cy), float(radius))
        elif key == "pre_gamma":
            updates["pre_gamma"] = float(raw)
        elif key == "sharpen_sigma":
            updates["sharpen_sigma"] = float(raw)
        elif key == "sharpen_amount":
            updates["sharpen_amount"] = float(raw)
        elif key == "morph_op":
            updates["morph_op"] = raw
        else:
            raise ValueError(f"unknown parameter {key!r}")
    return replace(options, **updates)
