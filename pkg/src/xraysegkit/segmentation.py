"""Classical segmentation: thresholding, region growing, edge operators,
Canny, and morphological post-processing.

All operations are pure functions of their inputs and safe to call from any
number of threads.  Masks are boolean arrays (True = foreground); gradient
responses stay in real-valued images so downstream stages (non-maximum
suppression, hysteresis) see signed, unclamped values.
"""

from __future__ import annotations

from bisect import bisect_right
from collections import deque
from dataclasses import dataclass

import numpy as np

from .imaging import convolve2d, gaussian_blur, require_gray

# Horizontal/vertical derivative kernel pairs for the three gradient operators.
OPERATOR_KERNELS: dict[str, tuple[np.ndarray, np.ndarray]] = {
    "sobel": (
        np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]]),
        np.array([[-1.0, -2.0, -1.0], [0.0, 0.0, 0.0], [1.0, 2.0, 1.0]]),
    ),
    "prewitt": (
        np.array([[-1.0, 0.0, 1.0], [-1.0, 0.0, 1.0], [-1.0, 0.0, 1.0]]),
        np.array([[-1.0, -1.0, -1.0], [0.0, 0.0, 0.0], [1.0, 1.0, 1.0]]),
    ),
    "roberts": (
        np.array([[1.0, 0.0], [0.0, -1.0]]),
        np.array([[0.0, 1.0], [-1.0, 0.0]]),
    ),
}

# Neighbour offsets in reading order, as (dy, dx).
_NEIGHBOURS = {
    4: ((-1, 0), (0, -1), (0, 1), (1, 0)),
    8: ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)),
}


@dataclass(frozen=True)
class GradientField:
    """Per-pixel horizontal/vertical gradient responses and their magnitude."""

    gx: np.ndarray
    gy: np.ndarray
    magnitude: np.ndarray

    def __post_init__(self):
        if not (self.gx.shape == self.gy.shape == self.magnitude.shape):
            raise ValueError("gradient components must share dimensions")


def threshold_fixed(img: np.ndarray, t: int) -> np.ndarray:
    """Binarize: foreground where intensity is strictly greater than ``t``."""
    arr = require_gray(img)
    if not (0 <= int(t) <= 255):
        raise ValueError(f"threshold must be in 0..255, got {t}")
    return arr > np.uint8(t)


def threshold_otsu(img: np.ndarray) -> tuple[int, np.ndarray]:
    """Pick the threshold maximizing between-class variance, then binarize.

    All 256 candidate thresholds are scored with
    ``omega0 * omega1 * (mu0 - mu1)**2`` where class 0 holds intensities
    ``<= t``; ties are broken toward the lowest threshold.  Requires at
    least two distinct intensities.
    """
    arr = require_gray(img)
    hist = np.bincount(arr.ravel(), minlength=256).astype(np.float64)
    if np.count_nonzero(hist) < 2:
        raise ValueError("degenerate histogram: image has a single intensity")
    n = hist.sum()
    levels = np.arange(256, dtype=np.float64)
    w0 = np.cumsum(hist) / n
    s0 = np.cumsum(hist * levels) / n
    mean_total = s0[-1]
    w1 = 1.0 - w0
    variance = np.zeros(256)
    valid = (w0 > 0) & (w1 > 0)
    mu0 = np.divide(s0, w0, out=np.zeros(256), where=valid)
    mu1 = np.divide(mean_total - s0, w1, out=np.zeros(256), where=valid)
    variance[valid] = (w0 * w1 * (mu0 - mu1) ** 2)[valid]
    t = int(np.argmax(variance))
    return t, arr > np.uint8(t)


def _runs_of(row: np.ndarray) -> list[tuple[int, int]]:
    """Half-open (start, end) column spans of the True runs in a boolean row."""
    arr = np.ascontiguousarray(row, dtype=bool)
    edges = np.flatnonzero(np.diff(np.concatenate(([0], arr.view(np.int8), [0]))))
    return [(int(edges[i]), int(edges[i + 1])) for i in range(0, len(edges), 2)]


def flood_mask(allowed: np.ndarray, seeds: np.ndarray, connectivity: int = 8) -> np.ndarray:
    """Pixels of ``allowed`` connected (4- or 8-wise) to any seed pixel.

    Works on horizontal runs rather than individual pixels, so large regions
    flood in time proportional to the number of runs.
    """
    if connectivity not in (4, 8):
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")
    if allowed.shape != seeds.shape:
        raise ValueError("allowed and seeds must share dimensions")
    h, w = allowed.shape
    grow = 1 if connectivity == 8 else 0

    row_runs: list[list[tuple[int, int]]] = [_runs_of(allowed[y]) for y in range(h)]
    row_starts = [[r[0] for r in runs] for runs in row_runs]
    visited: list[list[bool]] = [[False] * len(runs) for runs in row_runs]

    queue: deque[tuple[int, int]] = deque()
    seed_rows = np.flatnonzero(seeds.any(axis=1))
    for y in seed_rows:
        seed_cols = np.flatnonzero(seeds[y])
        for i, (x0, x1) in enumerate(row_runs[y]):
            if not visited[y][i] and np.any((seed_cols >= x0) & (seed_cols < x1)):
                visited[y][i] = True
                queue.append((int(y), i))

    while queue:
        y, i = queue.popleft()
        x0, x1 = row_runs[y][i]
        lo, hi = x0 - grow, x1 + grow
        for ny in (y - 1, y + 1):
            if not (0 <= ny < h):
                continue
            starts = row_starts[ny]
            j = bisect_right(starts, hi - 1) - 1
            while j >= 0:
                nx0, nx1 = row_runs[ny][j]
                if nx1 <= lo:
                    break
                if not visited[ny][j]:
                    visited[ny][j] = True
                    queue.append((ny, j))
                j -= 1

    out = np.zeros_like(allowed)
    for y in range(h):
        for i, (x0, x1) in enumerate(row_runs[y]):
            if visited[y][i]:
                out[y, x0:x1] = True
    return out


def region_grow(
    img: np.ndarray,
    seed: tuple[int, int],
    tau: float,
    mode: str = "seed-ref",
    connectivity: int = 8,
) -> np.ndarray:
    """Grow a region from ``seed`` (given as ``(x, y)``) by intensity similarity.

    In "seed-ref" mode the result is the connected component, under the given
    connectivity, of pixels within ``tau`` of the seed intensity that contains
    the seed.  In "running-mean" mode the region expands breadth-first in FIFO
    order: a frontier pixel is admitted iff its intensity is within ``tau`` of
    the exact running mean of the region at the moment of the test, and the
    mean updates on each admission.  Every pixel is tested at most once, with
    neighbours enqueued in reading order, which makes the result deterministic.
    """
    arr = require_gray(img)
    h, w = arr.shape
    x, y = int(seed[0]), int(seed[1])
    if not (0 <= x < w and 0 <= y < h):
        raise ValueError(f"seed ({x}, {y}) out of bounds for {w}x{h} image")
    if tau < 0:
        raise ValueError(f"tau must be >= 0, got {tau}")
    if connectivity not in (4, 8):
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")
    if mode not in ("seed-ref", "running-mean"):
        raise ValueError(f"mode must be 'seed-ref' or 'running-mean', got {mode!r}")

    if mode == "seed-ref":
        allowed = np.abs(arr.astype(np.int16) - int(arr[y, x])) <= tau
        seeds = np.zeros((h, w), dtype=bool)
        seeds[y, x] = True
        return flood_mask(allowed, seeds, connectivity)

    values = arr.ravel().tolist()
    offsets = _NEIGHBOURS[connectivity]
    mask = np.zeros(h * w, dtype=bool)
    seen = bytearray(h * w)
    start = y * w + x
    seen[start] = 1
    mask[start] = True
    total = values[start]
    count = 1
    queue: deque[int] = deque()
    for dy, dx in offsets:
        ny, nx = y + dy, x + dx
        if 0 <= ny < h and 0 <= nx < w:
            idx = ny * w + nx
            seen[idx] = 1
            queue.append(idx)
    while queue:
        idx = queue.popleft()
        # |I(p) - total/count| <= tau, kept in exact integer-scaled form
        if abs(values[idx] * count - total) <= tau * count:
            mask[idx] = True
            total += values[idx]
            count += 1
            py, px = divmod(idx, w)
            for dy, dx in offsets:
                ny, nx = py + dy, px + dx
                if 0 <= ny < h and 0 <= nx < w:
                    nidx = ny * w + nx
                    if not seen[nidx]:
                        seen[nidx] = 1
                        queue.append(nidx)
    return mask.reshape(h, w)


def gradient_operator(img: np.ndarray, kind: str = "sobel", border: str = "replicate") -> GradientField:
    """Apply the Sobel, Prewitt, or Roberts kernel pair and return the field."""
    if kind not in OPERATOR_KERNELS:
        raise ValueError(f"kind must be one of {sorted(OPERATOR_KERNELS)}, got {kind!r}")
    kx, ky = OPERATOR_KERNELS[kind]
    gx = convolve2d(img, kx, border=border)
    gy = convolve2d(img, ky, border=border)
    return GradientField(gx=gx, gy=gy, magnitude=np.hypot(gx, gy))


def _nms(magnitude: np.ndarray, gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Thin edges: keep pixels that dominate both neighbours along the
    gradient direction quantized to {0, 45, 90, 135} degrees.

    The forward neighbour is compared with >=, the backward one with >, so
    exactly one pixel survives on a plateau.  Out-of-bounds neighbours read
    as magnitude 0.
    """
    h, w = magnitude.shape
    theta = np.mod(np.arctan2(gy, gx), np.pi)
    bins = np.mod(np.rint(theta / (np.pi / 4.0)).astype(np.int64), 4)

    padded = np.zeros((h + 2, w + 2))
    padded[1:-1, 1:-1] = magnitude

    def shifted(dx: int, dy: int) -> np.ndarray:
        return padded[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w]

    # Forward offsets per bin, (dx, dy); backward is the negation.
    forward = {0: (1, 0), 1: (1, 1), 2: (0, 1), 3: (-1, 1)}
    keep = np.zeros((h, w), dtype=bool)
    for b, (dx, dy) in forward.items():
        sel = bins == b
        fwd = shifted(dx, dy)
        bwd = shifted(-dx, -dy)
        keep |= sel & (magnitude >= fwd) & (magnitude > bwd)
    return keep


def canny(img: np.ndarray, sigma: float = 1.4, t_low: float = 20.0, t_high: float = 60.0) -> np.ndarray:
    """Canny edges: Gaussian smoothing, Sobel gradients, non-maximum
    suppression, and hysteresis edge tracking.

    Pixels whose suppressed magnitude reaches ``t_high`` seed the edge set;
    pixels in ``[t_low, t_high)`` survive only when 8-connected to a seed
    through other surviving pixels.
    """
    arr = require_gray(img)
    if not (sigma > 0):
        raise ValueError(f"sigma must be > 0, got {sigma}")
    if t_low < 0 or t_high < t_low:
        raise ValueError(f"need 0 <= t_low <= t_high, got {t_low}, {t_high}")
    smoothed = gaussian_blur(arr, sigma)
    field = gradient_operator(smoothed, "sobel")
    keep = _nms(field.magnitude, field.gx, field.gy)
    strong = keep & (field.magnitude >= t_high)
    candidates = keep & (field.magnitude >= t_low)
    return flood_mask(candidates, strong, connectivity=8)


def morph(mask: np.ndarray, op: str, size: int = 3) -> np.ndarray:
    """Morphology with a full square structuring element.

    Out-of-bounds pixels count as background for both erosion and dilation,
    so border pixels erode away.  ``open`` is dilate∘erode and ``close`` is
    erode∘dilate.
    """
    arr = np.asarray(mask)
    if arr.dtype != np.bool_ or arr.ndim != 2:
        raise ValueError("mask must be a 2-D boolean array")
    if size % 2 == 0 or size < 3:
        raise ValueError(f"structuring size must be odd and >= 3, got {size}")
    if op == "open":
        return morph(morph(arr, "erode", size), "dilate", size)
    if op == "close":
        return morph(morph(arr, "dilate", size), "erode", size)
    if op not in ("erode", "dilate"):
        raise ValueError(f"op must be erode, dilate, open, or close, got {op!r}")

    h, w = arr.shape
    r = size // 2
    padded = np.zeros((h + 2 * r, w + 2 * r), dtype=bool)
    padded[r : r + h, r : r + w] = arr
    out = np.full((h, w), op == "erode", dtype=bool)
    for dy in range(size):
        for dx in range(size):
            window = padded[dy : dy + h, dx : dx + w]
            if op == "erode":
                out &= window
            else:
                out |= window
    return out
