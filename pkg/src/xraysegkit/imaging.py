"""Image representations, the convolution engine, and intensity preprocessing.

Conventions used throughout the package:

- a grayscale image ("GrayImage") is a 2-D ``numpy.uint8`` array of shape
  ``(height, width)``;
- a real-valued image ("FloatImage", gradients and smoothed images) is a 2-D
  ``numpy.float64`` array of the same layout with finite values only;
- a binary mask is a 2-D ``numpy.bool_`` array;
- a kernel is a 2-D ``numpy.float64`` array.

Pixel coordinates are ``(x, y)`` with ``x`` the column and ``y`` the row, so
``img[y, x]`` addresses the pixel at ``(x, y)``.

Kernels are applied as correlation (no 180-degree flip); the edge-operator
matrices are stated in the orientation standard to edge-detection practice,
and flipping would only negate signs without changing magnitudes.  Rounding
is half-away-from-zero everywhere an intensity is produced.
"""

from __future__ import annotations

import math

import numpy as np

#: Supported border policies for convolution: "replicate" extends the edge
#: pixels outward, "zero" pads with zeros.
BORDER_POLICIES = ("replicate", "zero")


def require_gray(img: np.ndarray, name: str = "image") -> np.ndarray:
    """Validate a GrayImage: 2-D uint8, both dimensions >= 1."""
    arr = np.asarray(img)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must have positive dimensions, got {arr.shape}")
    if arr.dtype != np.uint8:
        raise ValueError(f"{name} must be uint8, got dtype {arr.dtype}")
    return arr


def require_float_image(img: np.ndarray, name: str = "image") -> np.ndarray:
    """Validate a FloatImage: 2-D, finite, returned as float64."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must have positive dimensions, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def require_mask(mask: np.ndarray, name: str = "mask") -> np.ndarray:
    """Validate a BinaryMask: 2-D bool."""
    arr = np.asarray(mask)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.dtype != np.bool_:
        raise ValueError(f"{name} must be boolean, got dtype {arr.dtype}")
    return arr


def require_border(border: str) -> str:
    if border not in BORDER_POLICIES:
        raise ValueError(f"border must be one of {BORDER_POLICIES}, got {border!r}")
    return border


def round_half_away(x: np.ndarray | float) -> np.ndarray:
    """Round half away from zero (the package-wide rounding rule).

    ``np.round`` rounds half to even, which would not match hand-derived
    values like ``round(0.299 * 255) = 76``.
    """
    arr = np.asarray(x, dtype=np.float64)
    return np.where(arr >= 0.0, np.floor(arr + 0.5), np.ceil(arr - 0.5))


def to_gray(values: np.ndarray) -> np.ndarray:
    """Round and clamp real values into a uint8 GrayImage."""
    return np.clip(round_half_away(values), 0, 255).astype(np.uint8)


def convolve2d(img: np.ndarray, kernel: np.ndarray, border: str = "replicate") -> np.ndarray:
    """Correlate ``kernel`` over ``img``, returning a float64 image of equal size.

    The anchor is the kernel centre for odd dimensions and the top-left tap
    for even dimensions (the 2x2 Roberts case).  ``border`` selects how
    out-of-bounds pixels are read: "replicate" repeats the edge value,
    "zero" reads 0.  The kernel is applied without flipping.
    """
    if np.asarray(img).dtype == np.uint8:
        arr = require_gray(img).astype(np.float64)
    else:
        arr = require_float_image(img)
    k = np.asarray(kernel, dtype=np.float64)
    if k.ndim != 2:
        raise ValueError(f"kernel must be 2-D, got shape {k.shape}")
    require_border(border)

    kh, kw = k.shape
    h, w = arr.shape
    if kh > h or kw > w:
        raise ValueError(f"kernel {k.shape} larger than image {arr.shape}")

    # Anchor: centre for odd sizes, top-left for even sizes.
    before_y = (kh - 1) // 2 if kh % 2 == 1 else 0
    before_x = (kw - 1) // 2 if kw % 2 == 1 else 0
    after_y = kh - 1 - before_y
    after_x = kw - 1 - before_x

    mode = "edge" if border == "replicate" else "constant"
    padded = np.pad(arr, ((before_y, after_y), (before_x, after_x)), mode=mode)

    # Accumulate one shifted slice per tap in row-major tap order; this keeps
    # memory flat and the summation order deterministic.
    out = np.zeros((h, w), dtype=np.float64)
    for i in range(kh):
        for j in range(kw):
            c = k[i, j]
            if c != 0.0:
                out += c * padded[i : i + h, j : j + w]
    return out


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Square normalized Gaussian kernel with side ``2*ceil(3*sigma) + 1``.

    The 3-sigma radius captures >= 99.7% of the Gaussian mass; coefficients
    are proportional to ``exp(-(x^2 + y^2) / (2*sigma^2))`` and sum to 1.
    """
    if not (sigma > 0):
        raise ValueError(f"sigma must be > 0, got {sigma}")
    radius = math.ceil(3.0 * sigma)
    coords = np.arange(-radius, radius + 1, dtype=np.float64)
    xx, yy = np.meshgrid(coords, coords)
    k = np.exp(-(xx * xx + yy * yy) / (2.0 * sigma * sigma))
    return k / k.sum()


def gaussian_blur(img: np.ndarray, sigma: float, border: str = "replicate") -> np.ndarray:
    """Convolve with :func:`gaussian_kernel`; returns a float64 image."""
    return convolve2d(img, gaussian_kernel(sigma), border=border)


def gamma_correct(img: np.ndarray, gamma: float) -> np.ndarray:
    """Apply gamma correction: ``out = round(255 * (in/255)**gamma)``.

    Brightens (gamma < 1) or darkens (gamma > 1) midtones while keeping 0
    and 255 fixed; monotone non-decreasing in the input intensity.
    """
    arr = require_gray(img)
    if not (gamma > 0):
        raise ValueError(f"gamma must be > 0, got {gamma}")
    lut = to_gray(255.0 * (np.arange(256, dtype=np.float64) / 255.0) ** gamma)
    return lut[arr]


def unsharp_sharpen(img: np.ndarray, sigma: float = 1.0, amount: float = 1.0) -> np.ndarray:
    """Unsharp masking: ``out = clamp(in + amount * (in - blur(in, sigma)))``.

    ``amount`` = 0 returns the image unchanged; larger values overshoot on
    the bright side of edges and undershoot on the dark side.
    """
    arr = require_gray(img)
    if not (sigma > 0):
        raise ValueError(f"sigma must be > 0, got {sigma}")
    if amount < 0:
        raise ValueError(f"amount must be >= 0, got {amount}")
    blurred = gaussian_blur(arr, sigma)
    sharpened = arr.astype(np.float64) + amount * (arr.astype(np.float64) - blurred)
    return to_gray(sharpened)
