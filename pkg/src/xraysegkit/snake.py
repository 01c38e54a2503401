"""Greedy active-contour evolution over a gradient field.

The contour is a closed polygon whose total energy

    sum_i  alpha*|p_i - p_{i-1}|^2
         + beta*|p_{i-1} - 2*p_i + p_{i+1}|^2
         - gamma_ext * Mhat(p_i)

is minimized by greedy window search: each iteration visits every point in
order and moves it to the position in the (2r+1)^2 window that minimizes the
total energy as a function of that point alone (all elasticity and curvature
terms touching it are included, so the total energy never increases).  Mhat
is the squared gradient magnitude normalized to [0, 1], sampled at the
nearest pixel; ties prefer staying put, then the lowest row-major offset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .segmentation import GradientField


@dataclass(frozen=True)
class Contour:
    """Ordered (x, y) points; closed contours need at least 3 of them."""

    points: np.ndarray
    closed: bool = True

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError(f"points must have shape (n, 2), got {pts.shape}")
        if self.closed and len(pts) < 3:
            raise ValueError("a closed contour needs at least 3 points")
        object.__setattr__(self, "points", pts)


@dataclass(frozen=True)
class SnakeParams:
    alpha: float = 0.05
    beta: float = 0.1
    gamma_ext: float = 1.0
    search_radius: int = 1
    max_iters: int = 500
    move_epsilon: float = 0.02

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0 or self.gamma_ext < 0:
            raise ValueError("alpha, beta, and gamma_ext must be >= 0")
        if self.alpha == 0 and self.beta == 0 and self.gamma_ext == 0:
            raise ValueError("at least one of alpha, beta, gamma_ext must be positive")
        if self.search_radius < 1:
            raise ValueError("search_radius must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not (0.0 <= self.move_epsilon <= 1.0):
            raise ValueError("move_epsilon must be in [0, 1]")


def circle_contour(cx: float, cy: float, radius: float, n_points: int = 24) -> Contour:
    """Closed circular contour, points in counter-clockwise parameter order."""
    if n_points < 3:
        raise ValueError("need at least 3 points")
    angles = 2.0 * math.pi * np.arange(n_points) / n_points
    pts = np.stack([cx + radius * np.cos(angles), cy + radius * np.sin(angles)], axis=1)
    return Contour(points=pts, closed=True)


def _external_map(gradient: GradientField) -> list[list[float]]:
    mag2 = np.asarray(gradient.magnitude, dtype=np.float64) ** 2
    peak = mag2.max()
    if peak > 0:
        mag2 = mag2 / peak
    return mag2.tolist()


def _sample(ext: list[list[float]], x: float, y: float) -> float:
    # Nearest pixel, rounding half away from zero; callers keep coordinates
    # inside [0, w-1] x [0, h-1] so the indices are always valid.
    return ext[int(math.floor(y + 0.5))][int(math.floor(x + 0.5))]


def contour_energy(gradient: GradientField, contour: Contour, params: SnakeParams) -> float:
    """Total snake energy of ``contour`` over ``gradient``."""
    ext = _external_map(gradient)
    pts = contour.points
    n = len(pts)
    total = 0.0
    for i in range(n):
        px, py = pts[i]
        ax, ay = pts[i - 1]
        bx, by = pts[(i + 1) % n]
        total += params.alpha * ((px - ax) ** 2 + (py - ay) ** 2)
        total += params.beta * ((ax - 2 * px + bx) ** 2 + (ay - 2 * py + by) ** 2)
        total -= params.gamma_ext * _sample(ext, px, py)
    return total


def snake_evolve(
    gradient: GradientField, init: Contour, params: SnakeParams
) -> tuple[Contour, int]:
    """Evolve ``init`` greedily until fewer than ``move_epsilon`` of the
    points move in an iteration, or ``max_iters`` is reached.

    Returns the final contour and the number of iterations performed.
    """
    if not init.closed:
        raise ValueError("snake evolution needs a closed contour")
    h, w = np.asarray(gradient.magnitude).shape
    if h < 1 or w < 1:
        raise ValueError("empty gradient field")
    pts = init.points
    if np.any(pts[:, 0] < 0) or np.any(pts[:, 0] > w - 1) or np.any(pts[:, 1] < 0) or np.any(pts[:, 1] > h - 1):
        raise ValueError("contour points must lie within the image bounds")

    ext = _external_map(gradient)
    xs = pts[:, 0].tolist()
    ys = pts[:, 1].tolist()
    n = len(xs)
    alpha, beta, gamma = params.alpha, params.beta, params.gamma_ext
    r = params.search_radius

    def local_energy(i: int, px: float, py: float) -> float:
        # Every total-energy term that depends on point i.
        x0, y0 = xs[(i - 2) % n], ys[(i - 2) % n]
        x1, y1 = xs[(i - 1) % n], ys[(i - 1) % n]
        x3, y3 = xs[(i + 1) % n], ys[(i + 1) % n]
        x4, y4 = xs[(i + 2) % n], ys[(i + 2) % n]
        e = alpha * ((px - x1) ** 2 + (py - y1) ** 2 + (x3 - px) ** 2 + (y3 - py) ** 2)
        if beta:
            e += beta * (
                (x0 - 2 * x1 + px) ** 2 + (y0 - 2 * y1 + py) ** 2
                + (x1 - 2 * px + x3) ** 2 + (y1 - 2 * py + y3) ** 2
                + (px - 2 * x3 + x4) ** 2 + (py - 2 * y3 + y4) ** 2
            )
        if gamma:
            e -= gamma * _sample(ext, px, py)
        return e

    iterations = 0
    for _ in range(params.max_iters):
        moved = 0
        for i in range(n):
            cx, cy = xs[i], ys[i]
            best = local_energy(i, cx, cy)
            best_dx = best_dy = 0
            for dy in range(-r, r + 1):
                ny = cy + dy
                if ny < 0 or ny > h - 1:
                    continue
                for dx in range(-r, r + 1):
                    if dx == 0 and dy == 0:
                        continue
                    nx = cx + dx
                    if nx < 0 or nx > w - 1:
                        continue
                    e = local_energy(i, nx, ny)
                    if e < best:
                        best = e
                        best_dx, best_dy = dx, dy
            if best_dx or best_dy:
                xs[i] = cx + best_dx
                ys[i] = cy + best_dy
                moved += 1
        iterations += 1
        if moved / n < params.move_epsilon:
            break

    out = np.stack([np.asarray(xs), np.asarray(ys)], axis=1)
    return Contour(points=out, closed=True), iterations
