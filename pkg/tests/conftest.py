"""Shared test helpers: synthetic images, polygons, and planted datasets."""

from __future__ import annotations

import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from xraysegkit.labels import BoundingBox, Detection, PolygonAnnotation


def disk_image(size=128, cx=64, cy=64, radius=30, fg=200, bg=20) -> np.ndarray:
    yy, xx = np.mgrid[0:size, 0:size]
    return np.where((xx - cx) ** 2 + (yy - cy) ** 2 <= radius * radius, fg, bg).astype(np.uint8)


def random_image(rng, h=32, w=32) -> np.ndarray:
    return rng.integers(0, 256, size=(h, w), dtype=np.uint8).astype(np.uint8)


def random_convex_polygon(rng, n_min=4, n_max=10, scale=0.28):
    """Convex normalized polygon: angle-sorted points on a random ellipse."""
    n = int(rng.integers(n_min, n_max + 1))
    cx = rng.uniform(0.3, 0.7)
    cy = rng.uniform(0.3, 0.7)
    angles = np.sort(rng.uniform(0, 2 * math.pi, size=n))
    r = rng.uniform(0.5, 1.0) * scale
    return tuple((cx + r * math.cos(a), cy + r * 0.8 * math.sin(a)) for a in angles)


def random_polygon(rng, n_min=3, n_max=12):
    """Arbitrary (possibly self-intersecting) normalized polygon."""
    n = int(rng.integers(n_min, n_max + 1))
    return tuple((float(rng.uniform(0, 1)), float(rng.uniform(0, 1))) for _ in range(n))


def random_annotation(rng, num_classes=6):
    return PolygonAnnotation(
        class_id=int(rng.integers(0, num_classes)), vertices=random_polygon(rng)
    )


def random_box(rng, min_side=0.02, max_side=0.4):
    w = rng.uniform(min_side, max_side)
    h = rng.uniform(min_side, max_side)
    x = rng.uniform(0, 1 - w)
    y = rng.uniform(0, 1 - h)
    return (float(x), float(y), float(x + w), float(y + h))


def box_polygon(box):
    x1, y1, x2, y2 = box
    return ((x1, y1), (x2, y1), (x2, y2), (x1, y2))


def plant_dataset(rng, num_classes=4, n_images=3, max_instances=6, max_preds=8):
    """Random boxes/polygons with a mix of close, loose, and spurious detections.

    Returns (gts_by_image, preds_by_image) as package objects plus the same
    data in the plain-record format the brute-force oracle consumes.
    """
    gts_by_image: dict[str, list[PolygonAnnotation]] = {}
    preds_by_image: dict[str, list[Detection]] = {}
    raw_gts: dict[str, list] = {}
    raw_preds: dict[str, list] = {}
    for i in range(n_images):
        stem = f"img{i:03d}"
        gts, preds, rg, rp = [], [], [], []
        for _ in range(int(rng.integers(0, max_instances + 1))):
            c = int(rng.integers(0, num_classes))
            box = random_box(rng)
            gts.append(PolygonAnnotation(class_id=c, vertices=box_polygon(box)))
            rg.append((c, box))
            # 0-2 predictions hovering around this ground truth
            for _ in range(int(rng.integers(0, 3))):
                jitter = rng.normal(0, 0.02, size=4)
                jb = (
                    min(max(box[0] + jitter[0], 0.0), 1.0),
                    min(max(box[1] + jitter[1], 0.0), 1.0),
                    min(max(box[2] + jitter[2], 0.0), 1.0),
                    min(max(box[3] + jitter[3], 0.0), 1.0),
                )
                if jb[2] <= jb[0] or jb[3] <= jb[1]:
                    continue
                pc = c if rng.random() > 0.15 else int(rng.integers(0, num_classes))
                conf = float(rng.uniform(0.05, 1.0))
                preds.append(
                    Detection(pc, conf, BoundingBox(*jb), mask_polygon=box_polygon(jb))
                )
                rp.append((pc, conf, jb))
        for _ in range(int(rng.integers(0, max(1, max_preds - len(preds) + 1)))):
            c = int(rng.integers(0, num_classes))
            box = random_box(rng)
            conf = float(rng.uniform(0.05, 1.0))
            preds.append(Detection(c, conf, BoundingBox(*box), mask_polygon=box_polygon(box)))
            rp.append((c, conf, box))
        gts_by_image[stem] = gts
        preds_by_image[stem] = preds
        raw_gts[stem] = rg
        raw_preds[stem] = rp
    return gts_by_image, preds_by_image, raw_gts, raw_preds


@pytest.fixture
def rng():
    return np.random.default_rng(20240809)
