"""Dataset-level evaluation: load predictions, match, and summarize.

Per-image IoU matrices (the expensive part, especially mask rasterization)
are computed in a worker pool sized by ``jobs``; aggregation then runs as an
ordered reduction over sorted image stems, so the outputs are byte-identical
for any level of parallelism.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .labels import Detection, LabelParseError, LoadedDataset, parse_prediction_file
from .metrics import (
    ConfusionMatrix,
    CurveSeries,
    DatasetMatches,
    MapSummary,
    collect_matches,
    confidence_curves,
    confusion_matrix,
    full_iou_matrix,
    map_summary,
)


@dataclass(frozen=True)
class EvaluationResult:
    box: MapSummary
    mask: MapSummary
    matrix: ConfusionMatrix
    curves: list[CurveSeries]
    box_matches: DatasetMatches
    mask_matches: DatasetMatches
    warnings: tuple[str, ...]


def load_predictions(
    preds_dir: str | Path, dataset: LoadedDataset
) -> tuple[dict[str, list[Detection]], list[str]]:
    """Read ``<stem>.txt`` prediction files for every dataset image.

    A missing file is a warning (zero predictions for that image); parse
    errors raise.
    """
    preds_dir = Path(preds_dir)
    preds: dict[str, list[Detection]] = {}
    warnings: list[str] = []
    for record in dataset.images:
        path = preds_dir / f"{record.stem}.txt"
        if not path.exists():
            warnings.append(f"no prediction file for {record.stem}, assuming zero predictions")
            preds[record.stem] = []
            continue
        try:
            preds[record.stem] = parse_prediction_file(
                path.read_text(encoding="utf-8"), dataset.descriptor.num_classes
            )
        except LabelParseError as exc:
            raise LabelParseError([f"{path.name}: {e}" for e in exc.errors]) from exc
    return preds, warnings


def evaluate_dataset(
    dataset: LoadedDataset,
    preds_by_image: dict[str, list[Detection]],
    conf_thresh: float = 0.25,
    iou_thresh: float = 0.45,
    curve_kind: str = "box",
    jobs: int = 1,
    warnings: tuple[str, ...] = (),
) -> EvaluationResult:
    """Run the full evaluation protocol over a loaded dataset."""
    if curve_kind not in ("box", "mask"):
        raise ValueError(f"curve_kind must be 'box' or 'mask', got {curve_kind!r}")
    gts_by_image = {r.stem: list(r.annotations) for r in dataset.images}
    sizes = {r.stem: (r.width, r.height) for r in dataset.images}
    class_names = dataset.descriptor.class_names
    stems = sorted(set(gts_by_image) | set(preds_by_image))
    mask_preds = {
        stem: [p for p in preds_by_image.get(stem, []) if p.mask_polygon is not None]
        for stem in stems
    }

    def matrices_for(stem: str) -> tuple[np.ndarray, np.ndarray]:
        gts = gts_by_image.get(stem, [])
        box_m = full_iou_matrix(preds_by_image.get(stem, []), gts, "box")
        mask_m = full_iou_matrix(mask_preds[stem], gts, "mask", sizes.get(stem))
        return box_m, mask_m

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            computed = list(pool.map(matrices_for, stems))
    else:
        computed = [matrices_for(stem) for stem in stems]
    box_matrices = {stem: m[0] for stem, m in zip(stems, computed)}
    mask_matrices = {stem: m[1] for stem, m in zip(stems, computed)}

    box_matches = collect_matches(
        gts_by_image, preds_by_image, class_names, kind="box", matrices=box_matrices
    )
    mask_matches = collect_matches(
        gts_by_image, mask_preds, class_names, kind="mask",
        image_sizes=sizes, matrices=mask_matrices,
    )
    matrix = confusion_matrix(
        gts_by_image,
        preds_by_image,
        class_names,
        conf_thresh=conf_thresh,
        iou_thresh=iou_thresh,
        kind="box",
        matrices=box_matrices,
    )
    curves = confidence_curves(box_matches if curve_kind == "box" else mask_matches)
    return EvaluationResult(
        box=map_summary(box_matches),
        mask=map_summary(mask_matches),
        matrix=matrix,
        curves=curves,
        box_matches=box_matches,
        mask_matches=mask_matches,
        warnings=tuple(warnings),
    )
