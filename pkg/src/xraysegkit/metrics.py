"""Detection/segmentation evaluation: IoU, greedy matching, average
precision, mAP summaries, the confusion matrix, and confidence curves.

Normative conventions (kept identical across implementations and oracles):

- matching is greedy: predictions in descending confidence (stable, so ties
  keep input order) each take the still-unmatched ground truth with the
  highest IoU at or above the threshold, ties toward the lowest index;
- AP is 101-point interpolated: the monotone precision envelope sampled at
  recalls 0.00, 0.01, ..., 1.00; a class with zero ground truths scores 0
  and is excluded from "all" means;
- mAP50 uses IoU 0.50; mAP50-95 averages IoU 0.50:0.05:0.95 (10 thresholds);
- confidence sweeps use 1000 evenly spaced thresholds in [0, 1]; inside a
  sweep, precision with no surviving predictions is 1.0 (keeps the curve
  right-continuous), while summary precision/recall report 0 when undefined;
- reported P and R are read at the confidence threshold that maximizes the
  "all" F1 curve (lowest such threshold on ties);
- the "all" series/row is the unweighted mean over classes with >= 1 ground
  truth instance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .labels import BoundingBox, Detection, PolygonAnnotation, polygon_bbox
from .rasterize import rasterize_polygon

#: IoU thresholds for mAP50-95 (0.50:0.05:0.95).
IOU_THRESHOLDS: tuple[float, ...] = tuple(round(0.50 + 0.05 * i, 2) for i in range(10))

#: Confidence sweep grid shared by curves and summary P/R.
CONFIDENCE_GRID: np.ndarray = np.linspace(0.0, 1.0, 1000)

CURVE_KINDS = ("f1-conf", "precision-conf", "recall-conf", "precision-recall")


def iou_box(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union of two boxes; two degenerate boxes give 0."""
    ix = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    iy = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    inter = max(ix, 0.0) * max(iy, 0.0)
    union = a.area + b.area - inter
    return inter / union if union > 0.0 else 0.0


def iou_mask(a: np.ndarray, b: np.ndarray) -> float:
    """Intersection over union of two boolean masks; 0/0 counts as 0."""
    if a.shape != b.shape:
        raise ValueError(f"mask dimensions differ: {a.shape} vs {b.shape}")
    inter = int(np.count_nonzero(a & b))
    union = int(np.count_nonzero(a | b))
    return inter / union if union else 0.0


@dataclass(frozen=True)
class PredictionMatch:
    class_id: int
    confidence: float
    matched: bool
    iou: float


@dataclass(frozen=True)
class GroundTruthMatch:
    class_id: int
    matched: bool


@dataclass(frozen=True)
class MatchResult:
    predictions: tuple[PredictionMatch, ...]
    ground_truths: tuple[GroundTruthMatch, ...]
    iou_thresh: float
    kind: str


def _confidence_order(confidences: Sequence[float]) -> list[int]:
    # Stable sort keeps input order on confidence ties.
    return sorted(range(len(confidences)), key=lambda i: -confidences[i])


def greedy_match(iou_matrix: np.ndarray, order: Sequence[int], iou_thresh: float) -> list[int]:
    """Assign each prediction (visited in ``order``) its best free ground truth.

    Returns, per prediction (input indexing), the matched ground-truth index
    or -1.  Ties on IoU go to the lowest ground-truth index.
    """
    n_pred, n_gt = iou_matrix.shape
    assigned = [-1] * n_pred
    taken = [False] * n_gt
    for i in order:
        row = iou_matrix[i]
        best_j = -1
        best = -1.0
        for j in range(n_gt):
            v = row[j]
            if not taken[j] and v >= iou_thresh and v > best:
                best = v
                best_j = j
        if best_j >= 0:
            taken[best_j] = True
            assigned[i] = best_j
    return assigned


def _gt_box(gt: PolygonAnnotation) -> BoundingBox:
    return polygon_bbox(gt)


def iou_matrix_box(preds: Sequence[Detection], gts: Sequence[PolygonAnnotation]) -> np.ndarray:
    gt_boxes = [_gt_box(g) for g in gts]
    out = np.zeros((len(preds), len(gts)))
    for i, p in enumerate(preds):
        for j, gb in enumerate(gt_boxes):
            out[i, j] = iou_box(p.box, gb)
    return out


def iou_matrix_mask(
    preds: Sequence[Detection],
    gts: Sequence[PolygonAnnotation],
    image_size: tuple[int, int],
) -> np.ndarray:
    width, height = image_size
    pred_masks = []
    for p in preds:
        if p.mask_polygon is None:
            raise ValueError("mask matching needs a mask polygon on every prediction")
        pred_masks.append(rasterize_polygon(p.mask_polygon, width, height))
    gt_masks = [rasterize_polygon(g, width, height) for g in gts]
    out = np.zeros((len(preds), len(gts)))
    for i, pm in enumerate(pred_masks):
        for j, gm in enumerate(gt_masks):
            out[i, j] = iou_mask(pm, gm)
    return out


def full_iou_matrix(
    preds: Sequence[Detection],
    gts: Sequence[PolygonAnnotation],
    kind: str,
    image_size: tuple[int, int] | None = None,
) -> np.ndarray:
    """Class-agnostic predictions-by-ground-truths IoU matrix for one image."""
    if kind == "mask":
        if image_size is None:
            raise ValueError("mask matching needs image_size")
        return iou_matrix_mask(preds, gts, image_size)
    return iou_matrix_box(preds, gts)


def match_detections(
    preds: Sequence[Detection],
    gts: Sequence[PolygonAnnotation],
    iou_thresh: float,
    kind: str = "box",
    image_size: tuple[int, int] | None = None,
) -> MatchResult:
    """Greedy-match one image's predictions of one class against its ground truths."""
    if kind not in ("box", "mask"):
        raise ValueError(f"kind must be 'box' or 'mask', got {kind!r}")
    classes = {p.class_id for p in preds} | {g.class_id for g in gts}
    if len(classes) > 1:
        raise ValueError(f"match_detections expects a single class, got {sorted(classes)}")
    if kind == "mask":
        if image_size is None:
            raise ValueError("mask matching needs image_size")
        matrix = iou_matrix_mask(preds, gts, image_size)
    else:
        matrix = iou_matrix_box(preds, gts)
    order = _confidence_order([p.confidence for p in preds])
    assigned = greedy_match(matrix, order, iou_thresh)
    pred_records = tuple(
        PredictionMatch(
            class_id=p.class_id,
            confidence=p.confidence,
            matched=assigned[i] >= 0,
            iou=float(matrix[i, assigned[i]]) if assigned[i] >= 0 else 0.0,
        )
        for i, p in enumerate(preds)
    )
    matched_gt = {j for j in assigned if j >= 0}
    gt_records = tuple(
        GroundTruthMatch(class_id=g.class_id, matched=j in matched_gt) for j, g in enumerate(gts)
    )
    return MatchResult(pred_records, gt_records, iou_thresh, kind)


def average_precision(records: Sequence[tuple[float, bool]], total_gt: int) -> float:
    """101-point interpolated AP from (confidence, is_true_positive) records."""
    if total_gt <= 0:
        return 0.0
    if not records:
        return 0.0
    order = _confidence_order([c for c, _ in records])
    tp = np.array([bool(records[i][1]) for i in order], dtype=np.float64)
    cum_tp = np.cumsum(tp)
    ranks = np.arange(1, len(tp) + 1, dtype=np.float64)
    recalls = cum_tp / total_gt
    precisions = cum_tp / ranks
    # Monotone envelope: best precision at any recall >= r.  The sample
    # grid is built by division so each point is the correctly rounded
    # double for k/100 (linspace drifts an ulp off and misses exact ties).
    envelope = np.maximum.accumulate(precisions[::-1])[::-1]
    samples = np.arange(101, dtype=np.float64) / 100.0
    idx = np.searchsorted(recalls, samples, side="left")
    valid = idx < len(recalls)
    return float(np.where(valid, envelope[np.minimum(idx, len(recalls) - 1)], 0.0).mean())


@dataclass(frozen=True)
class ClassMatches:
    """All of one class's predictions across a dataset, confidence-sorted."""

    confidences: np.ndarray  # descending
    tp: np.ndarray  # (n_predictions, len(iou_thresholds)) booleans
    gt_count: int
    image_count: int  # images containing this class


@dataclass(frozen=True)
class DatasetMatches:
    """Per-class match tables for one IoU-kind over a whole dataset."""

    kind: str
    class_names: tuple[str, ...]
    per_class: tuple[ClassMatches, ...]
    image_count: int
    iou_thresholds: tuple[float, ...] = IOU_THRESHOLDS


def collect_matches(
    gts_by_image: Mapping[str, Sequence[PolygonAnnotation]],
    preds_by_image: Mapping[str, Sequence[Detection]],
    class_names: Sequence[str],
    kind: str = "box",
    image_sizes: Mapping[str, tuple[int, int]] | None = None,
    iou_thresholds: Sequence[float] = IOU_THRESHOLDS,
    matrices: Mapping[str, np.ndarray] | None = None,
) -> DatasetMatches:
    """Match every image at every IoU threshold and pool results by class.

    Images are processed in sorted-stem order so cross-image confidence ties
    resolve deterministically.  For ``kind="mask"``, predictions without a
    mask polygon are excluded (they cannot be scored as masks).  ``matrices``
    may supply precomputed class-agnostic IoU matrices per stem, with rows
    covering exactly the predictions that survive that filter, in input order.
    """
    num_classes = len(class_names)
    stems = sorted(set(gts_by_image) | set(preds_by_image))
    confs: list[list[float]] = [[] for _ in range(num_classes)]
    tps: list[list[np.ndarray]] = [[] for _ in range(num_classes)]
    gt_counts = [0] * num_classes
    image_counts = [0] * num_classes

    for stem in stems:
        gts = list(gts_by_image.get(stem, ()))
        preds = list(preds_by_image.get(stem, ()))
        if kind == "mask":
            preds = [p for p in preds if p.mask_polygon is not None]
        if matrices is not None:
            full = matrices[stem]
        else:
            size = image_sizes[stem] if image_sizes is not None else None
            full = full_iou_matrix(preds, gts, kind, size)
        for c in range(num_classes):
            gt_idx = [j for j, g in enumerate(gts) if g.class_id == c]
            pred_idx = [i for i, p in enumerate(preds) if p.class_id == c]
            gt_counts[c] += len(gt_idx)
            if gt_idx:
                image_counts[c] += 1
            if not pred_idx:
                continue
            matrix = full[np.ix_(pred_idx, gt_idx)]
            order = _confidence_order([preds[i].confidence for i in pred_idx])
            flags = np.zeros((len(pred_idx), len(iou_thresholds)), dtype=bool)
            for t_index, thresh in enumerate(iou_thresholds):
                assigned = greedy_match(matrix, order, thresh)
                flags[:, t_index] = [j >= 0 for j in assigned]
            confs[c].extend(preds[i].confidence for i in pred_idx)
            tps[c].append(flags)

    per_class = []
    for c in range(num_classes):
        conf = np.asarray(confs[c], dtype=np.float64)
        tp = (
            np.concatenate(tps[c], axis=0)
            if tps[c]
            else np.zeros((0, len(iou_thresholds)), dtype=bool)
        )
        order = _confidence_order(conf.tolist())
        per_class.append(
            ClassMatches(
                confidences=conf[order],
                tp=tp[order],
                gt_count=gt_counts[c],
                image_count=image_counts[c],
            )
        )
    return DatasetMatches(
        kind=kind,
        class_names=tuple(class_names),
        per_class=tuple(per_class),
        image_count=len(stems),
        iou_thresholds=tuple(iou_thresholds),
    )


def _sweep_counts(cm: ClassMatches, thresholds: np.ndarray, t_index: int = 0):
    """Kept-prediction and true-positive counts at each confidence threshold."""
    ascending = cm.confidences[::-1]
    kept = len(cm.confidences) - np.searchsorted(ascending, thresholds, side="left")
    cum_tp = np.concatenate(([0.0], np.cumsum(cm.tp[:, t_index].astype(np.float64))))
    return kept, cum_tp[kept]


def sweep_precision_recall(
    cm: ClassMatches, thresholds: np.ndarray = CONFIDENCE_GRID
) -> tuple[np.ndarray, np.ndarray]:
    """Per-threshold precision and recall at IoU 0.50 (curve conventions)."""
    kept, tp = _sweep_counts(cm, thresholds)
    precision = np.where(kept > 0, tp / np.maximum(kept, 1), 1.0)
    recall = tp / cm.gt_count if cm.gt_count > 0 else np.zeros_like(tp)
    return precision, recall


@dataclass(frozen=True)
class CurveSeries:
    """One curve family: per-class samples plus the "all" mean series."""

    kind: str
    series: dict[str, tuple[np.ndarray, np.ndarray]]


def confidence_curves(matches: DatasetMatches) -> list[CurveSeries]:
    """F1/precision/recall-vs-confidence and precision-recall curves.

    Classes with zero ground-truth instances are omitted (and excluded from
    the "all" mean, which averages the per-class curves pointwise).
    """
    thresholds = CONFIDENCE_GRID
    included = [
        (name, cm)
        for name, cm in zip(matches.class_names, matches.per_class)
        if cm.gt_count > 0
    ]
    precisions: dict[str, np.ndarray] = {}
    recalls: dict[str, np.ndarray] = {}
    f1s: dict[str, np.ndarray] = {}
    for name, cm in included:
        p, r = sweep_precision_recall(cm, thresholds)
        precisions[name] = p
        recalls[name] = r
        f1s[name] = np.where(p + r > 0, 2 * p * r / np.maximum(p + r, 1e-300), 0.0)
    if included:
        names = [name for name, _ in included]
        precisions["all"] = np.mean([precisions[n] for n in names], axis=0)
        recalls["all"] = np.mean([recalls[n] for n in names], axis=0)
        f1s["all"] = np.mean([f1s[n] for n in names], axis=0)

    def conf_series(values: dict[str, np.ndarray]) -> dict[str, tuple[np.ndarray, np.ndarray]]:
        return {name: (thresholds.copy(), v) for name, v in values.items()}

    pr_series: dict[str, tuple[np.ndarray, np.ndarray]] = {}
    for name in list(precisions):
        r, p = recalls[name], precisions[name]
        pr_series[name] = _strictly_increasing(r, p)

    return [
        CurveSeries("f1-conf", conf_series(f1s)),
        CurveSeries("precision-conf", conf_series(precisions)),
        CurveSeries("recall-conf", conf_series(recalls)),
        CurveSeries("precision-recall", pr_series),
    ]


def _strictly_increasing(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Collapse duplicate x samples keeping the best y, sorted by x."""
    if len(x) == 0:
        return x, y
    best: dict[float, float] = {}
    for xi, yi in zip(x.tolist(), y.tolist()):
        if xi not in best or yi > best[xi]:
            best[xi] = yi
    xs = np.array(sorted(best))
    return xs, np.array([best[v] for v in xs])


def f1_best_threshold(matches: DatasetMatches) -> float:
    """Lowest confidence threshold maximizing the "all" F1 curve."""
    curves = {c.kind: c for c in confidence_curves(matches)}
    series = curves["f1-conf"].series
    if "all" not in series:
        return 0.0
    x, y = series["all"]
    return float(x[int(np.argmax(y))])


@dataclass(frozen=True)
class ClassStats:
    precision: float
    recall: float
    map50: float
    map50_95: float


@dataclass(frozen=True)
class SummaryRow:
    name: str
    images: int
    instances: int
    stats: ClassStats


@dataclass(frozen=True)
class MapSummary:
    """Table-shaped metric summary for one IoU-kind ("all" row first)."""

    kind: str
    rows: tuple[SummaryRow, ...]
    f1_threshold: float

    def row(self, name: str) -> SummaryRow:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)


def map_summary(matches: DatasetMatches) -> MapSummary:
    """Per-class and "all" precision, recall, mAP50, and mAP50-95.

    P and R are taken at the "all"-F1-maximizing confidence threshold using
    the summary 0/0 -> 0 convention; mAPs come from 101-point AP.  Classes
    with zero ground truths report zeros and stay out of the "all" means.
    """
    threshold = f1_best_threshold(matches)
    t50 = matches.iou_thresholds.index(0.5)
    rows: list[SummaryRow] = []
    included: list[ClassStats] = []
    for name, cm in zip(matches.class_names, matches.per_class):
        aps = [
            average_precision(
                list(zip(cm.confidences.tolist(), cm.tp[:, t].tolist())), cm.gt_count
            )
            for t in range(len(matches.iou_thresholds))
        ]
        kept, tp = _sweep_counts(cm, np.array([threshold]), t50)
        kept_n, tp_n = int(kept[0]), float(tp[0])
        precision = tp_n / kept_n if kept_n > 0 else 0.0
        recall = tp_n / cm.gt_count if cm.gt_count > 0 else 0.0
        stats = ClassStats(
            precision=precision,
            recall=recall,
            map50=aps[t50],
            map50_95=float(np.mean(aps)),
        )
        if cm.gt_count > 0:
            included.append(stats)
        rows.append(SummaryRow(name=name, images=cm.image_count, instances=cm.gt_count, stats=stats))

    if included:
        all_stats = ClassStats(
            precision=float(np.mean([s.precision for s in included])),
            recall=float(np.mean([s.recall for s in included])),
            map50=float(np.mean([s.map50 for s in included])),
            map50_95=float(np.mean([s.map50_95 for s in included])),
        )
    else:
        all_stats = ClassStats(0.0, 0.0, 0.0, 0.0)
    all_row = SummaryRow(
        name="all",
        images=matches.image_count,
        instances=sum(cm.gt_count for cm in matches.per_class),
        stats=all_stats,
    )
    return MapSummary(kind=matches.kind, rows=(all_row, *rows), f1_threshold=threshold)


@dataclass(frozen=True)
class ConfusionMatrix:
    """(C+1)x(C+1) counts; rows are true classes, columns predictions, with
    the extra last row/column for background (spurious/missed)."""

    class_names: tuple[str, ...]
    counts: np.ndarray
    conf_thresh: float
    iou_thresh: float


def confusion_matrix(
    gts_by_image: Mapping[str, Sequence[PolygonAnnotation]],
    preds_by_image: Mapping[str, Sequence[Detection]],
    class_names: Sequence[str],
    conf_thresh: float = 0.25,
    iou_thresh: float = 0.45,
    kind: str = "box",
    image_sizes: Mapping[str, tuple[int, int]] | None = None,
    matrices: Mapping[str, np.ndarray] | None = None,
) -> ConfusionMatrix:
    """Class-agnostic greedy matching so misclassifications land off-diagonal.

    Predictions below ``conf_thresh`` are discarded; each surviving one takes
    the free ground truth (of any class) with the highest IoU >= ``iou_thresh``.
    Unmatched ground truths count in the background column of their true row;
    unmatched predictions in the background row of their predicted column.
    ``matrices`` may supply precomputed IoU matrices covering all predictions
    of the kind (before confidence filtering), rows in input order.
    """
    num_classes = len(class_names)
    counts = np.zeros((num_classes + 1, num_classes + 1), dtype=np.int64)
    for stem in sorted(set(gts_by_image) | set(preds_by_image)):
        gts = list(gts_by_image.get(stem, ()))
        all_preds = list(preds_by_image.get(stem, ()))
        if kind == "mask":
            all_preds = [p for p in all_preds if p.mask_polygon is not None]
        keep_idx = [i for i, p in enumerate(all_preds) if p.confidence >= conf_thresh]
        preds = [all_preds[i] for i in keep_idx]
        if matrices is not None:
            matrix = matrices[stem][np.ix_(keep_idx, range(len(gts)))]
        else:
            size = image_sizes[stem] if image_sizes is not None else None
            matrix = full_iou_matrix(preds, gts, kind, size)
        order = _confidence_order([p.confidence for p in preds])
        assigned = greedy_match(matrix, order, iou_thresh)
        matched_gt = set()
        for i, p in enumerate(preds):
            j = assigned[i]
            if j >= 0:
                counts[gts[j].class_id, p.class_id] += 1
                matched_gt.add(j)
            else:
                counts[num_classes, p.class_id] += 1
        for j, g in enumerate(gts):
            if j not in matched_gt:
                counts[g.class_id, num_classes] += 1
    return ConfusionMatrix(
        class_names=tuple(class_names),
        counts=counts,
        conf_thresh=conf_thresh,
        iou_thresh=iou_thresh,
    )
