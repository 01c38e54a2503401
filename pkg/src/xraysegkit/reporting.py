"""Evaluation report files: CSV tables, curve CSVs, and self-contained SVG
line plots, plus the text table printed by the CLI.

``report.csv`` follows the column layout of the standard per-class results
table: class, images, instances, then Box and Mask precision/recall/mAP50/
mAP50-95.  Curve CSVs are long-format (series, x, y) so every curve kind,
including precision-recall with its per-class x grids, shares one schema.
All values print with 6 decimals, so reloading with a generic CSV parser
reproduces them to that precision.
"""

from __future__ import annotations

import csv
import io
import os
from pathlib import Path

from .metrics import ConfusionMatrix, CurveSeries, MapSummary

REPORT_COLUMNS = [
    "class",
    "images",
    "instances",
    "box_p",
    "box_r",
    "box_map50",
    "box_map50_95",
    "mask_p",
    "mask_r",
    "mask_map50",
    "mask_map50_95",
]

_SERIES_COLORS = [
    "#1f77b4",
    "#ff7f0e",
    "#2ca02c",
    "#d62728",
    "#9467bd",
    "#8c564b",
    "#e377c2",
    "#7f7f7f",
]


def _fmt(value: float) -> str:
    return f"{value:.6f}"


def report_csv_text(box: MapSummary, mask: MapSummary) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for box_row, mask_row in zip(box.rows, mask.rows):
        writer.writerow(
            [
                box_row.name,
                box_row.images,
                box_row.instances,
                _fmt(box_row.stats.precision),
                _fmt(box_row.stats.recall),
                _fmt(box_row.stats.map50),
                _fmt(box_row.stats.map50_95),
                _fmt(mask_row.stats.precision),
                _fmt(mask_row.stats.recall),
                _fmt(mask_row.stats.map50),
                _fmt(mask_row.stats.map50_95),
            ]
        )
    return buf.getvalue()


def confusion_csv_text(matrix: ConfusionMatrix) -> str:
    buf = io.StringIO()
    buf.write(
        f"# conf_thresh={_fmt(matrix.conf_thresh)} iou_thresh={_fmt(matrix.iou_thresh)}\n"
    )
    writer = csv.writer(buf, lineterminator="\n")
    names = [*matrix.class_names, "background"]
    writer.writerow(["true_class", *names])
    for row_name, row in zip(names, matrix.counts):
        writer.writerow([row_name, *[int(v) for v in row]])
    return buf.getvalue()


def curve_csv_text(curve: CurveSeries) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["series", "x", "y"])
    for name in sorted(curve.series):
        xs, ys = curve.series[name]
        for x, y in zip(xs.tolist(), ys.tolist()):
            writer.writerow([name, _fmt(x), _fmt(y)])
    return buf.getvalue()


_AXIS_LABELS = {
    "f1-conf": ("confidence", "F1"),
    "precision-conf": ("confidence", "precision"),
    "recall-conf": ("confidence", "recall"),
    "precision-recall": ("recall", "precision"),
}


def curve_svg_text(curve: CurveSeries, width: int = 640, height: int = 480) -> str:
    """Render one curve family as a standalone SVG line plot."""
    margin = 50
    plot_w = width - 2 * margin
    plot_h = height - 2 * margin
    x_label, y_label = _AXIS_LABELS.get(curve.kind, ("x", "y"))

    def px(x: float) -> float:
        return margin + x * plot_w

    def py(y: float) -> float:
        return height - margin - y * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{margin}" y="{margin}" width="{plot_w}" height="{plot_h}" '
        'fill="none" stroke="#333" stroke-width="1"/>',
    ]
    for tick in (0.0, 0.25, 0.5, 0.75, 1.0):
        tx, ty = px(tick), py(tick)
        parts.append(
            f'<line x1="{tx:.1f}" y1="{height - margin}" x2="{tx:.1f}" '
            f'y2="{height - margin + 5}" stroke="#333"/>'
        )
        parts.append(
            f'<text x="{tx:.1f}" y="{height - margin + 18}" font-size="11" '
            f'text-anchor="middle" font-family="sans-serif">{tick:g}</text>'
        )
        parts.append(
            f'<line x1="{margin - 5}" y1="{ty:.1f}" x2="{margin}" y2="{ty:.1f}" stroke="#333"/>'
        )
        parts.append(
            f'<text x="{margin - 8}" y="{ty + 4:.1f}" font-size="11" '
            f'text-anchor="end" font-family="sans-serif">{tick:g}</text>'
        )
    parts.append(
        f'<text x="{width / 2:.1f}" y="{height - 10}" font-size="13" '
        f'text-anchor="middle" font-family="sans-serif">{x_label}</text>'
    )
    parts.append(
        f'<text x="15" y="{height / 2:.1f}" font-size="13" text-anchor="middle" '
        f'font-family="sans-serif" transform="rotate(-90 15 {height / 2:.1f})">{y_label}</text>'
    )

    names = sorted(n for n in curve.series if n != "all")
    if "all" in curve.series:
        names.append("all")
    for idx, name in enumerate(names):
        xs, ys = curve.series[name]
        if len(xs) == 0:
            continue
        color = "#000000" if name == "all" else _SERIES_COLORS[idx % len(_SERIES_COLORS)]
        stroke_w = 2.5 if name == "all" else 1.2
        points = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs.tolist(), ys.tolist()))
        parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="{stroke_w}" points="{points}"/>'
        )
        ly = margin + 16 + 14 * idx
        parts.append(
            f'<line x1="{width - margin - 110}" y1="{ly - 4}" x2="{width - margin - 90}" '
            f'y2="{ly - 4}" stroke="{color}" stroke-width="{stroke_w}"/>'
        )
        parts.append(
            f'<text x="{width - margin - 85}" y="{ly}" font-size="11" '
            f'font-family="sans-serif">{name}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def format_report_table(box: MapSummary, mask: MapSummary) -> str:
    """Human-readable table in the classic class/images/instances/Box/Mask shape."""
    header = (
        f"{'Class':<12}{'Images':>8}{'Instances':>11}"
        f"{'Box(P':>10}{'R':>8}{'mAP50':>8}{'mAP50-95)':>11}"
        f"{'Mask(P':>10}{'R':>8}{'mAP50':>8}{'mAP50-95)':>11}"
    )
    lines = [header]
    for box_row, mask_row in zip(box.rows, mask.rows):
        lines.append(
            f"{box_row.name:<12}{box_row.images:>8}{box_row.instances:>11}"
            f"{box_row.stats.precision:>10.3f}{box_row.stats.recall:>8.3f}"
            f"{box_row.stats.map50:>8.3f}{box_row.stats.map50_95:>11.3f}"
            f"{mask_row.stats.precision:>10.3f}{mask_row.stats.recall:>8.3f}"
            f"{mask_row.stats.map50:>8.3f}{mask_row.stats.map50_95:>11.3f}"
        )
    lines.append(
        f"(P and R at F1-max confidence: box {box.f1_threshold:.4f}, mask {mask.f1_threshold:.4f})"
    )
    return "\n".join(lines) + "\n"


def write_report(
    box: MapSummary,
    mask: MapSummary,
    matrix: ConfusionMatrix,
    curves: list[CurveSeries],
    out_dir: str | os.PathLike,
) -> list[Path]:
    """Write report.csv, confusion_matrix.csv, and per-curve CSV/SVG files."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    report = out / "report.csv"
    report.write_text(report_csv_text(box, mask), encoding="utf-8")
    written.append(report)
    confusion = out / "confusion_matrix.csv"
    confusion.write_text(confusion_csv_text(matrix), encoding="utf-8")
    written.append(confusion)
    for curve in curves:
        csv_path = out / f"curve_{curve.kind}.csv"
        csv_path.write_text(curve_csv_text(curve), encoding="utf-8")
        written.append(csv_path)
        svg_path = out / f"curve_{curve.kind}.svg"
        svg_path.write_text(curve_svg_text(curve), encoding="utf-8")
        written.append(svg_path)
    return written
