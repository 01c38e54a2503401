"""Batch command-line frontend.

Subcommands: ``segment`` (run one classical method over an image or a
directory of images), ``labels`` (validate/rasterize/trace YOLO polygon
labels), ``eval`` (full detection/segmentation evaluation against a
predictions directory), and ``serve`` (start the annotation service).

Exit codes: 0 success, 1 runtime or data error, 2 usage error.  The
``XRAYSEGKIT_LOG`` environment variable (error/warn/info/debug) controls
diagnostic verbosity on stderr.
"""

from __future__ import annotations

import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click
import numpy as np

from . import __version__
from .evaluate import evaluate_dataset, load_predictions
from .imageio import ImageFormatError, load_image, save_image
from .labels import (
    DatasetError,
    LabelParseError,
    PolygonAnnotation,
    load_dataset,
    serialize_label_file,
)
from .pipeline import (
    DEFAULT_SEED,
    DEFAULT_TAU,
    DEFAULT_THRESHOLD,
    METHODS,
    SegmentOptions,
    run_segmentation,
)
from .rasterize import mask_to_polygons, rasterize_polygon
from .reporting import format_report_table, write_report

log = logging.getLogger("xraysegkit")

_LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}


def _setup_logging():
    level = os.environ.get("XRAYSEGKIT_LOG", "warn").lower()
    if level not in _LOG_LEVELS:
        level = "warn"
    logging.basicConfig(level=_LOG_LEVELS[level], format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def _fail(message: str) -> "click.exceptions.Exit":
    click.echo(f"error: {message}", err=True)
    return click.exceptions.Exit(1)


class XYParam(click.ParamType):
    name = "x,y"

    def convert(self, value, param, ctx):
        if isinstance(value, tuple):
            return value
        try:
            x, y = value.split(",")
            return int(x), int(y)
        except ValueError:
            self.fail(f"{value!r} is not of the form x,y", param, ctx)


class CircleParam(click.ParamType):
    name = "cx,cy,r"

    def convert(self, value, param, ctx):
        if isinstance(value, tuple):
            return value
        try:
            cx, cy, r = value.split(",")
            return float(cx), float(cy), float(r)
        except ValueError:
            self.fail(f"{value!r} is not of the form cx,cy,r", param, ctx)


@click.group()
@click.version_option(version=__version__)
def main():
    """Classical X-ray segmentation, YOLO labels, and evaluation toolkit."""
    _setup_logging()


def _overlay_bytes(image: np.ndarray, result: np.ndarray) -> bytes:
    """Input image with the result tinted red, as RGB PNG bytes."""
    import io

    from PIL import Image

    mask = result if result.dtype == np.bool_ else result > 0
    base = image.astype(np.float64)
    rgb = np.stack([base, base, base], axis=-1)
    rgb[mask, 0] = 0.55 * base[mask] + 0.45 * 255.0
    rgb[mask, 1] = 0.55 * base[mask]
    rgb[mask, 2] = 0.55 * base[mask]
    buf = io.BytesIO()
    Image.fromarray(np.clip(np.floor(rgb + 0.5), 0, 255).astype(np.uint8), "RGB").save(buf, "PNG")
    return buf.getvalue()


def _segment_one(in_path: Path, out_path: Path, options: SegmentOptions, overlay: bool):
    image = load_image(in_path)
    result = run_segmentation(image, options)
    save_image(result, out_path)
    if overlay:
        overlay_path = out_path.with_name(out_path.stem + "_overlay.png")
        overlay_path.write_bytes(_overlay_bytes(image, result))
    log.info("segmented %s -> %s", in_path, out_path)


@main.command()
@click.option("--method", type=click.Choice(METHODS), required=True, help="Segmentation method.")
@click.option("--t", type=click.IntRange(0, 255), default=DEFAULT_THRESHOLD, show_default=True,
              help="Fixed threshold (demo default from the hand X-ray figure).")
@click.option("--seed", type=XYParam(), default=DEFAULT_SEED, show_default="640,790",
              help="Region-growing seed pixel.")
@click.option("--tau", type=click.FloatRange(min=0), default=DEFAULT_TAU, show_default=True,
              help="Region-growing intensity tolerance.")
@click.option("--mode", type=click.Choice(["seed-ref", "running-mean"]), default="seed-ref",
              show_default=True, help="Region-growing reference: seed intensity or running mean.")
@click.option("--connectivity", type=click.Choice(["4", "8"]), default="8", show_default=True)
@click.option("--border", type=click.Choice(["replicate", "zero"]), default="replicate", show_default=True)
@click.option("--sigma", type=click.FloatRange(min=0, min_open=True), default=1.4, show_default=True,
              help="Gaussian sigma (canny smoothing / snake field smoothing).")
@click.option("--t-low", type=click.FloatRange(min=0), default=20.0, show_default=True)
@click.option("--t-high", type=click.FloatRange(min=0), default=60.0, show_default=True)
@click.option("--snake-alpha", type=float, default=0.05, show_default=True)
@click.option("--snake-beta", type=float, default=0.1, show_default=True)
@click.option("--snake-gamma", type=float, default=1.0, show_default=True)
@click.option("--snake-search-radius", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--snake-iters", type=click.IntRange(min=1), default=500, show_default=True)
@click.option("--snake-epsilon", type=click.FloatRange(0, 1), default=0.02, show_default=True)
@click.option("--init-circle", type=CircleParam(), default=None,
              help="Snake init circle cx,cy,r in pixels (default: image centre).")
@click.option("--init-points", type=click.IntRange(min=3), default=16, show_default=True)
@click.option("--pre-gamma", type=click.FloatRange(min=0, min_open=True), default=None,
              help="Apply gamma correction before segmenting.")
@click.option("--sharpen-sigma", type=click.FloatRange(min=0, min_open=True), default=None,
              help="Apply unsharp sharpening (this sigma) before segmenting.")
@click.option("--sharpen-amount", type=click.FloatRange(min=0), default=1.0, show_default=True)
@click.option("--morph", "morph_op", type=click.Choice(["erode", "dilate", "open", "close"]),
              default=None, help="Morphological post-processing of the mask.")
@click.option("--morph-size", type=click.IntRange(min=3), default=3, show_default=True)
@click.option("--overlay", is_flag=True, help="Also write the input with the mask tinted.")
@click.option("--jobs", type=click.IntRange(min=1), default=os.cpu_count, show_default="cpu count",
              help="Parallel workers for directory inputs.")
@click.argument("input_path", type=click.Path(exists=True, path_type=Path))
@click.argument("output_path", type=click.Path(path_type=Path))
def segment(method, t, seed, tau, mode, connectivity, border, sigma, t_low, t_high,
            snake_alpha, snake_beta, snake_gamma, snake_search_radius, snake_iters,
            snake_epsilon, init_circle, init_points, pre_gamma, sharpen_sigma,
            sharpen_amount, morph_op, morph_size, overlay, jobs, input_path, output_path):
    """Segment one image (or every PNG/PGM in a directory) and write the result."""
    if t_high < t_low:
        raise click.UsageError("--t-high must be >= --t-low")
    options = SegmentOptions(
        method=method, t=t, seed=seed, tau=tau, mode=mode, connectivity=int(connectivity),
        border=border, sigma=sigma, t_low=t_low, t_high=t_high,
        snake_alpha=snake_alpha, snake_beta=snake_beta, snake_gamma=snake_gamma,
        snake_search_radius=snake_search_radius, snake_iters=snake_iters,
        snake_epsilon=snake_epsilon, init_circle=init_circle, init_points=init_points,
        pre_gamma=pre_gamma, sharpen_sigma=sharpen_sigma, sharpen_amount=sharpen_amount,
        morph_op=morph_op, morph_size=morph_size,
    )
    try:
        if input_path.is_dir():
            output_path.mkdir(parents=True, exist_ok=True)
            inputs = sorted(
                p for p in input_path.iterdir()
                if p.suffix.lower() in (".png", ".pgm") and p.is_file()
            )
            if not inputs:
                raise _fail(f"no PNG/PGM images in {input_path}")
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                futures = [
                    pool.submit(_segment_one, p, output_path / f"{p.stem}.png", options, overlay)
                    for p in inputs
                ]
                for future in futures:
                    future.result()
            click.echo(f"segmented {len(inputs)} images into {output_path}")
        else:
            _segment_one(input_path, output_path, options, overlay)
    except (ImageFormatError, OSError, ValueError) as exc:
        raise _fail(str(exc))


@main.group()
def labels():
    """Validate, rasterize, and trace YOLO polygon labels."""


@labels.command()
@click.argument("descriptor", type=click.Path(exists=True, path_type=Path))
def validate(descriptor):
    """Check every image and label file in a dataset."""
    try:
        dataset = load_dataset(descriptor)
    except DatasetError as exc:
        for line in exc.errors:
            click.echo(f"error: {line}", err=True)
        raise click.exceptions.Exit(1)
    total = sum(r.label_count for r in dataset.images)
    empty = dataset.empty_stems
    click.echo(f"OK, {len(dataset.images)} images, {total} instances")
    if empty:
        click.echo(f"{len(empty)} images without labels: {', '.join(empty)}", err=True)


@labels.command()
@click.argument("descriptor", type=click.Path(exists=True, path_type=Path))
@click.argument("stem")
@click.option("--out", "out_dir", type=click.Path(path_type=Path), required=True,
              help="Directory for the per-class mask PNGs.")
def rasterize(descriptor, stem, out_dir):
    """Rasterize one image's labels into per-class mask PNGs."""
    try:
        dataset = load_dataset(descriptor)
    except DatasetError as exc:
        raise _fail(str(exc))
    records = {r.stem: r for r in dataset.images}
    if stem not in records:
        raise _fail(f"unknown image stem {stem!r}")
    record = records[stem]
    out_dir.mkdir(parents=True, exist_ok=True)
    written = 0
    for class_id, name in enumerate(dataset.descriptor.class_names):
        instances = [a for a in record.annotations if a.class_id == class_id]
        if not instances:
            continue
        mask = np.zeros((record.height, record.width), dtype=bool)
        for a in instances:
            mask |= rasterize_polygon(a, record.width, record.height)
        save_image(mask, out_dir / f"{stem}_{name}.png")
        written += 1
    click.echo(f"wrote {written} class masks for {stem} into {out_dir}")


@labels.command()
@click.argument("mask_path", type=click.Path(exists=True, path_type=Path))
@click.option("--class", "class_id", type=click.IntRange(min=0), required=True,
              help="Class index to assign to the traced polygons.")
@click.option("--min-area", type=click.IntRange(min=0), default=16, show_default=True,
              help="Drop components smaller than this many pixels.")
@click.option("--out", "out_path", type=click.Path(path_type=Path), default=None,
              help="Write the label file here (default: stdout).")
def trace(mask_path, class_id, min_area, out_path):
    """Trace a binary mask image back into polygon label lines."""
    try:
        image = load_image(mask_path)
        polygons = mask_to_polygons(image > 127, min_area=min_area)
        annots = [PolygonAnnotation(class_id=class_id, vertices=p) for p in polygons]
        text = serialize_label_file(annots)
        if out_path is not None:
            out_path.write_text(text, encoding="utf-8")
            click.echo(f"traced {len(annots)} polygons into {out_path}")
        else:
            click.echo(text, nl=False)
    except (ImageFormatError, OSError, ValueError) as exc:
        raise _fail(str(exc))


@main.command(name="eval")
@click.option("--dataset", "descriptor", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--preds", "preds_dir", type=click.Path(exists=True, file_okay=False, path_type=Path),
              required=True, help="Directory of per-image prediction .txt files.")
@click.option("--out", "out_dir", type=click.Path(path_type=Path), required=True,
              help="Directory for report.csv, confusion_matrix.csv, and curves.")
@click.option("--conf", "conf_thresh", type=click.FloatRange(0, 1), default=0.25, show_default=True,
              help="Confusion-matrix confidence threshold.")
@click.option("--iou", "iou_thresh", type=click.FloatRange(0, 1), default=0.45, show_default=True,
              help="Confusion-matrix IoU threshold.")
@click.option("--curve-kind", type=click.Choice(["box", "mask"]), default="box", show_default=True,
              help="IoU kind used for the confidence curves.")
@click.option("--jobs", type=click.IntRange(min=1), default=os.cpu_count, show_default="cpu count")
def eval_cmd(descriptor, preds_dir, out_dir, conf_thresh, iou_thresh, curve_kind, jobs):
    """Evaluate predictions against a dataset; print the metrics table."""
    try:
        dataset = load_dataset(descriptor)
    except DatasetError as exc:
        raise _fail(str(exc))
    try:
        preds, warnings = load_predictions(preds_dir, dataset)
    except LabelParseError as exc:
        for line in exc.errors:
            click.echo(f"error: {line}", err=True)
        raise click.exceptions.Exit(1)
    for message in warnings:
        click.echo(f"warning: {message}", err=True)
    result = evaluate_dataset(
        dataset, preds, conf_thresh=conf_thresh, iou_thresh=iou_thresh,
        curve_kind=curve_kind, jobs=jobs, warnings=tuple(warnings),
    )
    write_report(result.box, result.mask, result.matrix, result.curves, out_dir)
    click.echo(format_report_table(result.box, result.mask), nl=False)


@main.command()
@click.option("--dataset", "descriptor", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8080, show_default=True)
@click.option("--ui-dir", type=click.Path(file_okay=False, path_type=Path), default=None,
              help="Annotator UI bundle to serve at / (default: ./frontend/dist if present).")
def serve(descriptor, host, port, ui_dir):
    """Run the annotation service until interrupted."""
    import uvicorn

    from .service import create_app

    if ui_dir is None:
        candidate = Path.cwd() / "frontend" / "dist"
        ui_dir = candidate if candidate.is_dir() else None
    try:
        app = create_app(descriptor, ui_dir=ui_dir)
    except DatasetError as exc:
        raise _fail(str(exc))
    level = os.environ.get("XRAYSEGKIT_LOG", "warn").lower()
    uvicorn_level = {"error": "error", "warn": "warning", "info": "info", "debug": "debug"}.get(level, "warning")
    try:
        uvicorn.run(app, host=host, port=port, log_level=uvicorn_level)
    except OSError as exc:  # e.g. port already in use
        raise _fail(str(exc))


if __name__ == "__main__":
    main()
