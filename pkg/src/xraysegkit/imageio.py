"""Grayscale image decoding and encoding: 8-bit PNG and binary PGM (P5).

PNG work is delegated to Pillow; the PGM codec is implemented here so the
header layout stays under our control and round-trips are bit-exact.  RGB
PNG input is converted to grayscale with the luma rule
``round(0.299*R + 0.587*G + 0.114*B)`` (rounding half away from zero).
No other formats are supported.
"""

from __future__ import annotations

import io
import os
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .imaging import require_gray, require_mask, round_half_away

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


class ImageFormatError(ValueError):
    """Raised for unreadable, unsupported, or structurally invalid images."""


def _luma(rgb: np.ndarray) -> np.ndarray:
    y = 0.299 * rgb[:, :, 0] + 0.587 * rgb[:, :, 1] + 0.114 * rgb[:, :, 2]
    return round_half_away(y).astype(np.uint8)


def _decode_png(data: bytes) -> np.ndarray:
    try:
        with Image.open(io.BytesIO(data)) as im:
            im.load()
            if im.mode == "L":
                return np.asarray(im, dtype=np.uint8)
            if im.mode == "RGB":
                return _luma(np.asarray(im, dtype=np.float64))
            raise ImageFormatError(
                f"unsupported PNG mode {im.mode!r}: only 8-bit grayscale or RGB"
            )
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise ImageFormatError(f"unsupported or corrupt image: {exc}") from exc


def _decode_pgm(data: bytes) -> np.ndarray:
    # Header: "P5", then width, height, maxval as ASCII tokens; '#' starts a
    # comment running to end of line; a single whitespace byte separates the
    # maxval from the raster.
    if not data.startswith(b"P5"):
        raise ImageFormatError("unsupported or corrupt image: not a P5 PGM")
    pos = 2
    fields: list[int] = []
    while len(fields) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            eol = data.find(b"\n", pos)
            pos = len(data) if eol == -1 else eol + 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        token = data[start:pos]
        if not token.isdigit():
            raise ImageFormatError("unsupported or corrupt image: bad PGM header")
        fields.append(int(token))
    width, height, maxval = fields
    if maxval != 255:
        raise ImageFormatError(f"unsupported PGM maxval {maxval}: only 255")
    if width < 1 or height < 1:
        raise ImageFormatError(f"invalid PGM dimensions {width}x{height}")
    pos += 1  # single whitespace after maxval
    raster = data[pos : pos + width * height]
    if len(raster) != width * height:
        raise ImageFormatError("unsupported or corrupt image: truncated PGM raster")
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width).copy()


def decode_image(data: bytes) -> np.ndarray:
    """Decode PNG or PGM bytes into a GrayImage."""
    if data.startswith(_PNG_MAGIC):
        img = _decode_png(data)
    elif data.startswith(b"P5"):
        img = _decode_pgm(data)
    else:
        raise ImageFormatError("unsupported or corrupt image: unknown format")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise ImageFormatError(f"invalid image dimensions {img.shape}")
    return img


def load_image(path: str | os.PathLike) -> np.ndarray:
    """Load a PNG or PGM file from disk as a GrayImage."""
    return decode_image(Path(path).read_bytes())


def _as_storable(img: np.ndarray) -> np.ndarray:
    arr = np.asarray(img)
    if arr.dtype == np.bool_:
        return np.where(require_mask(arr), 255, 0).astype(np.uint8)
    return require_gray(arr)


def encode_png(img: np.ndarray) -> bytes:
    """Encode a GrayImage or BinaryMask (written as {0, 255}) as 8-bit gray PNG."""
    buf = io.BytesIO()
    Image.fromarray(_as_storable(img), mode="L").save(buf, format="PNG")
    return buf.getvalue()


def encode_pgm(img: np.ndarray) -> bytes:
    """Encode a GrayImage or BinaryMask (written as {0, 255}) as binary P5 PGM."""
    arr = _as_storable(img)
    h, w = arr.shape
    return b"P5\n%d %d\n255\n" % (w, h) + arr.tobytes()


def save_image(img: np.ndarray, path: str | os.PathLike, format: str | None = None) -> None:
    """Write ``img`` to ``path`` as PNG or PGM.

    ``format`` may be "png" or "pgm"; when omitted it is inferred from the
    path suffix (defaulting to PNG).  The parent directory must exist.
    """
    path = Path(path)
    if format is None:
        format = "pgm" if path.suffix.lower() == ".pgm" else "png"
    if format == "png":
        data = encode_png(img)
    elif format == "pgm":
        data = encode_pgm(img)
    else:
        raise ValueError(f"format must be 'png' or 'pgm', got {format!r}")
    path.write_bytes(data)


def image_size(path: str | os.PathLike) -> tuple[int, int]:
    """Read the (width, height) of a PNG or PGM file without decoding pixels."""
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(64)
    if head.startswith(_PNG_MAGIC):
        try:
            with Image.open(path) as im:
                return im.size
        except (UnidentifiedImageError, OSError, SyntaxError) as exc:
            raise ImageFormatError(f"unsupported or corrupt image: {exc}") from exc
    img = _decode_pgm(path.read_bytes())
    return img.shape[1], img.shape[0]
