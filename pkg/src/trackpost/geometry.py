"""Box and mask primitives.

Boxes are axis aligned, stored as (x, y, w, h) with the origin at the top
left corner.  Pixel masks use the inclusive-pixel convention: an integer
aligned box of width w covers columns x .. x+w-1, so the box derived from
a mask has w = max_col - min_col + 1 (and the same for rows).

Two mask file formats are supported:

  run-length text   first line "W H", then "value count" pairs in row-major
                    order: value is 0 or 1, count >= 1, counts sum to W*H
  binary PGM (P5)   standard header, maxval <= 255, nonzero bytes are
                    foreground
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _backend as kernels
from .errors import DomainError, InputFormatError


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box: top-left corner (x, y) and size (w, h), in pixels."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        for name in ("x", "y", "w", "h"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise DomainError(f"box {name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x, self.y, self.w, self.h)

    @property
    def area(self) -> float:
        return self.w * self.h


def aspect_ratio(box: BBox) -> float:
    """Width over height.  The height must be positive."""
    if box.h <= 0:
        raise DomainError(f"aspect ratio undefined for height {box.h}")
    return box.w / box.h


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union.  Both boxes must have positive area."""
    if a.w <= 0 or a.h <= 0 or b.w <= 0 or b.h <= 0:
        raise DomainError("iou requires boxes with positive width and height")
    return kernels.iou_xywh(a.x, a.y, a.w, a.h, b.x, b.y, b.w, b.h)


class BinaryMask:
    """Per-frame foreground bitmap, row major, nonzero means foreground."""

    __slots__ = ("width", "height", "_bits")

    def __init__(self, width: int, height: int, bits):
        width = int(width)
        height = int(height)
        if width < 1 or height < 1:
            raise InputFormatError("mask dimensions must be at least 1x1")
        arr = np.asarray(bits)
        if arr.ndim == 1:
            if arr.size != width * height:
                raise InputFormatError(
                    f"mask bits length {arr.size} does not match "
                    f"{width}x{height} = {width * height}"
                )
            arr = arr.reshape(height, width)
        elif arr.ndim == 2:
            if arr.shape != (height, width):
                raise InputFormatError(
                    f"mask bits shape {arr.shape} does not match "
                    f"height x width = ({height}, {width})"
                )
        else:
            raise InputFormatError("mask bits must be a 1-D or 2-D array")
        norm = np.ascontiguousarray((arr != 0).astype(np.uint8))
        norm.flags.writeable = False
        self.width = width
        self.height = height
        self._bits = norm

    @property
    def bits(self) -> np.ndarray:
        """Read-only (height, width) uint8 array of 0/1 values."""
        return self._bits

    @property
    def foreground_count(self) -> int:
        return int(self._bits.sum())

    def __eq__(self, other):
        if not isinstance(other, BinaryMask):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and np.array_equal(self._bits, other._bits)
        )

    __hash__ = None

    def __repr__(self):
        return f"BinaryMask({self.width}x{self.height}, fg={self.foreground_count})"


def mask_to_bbox(mask: BinaryMask) -> BBox | None:
    """Tightest box covering all foreground pixels; None for an empty mask."""
    extent = kernels.mask_extremes(mask.bits)
    if extent is None:
        return None
    min_col, min_row, max_col, max_row = extent
    return BBox(min_col, min_row, max_col - min_col + 1, max_row - min_row + 1)


def load_mask(path) -> BinaryMask:
    """Read a mask file, sniffing the format from its first bytes."""
    path = Path(path)
    if not path.is_file():
        raise InputFormatError(f"mask file not found: {path}")
    data = path.read_bytes()
    if data[:2] == b"P5":
        return _parse_pgm(data, path)
    return _parse_rle(data, path)


def _parse_rle(data: bytes, path: Path) -> BinaryMask:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise InputFormatError(f"{path}: not valid utf-8: {exc}") from exc
    tokens = text.split()
    if len(tokens) < 2:
        raise InputFormatError(f"{path}: missing 'W H' header")
    try:
        numbers = [int(tok) for tok in tokens]
    except ValueError as exc:
        raise InputFormatError(f"{path}: non-integer token: {exc}") from exc
    width, height = numbers[0], numbers[1]
    if width < 1 or height < 1:
        raise InputFormatError(f"{path}: bad mask dimensions {width}x{height}")
    pairs = numbers[2:]
    if len(pairs) % 2 != 0:
        raise InputFormatError(f"{path}: dangling run value without a count")
    values = np.asarray(pairs[0::2], dtype=np.int64)
    counts = np.asarray(pairs[1::2], dtype=np.int64)
    if values.size and not np.isin(values, (0, 1)).all():
        raise InputFormatError(f"{path}: run values must be 0 or 1")
    if (counts < 1).any():
        raise InputFormatError(f"{path}: run counts must be at least 1")
    total = int(counts.sum())
    if total != width * height:
        raise InputFormatError(
            f"{path}: run counts sum to {total}, expected {width * height}"
        )
    bits = kernels.rle_decode(values, counts, total)
    return BinaryMask(width, height, bits)


def _parse_pgm(data: bytes, path: Path) -> BinaryMask:
    pos = 0

    def next_token() -> bytes:
        nonlocal pos
        while pos < len(data):
            if data[pos:pos + 1].isspace():
                pos += 1
            elif data[pos:pos + 1] == b"#":
                while pos < len(data) and data[pos] != 0x0A:
                    pos += 1
            else:
                break
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise InputFormatError(f"{path}: truncated PGM header")
        return data[start:pos]

    magic = next_token()
    if magic != b"P5":
        raise InputFormatError(f"{path}: not a binary PGM file")
    try:
        width = int(next_token())
        height = int(next_token())
        maxval = int(next_token())
    except ValueError as exc:
        raise InputFormatError(f"{path}: bad PGM header: {exc}") from exc
    if width < 1 or height < 1:
        raise InputFormatError(f"{path}: bad PGM dimensions {width}x{height}")
    if not 1 <= maxval <= 255:
        raise InputFormatError(f"{path}: unsupported PGM maxval {maxval}")
    pos += 1  # exactly one whitespace byte separates header and raster
    raster = data[pos:]
    if len(raster) != width * height:
        raise InputFormatError(
            f"{path}: PGM raster has {len(raster)} bytes, "
            f"expected {width * height}"
        )
    bits = np.frombuffer(raster, dtype=np.uint8)
    return BinaryMask(width, height, bits)


def write_mask_rle(mask: BinaryMask, path) -> None:
    """Write the canonical run-length text form of a mask."""
    values, counts = kernels.rle_encode(
        np.ascontiguousarray(mask.bits.reshape(-1))
    )
    lines = [f"{mask.width} {mask.height}"]
    lines.extend(f"{int(v)} {int(c)}" for v, c in zip(values, counts))
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("\n".join(lines) + "\n")


def write_mask_pgm(mask: BinaryMask, path) -> None:
    """Write the mask as a binary PGM with foreground bytes set to 255."""
    header = f"P5\n{mask.width} {mask.height}\n255\n".encode("ascii")
    raster = (mask.bits.reshape(-1) * np.uint8(255)).tobytes()
    with open(path, "wb") as handle:
        handle.write(header + raster)
