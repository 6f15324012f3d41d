"""On-disk formats: bbox sequence files and dataset manifests.

bbox sequence file, one line per frame, in the pass's processing order:

    x,y,w,h            one box, decimal values, '.' decimal separator
    (empty line)       absent frame: no prediction for that frame
    nan,nan,nan,nan    accepted on input as absent; never written

Canonical writes use the shortest decimal form that round-trips (repr with
a trailing '.0' trimmed), LF line endings, and empty lines for absent
frames.  Parsing also accepts CRLF and surrounding whitespace.  Values
must be finite and box sizes strictly positive.

Dataset manifest, a line oriented key/value file:

    name: <dataset label>

    [sequence]
    id: seq_000
    frames: 120
    modality: rgb
    groundtruth: gt/seq_000.txt
    init_box: 12,34,56,78
    frames_dir: frames/seq_000
    result_order: processing

'#' starts a full-line comment; blank lines are ignored.  Every
'[sequence]' header opens a new sequence block.  frames_dir is optional
(only needed to drive an external tracker); result_order says how stored
backward result files are ordered ('processing' or 'video') and defaults
to processing.  Relative paths are resolved against the manifest's
directory.  Canonical writes emit the keys in the order above and include
result_order explicitly.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DomainError, InputFormatError
from .geometry import BBox
from .tracklet import Tracklet

MODALITIES = ("rgb", "infrared", "depth")
RESULT_ORDERS = ("processing", "video")

_ID_PATTERN = re.compile(r"^[A-Za-z0-9_.-]+$")


def format_float(value: float) -> str:
    """Shortest decimal form that parses back to exactly the same double."""
    value = float(value)
    if not math.isfinite(value):
        raise DomainError(f"cannot serialize non-finite value {value!r}")
    text = repr(value)
    return text[:-2] if text.endswith(".0") else text


def format_box(box: BBox) -> str:
    return (
        f"{format_float(box.x)},{format_float(box.y)},"
        f"{format_float(box.w)},{format_float(box.h)}"
    )


def parse_box_line(line: str):
    """One bbox file line to a BBox, or None for an absent frame."""
    stripped = line.strip()
    if not stripped:
        return None
    parts = stripped.split(",")
    if len(parts) != 4:
        raise InputFormatError(f"expected 'x,y,w,h', got {stripped!r}")
    try:
        values = [float(part.strip()) for part in parts]
    except ValueError:
        raise InputFormatError(f"not a number in {stripped!r}") from None
    nans = [math.isnan(v) for v in values]
    if all(nans):
        return None
    if any(nans):
        raise InputFormatError(f"mixed nan fields in {stripped!r}")
    if any(math.isinf(v) for v in values):
        raise InputFormatError(f"non-finite value in {stripped!r}")
    if values[2] <= 0 or values[3] <= 0:
        raise InputFormatError(
            f"box size must be positive, got {values[2]}x{values[3]}"
        )
    return BBox(*values)


def parse_bbox_file(path) -> Tracklet:
    """Read a bbox sequence file; the sequence id is the file stem."""
    path = Path(path)
    if not path.is_file():
        raise InputFormatError(f"bbox file not found: {path}")
    try:
        data = path.read_bytes().decode("utf-8")
    except UnicodeDecodeError as exc:
        raise InputFormatError(f"{path}: not valid utf-8: {exc}") from exc
    if data == "":
        return Tracklet([], sequence_id=path.stem)
    body = data[:-1] if data.endswith("\n") else data
    boxes = []
    for lineno, line in enumerate(body.split("\n"), 1):
        try:
            boxes.append(parse_box_line(line))
        except InputFormatError as exc:
            raise InputFormatError(f"{path}:{lineno}: {exc}") from None
    return Tracklet(boxes, sequence_id=path.stem)


def write_bbox_file(track: Tracklet, path) -> None:
    """Write the canonical form; parse_bbox_file inverts it exactly."""
    lines = []
    for box in track:
        lines.append("" if box is None else format_box(box))
    text = "".join(line + "\n" for line in lines)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)


@dataclass(frozen=True)
class SequenceManifest:
    """One sequence entry of a dataset manifest."""

    sequence_id: str
    frame_count: int
    modality: str
    groundtruth_path: str
    init_box: BBox
    frames_dir: str | None = None
    result_order: str = "processing"

    def __post_init__(self):
        if not _ID_PATTERN.match(self.sequence_id):
            raise DomainError(
                f"sequence id {self.sequence_id!r} may only use letters, "
                "digits, '_', '.', and '-'"
            )
        if self.frame_count < 1:
            raise DomainError(
                f"sequence {self.sequence_id}: frame count must be positive"
            )
        if self.modality not in MODALITIES:
            raise DomainError(
                f"sequence {self.sequence_id}: unknown modality "
                f"{self.modality!r}, expected one of {MODALITIES}"
            )
        if self.result_order not in RESULT_ORDERS:
            raise DomainError(
                f"sequence {self.sequence_id}: result_order must be one of "
                f"{RESULT_ORDERS}"
            )
        if self.init_box.w <= 0 or self.init_box.h <= 0:
            raise DomainError(
                f"sequence {self.sequence_id}: init box needs positive size"
            )


@dataclass(frozen=True)
class DatasetManifest:
    """A named collection of sequences.  base_dir anchors relative paths
    and is not part of the manifest's value (ignored by ==)."""

    name: str
    sequences: tuple
    base_dir: Path | None = field(default=None, compare=False)

    def __post_init__(self):
        seen = set()
        for seq in self.sequences:
            if seq.sequence_id in seen:
                raise DomainError(f"duplicate sequence id {seq.sequence_id!r}")
            seen.add(seq.sequence_id)

    def resolve(self, relative) -> Path:
        """Resolve a manifest-relative path against the manifest location."""
        candidate = Path(relative)
        if candidate.is_absolute() or self.base_dir is None:
            return candidate
        return self.base_dir / candidate


_SEQUENCE_KEYS = (
    "id", "frames", "modality", "groundtruth", "init_box",
    "frames_dir", "result_order",
)
_REQUIRED_KEYS = ("id", "frames", "modality", "groundtruth", "init_box")


def parse_manifest(path, check_paths: bool = True) -> DatasetManifest:
    """Read a dataset manifest.

    check_paths verifies that every referenced ground truth file (and
    frames directory, when given) exists, naming the offending sequence.
    """
    path = Path(path)
    if not path.is_file():
        raise InputFormatError(f"manifest not found: {path}")
    try:
        text = path.read_bytes().decode("utf-8")
    except UnicodeDecodeError as exc:
        raise InputFormatError(f"{path}: not valid utf-8: {exc}") from exc

    name = None
    blocks = []
    current = None

    for lineno, raw in enumerate(text.split("\n"), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line == "[sequence]":
            current = {}
            blocks.append((lineno, current))
            continue
        if ":" not in line:
            raise InputFormatError(
                f"{path}:{lineno}: expected 'key: value' or '[sequence]'"
            )
        key, _, value = line.partition(":")
        key = key.strip()
        value = value.strip()
        if current is None:
            if key != "name":
                raise InputFormatError(
                    f"{path}:{lineno}: unknown dataset key {key!r}"
                )
            if name is not None:
                raise InputFormatError(f"{path}:{lineno}: duplicate name")
            name = value
        else:
            if key not in _SEQUENCE_KEYS:
                raise InputFormatError(
                    f"{path}:{lineno}: unknown sequence key {key!r}"
                )
            if key in current:
                raise InputFormatError(f"{path}:{lineno}: duplicate key {key!r}")
            current[key] = (lineno, value)

    if name is None:
        raise InputFormatError(f"{path}: missing required key: name")

    sequences = []
    for block_line, block in blocks:
        for key in _REQUIRED_KEYS:
            if key not in block:
                raise InputFormatError(
                    f"{path}: sequence block at line {block_line} is missing "
                    f"required key {key!r}"
                )
        lineno, frames_text = block["frames"]
        try:
            frames = int(frames_text)
        except ValueError:
            raise InputFormatError(
                f"{path}:{lineno}: frames must be an integer, got {frames_text!r}"
            ) from None
        lineno, box_text = block["init_box"]
        try:
            init_box = parse_box_line(box_text)
        except InputFormatError as exc:
            raise InputFormatError(f"{path}:{lineno}: {exc}") from None
        if init_box is None:
            raise InputFormatError(f"{path}:{lineno}: init_box must be a box")
        try:
            sequences.append(SequenceManifest(
                sequence_id=block["id"][1],
                frame_count=frames,
                modality=block["modality"][1],
                groundtruth_path=block["groundtruth"][1],
                init_box=init_box,
                frames_dir=block["frames_dir"][1] if "frames_dir" in block else None,
                result_order=(
                    block["result_order"][1]
                    if "result_order" in block else "processing"
                ),
            ))
        except DomainError as exc:
            raise InputFormatError(
                f"{path}: sequence block at line {block_line}: {exc}"
            ) from None

    try:
        manifest = DatasetManifest(name, tuple(sequences), base_dir=path.parent)
    except DomainError as exc:
        raise InputFormatError(f"{path}: {exc}") from None

    if check_paths:
        for seq in manifest.sequences:
            gt = manifest.resolve(seq.groundtruth_path)
            if not gt.is_file():
                raise InputFormatError(
                    f"{path}: sequence {seq.sequence_id}: "
                    f"ground truth file not found: {gt}"
                )
            if seq.frames_dir is not None:
                frames_dir = manifest.resolve(seq.frames_dir)
                if not frames_dir.is_dir():
                    raise InputFormatError(
                        f"{path}: sequence {seq.sequence_id}: "
                        f"frames directory not found: {frames_dir}"
                    )
    return manifest


def write_manifest(manifest: DatasetManifest, path) -> None:
    """Write the canonical manifest form; parse_manifest inverts it."""
    lines = [f"name: {manifest.name}"]
    for seq in manifest.sequences:
        lines.append("")
        lines.append("[sequence]")
        lines.append(f"id: {seq.sequence_id}")
        lines.append(f"frames: {seq.frame_count}")
        lines.append(f"modality: {seq.modality}")
        lines.append(f"groundtruth: {seq.groundtruth_path}")
        lines.append(f"init_box: {format_box(seq.init_box)}")
        if seq.frames_dir is not None:
            lines.append(f"frames_dir: {seq.frames_dir}")
        lines.append(f"result_order: {seq.result_order}")
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("\n".join(lines) + "\n")
