"""Combining a forward and a backward tracking pass over one sequence.

A backward pass processes the video last frame first, starting from the
forward pass's final box.  Its output file is in processing order, so it
must be reversed (reverse_align) before it can be compared frame by frame
with the forward pass.

Two combination policies:

  sequence_select      whole-sequence winner: the pass with the lower
                       stability score (mean aspect-ratio jump); ties go
                       to the forward pass
  per_frame_agreement  frame-wise: where both passes agree (overlap at
                       least agreement_iou) keep the forward box, where
                       they disagree take the frame from the pass with the
                       lower score, and where only one pass has a box take
                       that box

Frame 0 of the result is always the forward pass's frame 0 box: that box
is the given starting point and outranks anything a backward pass claims.
"""

from __future__ import annotations

import subprocess
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _backend as kernels
from .errors import DomainError, InputFormatError, TrackerDriverError
from .geometry import BBox
from .tracklet import Tracklet, stability_score

FUSION_MODES = ("sequence_select", "per_frame_agreement")
DIRECTIONS = ("forward", "backward")


@dataclass(frozen=True)
class FusionPolicy:
    mode: str = "sequence_select"
    agreement_iou: float = 0.5

    def __post_init__(self):
        if self.mode not in FUSION_MODES:
            raise DomainError(
                f"unknown fusion mode {self.mode!r}, expected one of {FUSION_MODES}"
            )
        if not 0.0 <= self.agreement_iou <= 1.0:
            raise DomainError(
                f"agreement_iou must be within [0, 1], got {self.agreement_iou}"
            )


@dataclass(frozen=True)
class PassScores:
    """Stability scores of the inputs and of the fused result."""

    forward: float
    backward: float
    fused: float


@dataclass(frozen=True)
class FusionOutcome:
    """chosen is 'forward' or 'backward' under sequence_select, and a
    per-frame tuple of those labels under per_frame_agreement."""

    track: Tracklet
    chosen: object
    scores: PassScores


def reverse_align(track: Tracklet) -> Tracklet:
    """Flip a processing-order tracklet into video frame order."""
    return Tracklet.from_arrays(
        track.xywh[::-1], track._present[::-1], track.sequence_id
    )


def backward_init_box(track: Tracklet) -> BBox:
    """Starting box for a backward pass: the forward pass's last reported
    box, falling back over trailing absent frames."""
    index = track.last_present_index()
    if index is None:
        raise DomainError("cannot start a backward pass: track has no boxes")
    return track[index]


def fuse(forward: Tracklet, backward: Tracklet,
         policy: FusionPolicy | None = None) -> FusionOutcome:
    """Combine two aligned passes of the same sequence into one tracklet."""
    if policy is None:
        policy = FusionPolicy()
    n = len(forward)
    if n != len(backward):
        raise DomainError(
            f"pass lengths differ: forward {n}, backward {len(backward)}"
        )
    if n == 0:
        raise DomainError("cannot fuse empty tracklets")
    if forward[0] is None:
        raise DomainError("forward pass must have a box on frame 0")

    score_forward = stability_score(forward)
    score_backward = stability_score(backward)

    if policy.mode == "sequence_select":
        use_backward = score_backward < score_forward
        source = backward if use_backward else forward
        xywh = source.xywh.copy()
        present = source._present.copy()
        xywh[0] = forward.xywh[0]
        present[0] = 1
        chosen = "backward" if use_backward else "forward"
    else:
        fp = forward.present
        bp = backward.present
        overlaps = kernels.overlap_values(
            forward.xywh, forward._present, backward.xywh, backward._present
        )
        both = fp & bp
        agree = both & (overlaps >= policy.agreement_iou)
        forward_wins = score_forward <= score_backward
        disagree = both & ~agree
        take_forward = agree | (fp & ~bp)
        take_backward = bp & ~fp
        if forward_wins:
            take_forward = take_forward | disagree
        else:
            take_backward = take_backward | disagree
        xywh = np.full((n, 4), np.nan, dtype=np.float64)
        present = np.zeros(n, dtype=np.uint8)
        xywh[take_forward] = forward.xywh[take_forward]
        xywh[take_backward] = backward.xywh[take_backward]
        present[take_forward | take_backward] = 1
        labels = np.where(take_backward, "backward", "forward")
        xywh[0] = forward.xywh[0]
        present[0] = 1
        labels[0] = "forward"
        chosen = tuple(labels.tolist())

    fused = Tracklet._wrap(xywh, present, forward.sequence_id)
    scores = PassScores(score_forward, score_backward, stability_score(fused))
    return FusionOutcome(fused, chosen, scores)


def run_tracker_command(command, frames_dir, init_box_path, output_path,
                        direction: str) -> Tracklet:
    """Invoke an external tracker and parse its output.

    The tracker contract: the command is executed with four extra
    arguments, in order

        <frames-dir> <init-box-file> <output-file> <direction>

    where direction is 'forward' or 'backward'.  It must write a bbox
    sequence file (one line per frame, in processing order) to the output
    file and exit 0.  A nonzero exit or unusable output raises
    TrackerDriverError; the caller decides which sequence to charge it to.
    """
    from .formats import parse_bbox_file

    if direction not in DIRECTIONS:
        raise DomainError(f"direction must be one of {DIRECTIONS}, got {direction!r}")
    argv = [str(part) for part in command]
    if not argv:
        raise DomainError("tracker command must not be empty")
    argv += [str(frames_dir), str(init_box_path), str(output_path), direction]
    try:
        proc = subprocess.run(argv, capture_output=True, text=True)
    except OSError as exc:
        raise TrackerDriverError(f"tracker command failed to start: {exc}") from exc
    if proc.returncode != 0:
        tail = (proc.stderr or "").strip().splitlines()
        detail = tail[-1] if tail else "no diagnostic output"
        raise TrackerDriverError(
            f"tracker exited with status {proc.returncode}: {detail}"
        )
    if not Path(output_path).is_file():
        raise TrackerDriverError(f"tracker wrote no output file at {output_path}")
    try:
        return parse_bbox_file(output_path)
    except InputFormatError as exc:
        raise TrackerDriverError(f"tracker output unusable: {exc}") from exc
