"""Iterative smoothing of aspect-ratio anomalies in a tracklet.

Tracker failures such as partial detections or background absorption show
up as sudden jumps of the box aspect ratio.  The smoother repeats until
settled:

  1. compute the ratio jump series and its mean t
  2. stop if t is 0 or the largest jump is below beta * t (converged)
  3. flag every frame whose jump exceeds alpha * t
  4. treat present, unflagged frames as anchors and replace each flagged
     run by the linear blend of the anchors around it; a run at the end of
     the track has no right anchor, so the last anchor's box is held
     constant across it

Frame 0 is never flagged: its box is the given starting point.  Absent
frames between two anchors of a flagged run are filled as part of the
blend; gaps with no flagged frame are left alone.  Alpha controls how
aggressively frames are replaced, beta how strict the stopping rule is,
and max_iterations bounds the loop when it never settles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend as kernels
from .errors import DomainError
from .tracklet import RatioDeltaSeries, Tracklet

DEFAULT_ALPHA = 3.0
DEFAULT_BETA = 3.5
DEFAULT_MAX_ITERATIONS = 10


@dataclass(frozen=True)
class SmootherParams:
    """Tuning knobs for the smoother.  beta must not be below alpha,
    otherwise the stopping rule could keep flagging unfixable frames."""

    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA
    max_iterations: int = DEFAULT_MAX_ITERATIONS

    def __post_init__(self):
        if not self.alpha > 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")
        if self.beta < self.alpha:
            raise DomainError(
                f"beta ({self.beta}) must be at least alpha ({self.alpha})"
            )
        if self.max_iterations < 1:
            raise DomainError("max_iterations must be at least 1")


@dataclass(frozen=True)
class SmootherOutcome:
    """Result of one smoothing call.

    flagged_history holds the flagged frame indices of every applied pass,
    threshold_history the (mean jump, max jump) pair that drove each pass;
    both have exactly iterations_used entries.
    """

    track: Tracklet
    iterations_used: int
    converged: bool
    flagged_history: tuple
    threshold_history: tuple


def flag_frames(series: RatioDeltaSeries, alpha: float) -> set:
    """Frames whose ratio jump exceeds alpha times the series mean.

    Returned indices point at the later frame of each offending pair, so
    they fall in 1..n-1; frame 0 can never be flagged.
    """
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    mask = series.deltas > alpha * series.mean_threshold
    return set((np.nonzero(mask)[0] + 1).tolist())


def interpolate_section(track: Tracklet, a: int, b: int) -> Tracklet:
    """Linearly blend frames strictly between anchor frames a and b.

    Both anchors must carry boxes.  Frames a and b are returned unchanged;
    with b == a + 1 there is nothing to fill and the track is returned as
    is.  Absent frames inside the span become present.
    """
    n = len(track)
    if not 0 <= a < n or not 0 <= b < n:
        raise DomainError(f"anchors ({a}, {b}) out of range for {n} frames")
    if b <= a:
        raise DomainError(f"section end {b} must be after start {a}")
    if track[a] is None or track[b] is None:
        raise DomainError("both anchor frames must have boxes")
    if b - a < 2:
        return track
    xywh = track.xywh.copy()
    present = track._present.copy()
    kernels.fill_linear(xywh, present, a, b)
    return Tracklet._wrap(xywh, present, track.sequence_id)


def smooth_tracklet(track: Tracklet, params: SmootherParams | None = None) -> SmootherOutcome:
    """Run the smoother until convergence or max_iterations passes.

    Requires a box on frame 0.  Present frames never flagged by any pass
    are returned bit for bit unchanged.  When no anchor beyond frame 0
    survives the flagging there is nothing to interpolate against, so the
    track is returned as is with converged False.
    """
    if params is None:
        params = SmootherParams()
    n = len(track)
    if n < 2:
        return SmootherOutcome(track, 0, True, (), ())
    if track[0] is None:
        raise DomainError("smoothing requires a box on frame 0")
    pres = track.present
    if (track.xywh[pres, 2:4] <= 0).any():
        raise DomainError("smoothing requires positive box sizes")

    xywh = track.xywh.copy()
    present = track._present.copy()
    flagged_history = []
    threshold_history = []
    iterations = 0
    converged = False

    while True:
        deltas = kernels.ratio_deltas(xywh, present)
        mean_delta = kernels.sequential_sum(deltas) / deltas.size
        max_delta = float(deltas.max())
        if mean_delta == 0.0 or max_delta < params.beta * mean_delta:
            converged = True
            break
        if iterations >= params.max_iterations:
            break
        flagged = np.nonzero(deltas > params.alpha * mean_delta)[0] + 1
        if flagged.size == 0:
            break
        flags = np.zeros(n, dtype=bool)
        flags[flagged] = True
        anchors = np.nonzero((present != 0) & ~flags)[0]
        if anchors.size < 2:
            break

        # group flagged frames into runs; absent frames merge neighbouring
        # runs because they cannot anchor anything
        runs = np.split(flagged, np.nonzero(np.diff(flagged) > 1)[0] + 1)
        spans = set()
        tail_held = False
        for run in runs:
            start, end = int(run[0]), int(run[-1])
            left = int(anchors[np.searchsorted(anchors, start) - 1])
            right_pos = int(np.searchsorted(anchors, end, side="right"))
            if right_pos == anchors.size:
                if not tail_held:
                    kernels.hold_span(xywh, present, left, n - 1)
                    tail_held = True
            else:
                spans.add((left, int(anchors[right_pos])))
        for left, right in sorted(spans):
            kernels.fill_linear(xywh, present, left, right)

        flagged_history.append(tuple(int(i) for i in flagged))
        threshold_history.append((mean_delta, max_delta))
        iterations += 1

    smoothed = Tracklet._wrap(xywh, present, track.sequence_id)
    return SmootherOutcome(
        smoothed,
        iterations,
        converged,
        tuple(flagged_history),
        tuple(threshold_history),
    )
