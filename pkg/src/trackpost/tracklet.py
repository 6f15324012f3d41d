"""Tracklet container and aspect-ratio jump statistics.

A tracklet is the per-frame output of one tracking pass over one sequence:
one optional box per frame, frame 0 being the first frame in whatever
order the pass processed the video.  Absent entries mean the tracker
reported no target for that frame.

The jump statistic for frame i is the percent change of the box aspect
ratio r = w/h relative to the previous frame:

    delta[i] = |(r_i - r_{i-1}) / r_{i-1}| * 100

Gap policy: absent frames inherit the nearest earlier present ratio, so a
delta across a gap compares the two nearest present boxes and is charged
to the later frame; deltas inside the gap are zero.  strict=True rejects
gaps instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _backend as kernels
from .errors import DomainError
from .geometry import BBox


class Tracklet:
    """Immutable sequence of optional boxes for one video sequence."""

    __slots__ = ("_xywh", "_present", "sequence_id")

    def __init__(self, boxes, sequence_id: str = ""):
        entries = list(boxes)
        n = len(entries)
        xywh = np.full((n, 4), np.nan, dtype=np.float64)
        present = np.zeros(n, dtype=np.uint8)
        for i, box in enumerate(entries):
            if box is None:
                continue
            if not isinstance(box, BBox):
                box = BBox(*box)
            xywh[i, 0] = box.x
            xywh[i, 1] = box.y
            xywh[i, 2] = box.w
            xywh[i, 3] = box.h
            present[i] = 1
        self._adopt(xywh, present, sequence_id)

    @classmethod
    def from_arrays(cls, xywh, present, sequence_id: str = "") -> "Tracklet":
        """Build from an (n, 4) float array and an n-length presence array.

        The arrays are copied; coordinates of absent frames are discarded.
        Present frames must hold finite values.
        """
        xywh = np.array(xywh, dtype=np.float64, copy=True)
        present = np.asarray(present)
        if xywh.ndim != 2 or xywh.shape[1] != 4:
            raise DomainError(f"expected an (n, 4) box array, got {xywh.shape}")
        if present.shape != (xywh.shape[0],):
            raise DomainError("presence array length does not match box array")
        mask = present != 0
        if mask.any() and not np.isfinite(xywh[mask]).all():
            raise DomainError("present frames must have finite coordinates")
        xywh[~mask] = np.nan
        track = cls.__new__(cls)
        track._adopt(xywh, mask.astype(np.uint8), sequence_id)
        return track

    @classmethod
    def _wrap(cls, xywh: np.ndarray, present: np.ndarray, sequence_id: str) -> "Tracklet":
        # internal fast path: takes ownership of freshly built arrays
        track = cls.__new__(cls)
        track._adopt(xywh, present, sequence_id)
        return track

    def _adopt(self, xywh: np.ndarray, present: np.ndarray, sequence_id: str) -> None:
        xywh.flags.writeable = False
        present.flags.writeable = False
        self._xywh = xywh
        self._present = present
        self.sequence_id = sequence_id

    @property
    def xywh(self) -> np.ndarray:
        """Read-only (n, 4) float64 array; absent rows are NaN."""
        return self._xywh

    @property
    def present(self) -> np.ndarray:
        """Read-only boolean presence array."""
        return self._present.view(bool)

    def __len__(self) -> int:
        return self._xywh.shape[0]

    def __getitem__(self, index: int):
        n = len(self)
        if index < 0:
            index += n
        if not 0 <= index < n:
            raise IndexError(f"frame {index} out of range for {n} frames")
        if not self._present[index]:
            return None
        row = self._xywh[index]
        return BBox(row[0], row[1], row[2], row[3])

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def __eq__(self, other):
        if not isinstance(other, Tracklet):
            return NotImplemented
        return (
            len(self) == len(other)
            and np.array_equal(self._present, other._present)
            and np.array_equal(self._xywh, other._xywh, equal_nan=True)
        )

    __hash__ = None

    def __repr__(self):
        n = len(self)
        have = int(self._present.sum())
        sid = f" {self.sequence_id!r}" if self.sequence_id else ""
        return f"Tracklet({n} frames, {have} boxes{sid})"

    def to_boxes(self) -> list:
        """Plain list of BBox or None, one entry per frame."""
        return list(self)

    def last_present_index(self):
        """Index of the last frame with a box, or None if there is none."""
        idx = np.nonzero(self._present)[0]
        if idx.size == 0:
            return None
        return int(idx[-1])


@dataclass(frozen=True)
class RatioDeltaSeries:
    """Aspect-ratio jump sizes for one tracklet.

    deltas[j] is the percent ratio change from frame j to frame j+1, so a
    flagged delta at position j points at frame j+1.  mean_threshold is
    the arithmetic mean of the deltas (0 for fewer than 2 frames) and is
    the base value the smoother scales by alpha and beta.
    """

    deltas: np.ndarray
    mean_threshold: float
    frame_count: int = field(default=0)

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.deltas, dtype=np.float64))
        arr.flags.writeable = False
        object.__setattr__(self, "deltas", arr)


def ratio_deltas(track: Tracklet, strict: bool = False) -> RatioDeltaSeries:
    """Jump sizes of the aspect ratio across the whole tracklet."""
    n = len(track)
    pres = track.present
    if strict and not pres.all():
        raise DomainError("tracklet has absent frames (strict mode)")
    if n < 2:
        return RatioDeltaSeries(np.zeros(0), 0.0, n)
    if pres.any():
        sizes = track.xywh[pres, 2:4]
        if (sizes <= 0).any():
            raise DomainError("aspect ratio requires positive box width and height")
    deltas = kernels.ratio_deltas(track.xywh, track._present)
    mean = kernels.sequential_sum(deltas) / deltas.size
    return RatioDeltaSeries(deltas, float(mean), n)


def stability_score(track: Tracklet) -> float:
    """Mean aspect-ratio jump of a pass; lower means steadier output."""
    if len(track) < 2:
        return 0.0
    return ratio_deltas(track).mean_threshold
