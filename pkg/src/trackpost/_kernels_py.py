"""Pure NumPy kernels for the per-frame hot loops.

Reference implementation and the fallback used when the compiled module
(trackpost._ckernels) is not built.  The two backends must stay bit
identical: every floating point operation here is written in the same
order as its compiled twin, sums are sequential (cumsum, never pairwise
reduction), and all comparisons use the same strictness.
"""

from __future__ import annotations

import numpy as np


def sequential_sum(values: np.ndarray) -> float:
    """Left-to-right sum, matching a plain accumulation loop."""
    if values.size == 0:
        return 0.0
    return float(np.cumsum(values)[-1])


def ratio_deltas(xywh: np.ndarray, present: np.ndarray) -> np.ndarray:
    """Percent change of the w/h ratio between consecutive frames.

    Absent frames inherit the nearest earlier present ratio (leading gaps
    inherit the first present ratio), so deltas inside a gap are exactly
    zero and the step onto the next present frame compares the two nearest
    present boxes.  Returns a length n-1 array; all-absent input gives all
    zeros.
    """
    n = xywh.shape[0]
    if n < 2:
        return np.zeros(0, dtype=np.float64)
    pres = present != 0
    if not pres.any():
        return np.zeros(n - 1, dtype=np.float64)
    ratios = np.empty(n, dtype=np.float64)
    ratios[pres] = xywh[pres, 2] / xywh[pres, 3]
    idx = np.where(pres, np.arange(n), -1)
    np.maximum.accumulate(idx, out=idx)
    idx[idx < 0] = int(np.argmax(pres))
    filled = ratios[idx]
    prev = filled[:-1]
    return np.abs((filled[1:] - prev) / prev) * 100.0


def iou_xywh(ax, ay, aw, ah, bx, by, bw, bh) -> float:
    """Intersection over union of two boxes in continuous geometry."""
    left = ax if ax > bx else bx
    top = ay if ay > by else by
    right = min(ax + aw, bx + bw)
    bottom = min(ay + ah, by + bh)
    iw = right - left
    if iw < 0.0:
        iw = 0.0
    ih = bottom - top
    if ih < 0.0:
        ih = 0.0
    inter = iw * ih
    union = aw * ah + bw * bh - inter
    value = inter / union
    return 1.0 if value > 1.0 else value


def overlap_values(pred_xywh, pred_present, gt_xywh, gt_present) -> np.ndarray:
    """Per-frame overlap; 0 whenever either side has no box."""
    n = pred_xywh.shape[0]
    out = np.zeros(n, dtype=np.float64)
    both = (pred_present != 0) & (gt_present != 0)
    if not both.any():
        return out
    p = pred_xywh[both]
    g = gt_xywh[both]
    left = np.maximum(p[:, 0], g[:, 0])
    top = np.maximum(p[:, 1], g[:, 1])
    right = np.minimum(p[:, 0] + p[:, 2], g[:, 0] + g[:, 2])
    bottom = np.minimum(p[:, 1] + p[:, 3], g[:, 1] + g[:, 3])
    iw = np.maximum(right - left, 0.0)
    ih = np.maximum(bottom - top, 0.0)
    inter = iw * ih
    union = p[:, 2] * p[:, 3] + g[:, 2] * g[:, 3] - inter
    values = inter / union
    np.minimum(values, 1.0, out=values)
    out[both] = values
    return out


def success_rates(values: np.ndarray, thresholds: np.ndarray) -> np.ndarray:
    """Fraction of values strictly above each threshold."""
    counts = (values[None, :] > thresholds[:, None]).sum(axis=1)
    return counts / float(values.shape[0])


def fill_linear(xywh: np.ndarray, present: np.ndarray, a: int, b: int) -> None:
    """Replace frames strictly between a and b by the linear blend of the
    boxes at a and b.  Writes in place and marks the frames present."""
    steps = np.arange(a + 1, b, dtype=np.int64)
    frac = (steps - a) / float(b - a)
    xywh[a + 1:b] = xywh[a] + frac[:, None] * (xywh[b] - xywh[a])
    present[a + 1:b] = 1


def hold_span(xywh: np.ndarray, present: np.ndarray, anchor: int, last: int) -> None:
    """Copy the box at anchor into every frame anchor+1..last inclusive."""
    xywh[anchor + 1:last + 1] = xywh[anchor]
    present[anchor + 1:last + 1] = 1


def mask_extremes(bits: np.ndarray):
    """Foreground extent of a 2-D bitmap.

    Returns (min_col, min_row, max_col, max_row) or None for an empty mask.
    """
    rows = bits.any(axis=1)
    if not rows.any():
        return None
    cols = bits.any(axis=0)
    min_row = int(np.argmax(rows))
    max_row = bits.shape[0] - 1 - int(np.argmax(rows[::-1]))
    min_col = int(np.argmax(cols))
    max_col = bits.shape[1] - 1 - int(np.argmax(cols[::-1]))
    return min_col, min_row, max_col, max_row


def rle_decode(values: np.ndarray, counts: np.ndarray, expected: int) -> np.ndarray:
    """Expand run-length pairs into a flat uint8 bitmap of length expected.

    The caller validates that counts sum to expected.
    """
    return np.ascontiguousarray(np.repeat(values.astype(np.uint8), counts))


def rle_encode(bits: np.ndarray):
    """Collapse a flat uint8 bitmap into maximal runs: (values, counts)."""
    n = bits.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    change = np.nonzero(bits[1:] != bits[:-1])[0]
    starts = np.concatenate(([0], change + 1))
    ends = np.concatenate((change, [n - 1]))
    return bits[starts].astype(np.int64), (ends - starts + 1).astype(np.int64)
