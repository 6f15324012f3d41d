# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the per-frame hot loops.

Mirror of trackpost._kernels_py.  The two backends must stay bit identical;
keep every floating point operation in the same order as the NumPy file.
"""

from libc.math cimport fabs

import numpy as np


def sequential_sum(const double[::1] values):
    cdef Py_ssize_t i, n = values.shape[0]
    cdef double total = 0.0
    for i in range(n):
        total = total + values[i]
    return total


def ratio_deltas(const double[:, ::1] xywh, const unsigned char[::1] present):
    cdef Py_ssize_t n = xywh.shape[0]
    if n < 2:
        return np.zeros(0, dtype=np.float64)
    out = np.zeros(n - 1, dtype=np.float64)
    cdef double[::1] deltas = out
    cdef Py_ssize_t i, first = -1
    for i in range(n):
        if present[i]:
            first = i
            break
    if first < 0:
        return out
    ratios_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] ratios = ratios_arr
    cdef double first_ratio = xywh[first, 2] / xywh[first, 3]
    for i in range(n):
        if i < first:
            ratios[i] = first_ratio
        elif present[i]:
            ratios[i] = xywh[i, 2] / xywh[i, 3]
        else:
            ratios[i] = ratios[i - 1]
    cdef double prev
    for i in range(1, n):
        prev = ratios[i - 1]
        deltas[i - 1] = fabs((ratios[i] - prev) / prev) * 100.0
    return out


def iou_xywh(double ax, double ay, double aw, double ah,
             double bx, double by, double bw, double bh):
    cdef double left = ax if ax > bx else bx
    cdef double top = ay if ay > by else by
    cdef double r1 = ax + aw
    cdef double r2 = bx + bw
    cdef double right = r1 if r1 < r2 else r2
    cdef double b1 = ay + ah
    cdef double b2 = by + bh
    cdef double bottom = b1 if b1 < b2 else b2
    cdef double iw = right - left
    if iw < 0.0:
        iw = 0.0
    cdef double ih = bottom - top
    if ih < 0.0:
        ih = 0.0
    cdef double inter = iw * ih
    cdef double union_ = aw * ah + bw * bh - inter
    cdef double value = inter / union_
    return 1.0 if value > 1.0 else value


def overlap_values(const double[:, ::1] pred_xywh, const unsigned char[::1] pred_present,
                   const double[:, ::1] gt_xywh, const unsigned char[::1] gt_present):
    cdef Py_ssize_t n = pred_xywh.shape[0]
    result = np.zeros(n, dtype=np.float64)
    cdef double[::1] out = result
    cdef Py_ssize_t i
    cdef double left, top, right, bottom, iw, ih, inter, union_, value, e1, e2
    for i in range(n):
        if not (pred_present[i] and gt_present[i]):
            continue
        left = pred_xywh[i, 0] if pred_xywh[i, 0] > gt_xywh[i, 0] else gt_xywh[i, 0]
        top = pred_xywh[i, 1] if pred_xywh[i, 1] > gt_xywh[i, 1] else gt_xywh[i, 1]
        e1 = pred_xywh[i, 0] + pred_xywh[i, 2]
        e2 = gt_xywh[i, 0] + gt_xywh[i, 2]
        right = e1 if e1 < e2 else e2
        e1 = pred_xywh[i, 1] + pred_xywh[i, 3]
        e2 = gt_xywh[i, 1] + gt_xywh[i, 3]
        bottom = e1 if e1 < e2 else e2
        iw = right - left
        if iw < 0.0:
            iw = 0.0
        ih = bottom - top
        if ih < 0.0:
            ih = 0.0
        inter = iw * ih
        union_ = pred_xywh[i, 2] * pred_xywh[i, 3] + gt_xywh[i, 2] * gt_xywh[i, 3] - inter
        value = inter / union_
        if value > 1.0:
            value = 1.0
        out[i] = value
    return result


def success_rates(const double[::1] values, const double[::1] thresholds):
    cdef Py_ssize_t n = values.shape[0]
    cdef Py_ssize_t m = thresholds.shape[0]
    result = np.empty(m, dtype=np.float64)
    cdef double[::1] out = result
    cdef Py_ssize_t i, j
    cdef long long count
    cdef double theta
    for j in range(m):
        theta = thresholds[j]
        count = 0
        for i in range(n):
            if values[i] > theta:
                count = count + 1
        out[j] = count / <double>n
    return result


def fill_linear(double[:, ::1] xywh, unsigned char[::1] present,
                Py_ssize_t a, Py_ssize_t b):
    cdef double denom = <double>(b - a)
    cdef Py_ssize_t i, c
    cdef double frac
    for i in range(a + 1, b):
        frac = <double>(i - a) / denom
        for c in range(4):
            xywh[i, c] = xywh[a, c] + frac * (xywh[b, c] - xywh[a, c])
        present[i] = 1


def hold_span(double[:, ::1] xywh, unsigned char[::1] present,
              Py_ssize_t anchor, Py_ssize_t last):
    cdef Py_ssize_t i, c
    for i in range(anchor + 1, last + 1):
        for c in range(4):
            xywh[i, c] = xywh[anchor, c]
        present[i] = 1


def mask_extremes(const unsigned char[:, ::1] bits):
    cdef Py_ssize_t h = bits.shape[0]
    cdef Py_ssize_t w = bits.shape[1]
    cdef Py_ssize_t min_row = -1, max_row = -1
    cdef Py_ssize_t min_col = w, max_col = -1
    cdef Py_ssize_t r, c
    for r in range(h):
        for c in range(w):
            if bits[r, c]:
                if min_row < 0:
                    min_row = r
                max_row = r
                if c < min_col:
                    min_col = c
                if c > max_col:
                    max_col = c
    if min_row < 0:
        return None
    return min_col, min_row, max_col, max_row


def rle_decode(const long long[::1] values, const long long[::1] counts, Py_ssize_t expected):
    result = np.empty(expected, dtype=np.uint8)
    cdef unsigned char[::1] out = result
    cdef Py_ssize_t i, j, pos = 0
    for i in range(values.shape[0]):
        for j in range(counts[i]):
            out[pos] = <unsigned char>values[i]
            pos = pos + 1
    return result


def rle_encode(const unsigned char[::1] bits):
    cdef Py_ssize_t n = bits.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    cdef Py_ssize_t runs = 1
    cdef Py_ssize_t i
    for i in range(1, n):
        if bits[i] != bits[i - 1]:
            runs = runs + 1
    values_arr = np.empty(runs, dtype=np.int64)
    counts_arr = np.empty(runs, dtype=np.int64)
    cdef long long[::1] values = values_arr
    cdef long long[::1] counts = counts_arr
    cdef Py_ssize_t run = 0
    cdef long long count = 1
    for i in range(1, n):
        if bits[i] != bits[i - 1]:
            values[run] = bits[i - 1]
            counts[run] = count
            run = run + 1
            count = 1
        else:
            count = count + 1
    values[run] = bits[n - 1]
    counts[run] = count
    return values_arr, counts_arr
