# cython: language_level=3
"""Compiled inner loops.  Semantics are defined by gazescreen._fallback."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


cdef Py_ssize_t[:] _segment_ends(const unsigned char[:] valid):
    # seg_end[i] = one past the last index of the valid run containing i
    cdef Py_ssize_t n = valid.shape[0]
    cdef Py_ssize_t[:] out = np.empty(n, dtype=np.intp)
    cdef Py_ssize_t i, end = n
    for i in range(n - 1, -1, -1):
        if not valid[i]:
            end = i
            out[i] = i
        else:
            out[i] = end
    return out


def idt_windows(const double[:] t, const double[:] x, const double[:] y,
                const unsigned char[:] valid, double dispersion, double min_duration):
    cdef Py_ssize_t n = t.shape[0]
    cdef Py_ssize_t[:] seg_end = _segment_ends(valid)
    cdef Py_ssize_t i = 0, j, j0, k, end
    cdef double xmin, xmax, ymin, ymax
    out = []
    while i < n:
        if not valid[i]:
            i += 1
            continue
        end = seg_end[i]
        j0 = i
        while j0 < end and t[j0] - t[i] < min_duration:
            j0 += 1
        if j0 >= end:
            i = end
            continue
        xmin = xmax = x[i]
        ymin = ymax = y[i]
        for k in range(i + 1, j0 + 1):
            if x[k] < xmin: xmin = x[k]
            if x[k] > xmax: xmax = x[k]
            if y[k] < ymin: ymin = y[k]
            if y[k] > ymax: ymax = y[k]
        if (xmax - xmin) + (ymax - ymin) > dispersion:
            i += 1
            continue
        j = j0
        while j + 1 < end:
            k = j + 1
            if ((max(xmax, x[k]) - min(xmin, x[k]))
                    + (max(ymax, y[k]) - min(ymin, y[k]))) > dispersion:
                break
            if x[k] < xmin: xmin = x[k]
            if x[k] > xmax: xmax = x[k]
            if y[k] < ymin: ymin = y[k]
            if y[k] > ymax: ymax = y[k]
            j = k
        out.append((i, j))
        i = j + 1
    return np.array(out, dtype=np.int64).reshape(-1, 2)


def ivt_runs(const double[:] t, const double[:] x, const double[:] y,
             const unsigned char[:] valid, double velocity, double min_duration):
    cdef Py_ssize_t n = t.shape[0]
    cdef Py_ssize_t[:] seg_end = _segment_ends(valid)
    cdef Py_ssize_t i = 0, k, end, run_start
    cdef double dx, dy, v
    cdef bint slow, in_run
    out = []
    while i < n:
        if not valid[i]:
            i += 1
            continue
        end = seg_end[i]
        if end - i >= 2:
            in_run = False
            run_start = i
            for k in range(i, end):
                if k == i:
                    dx = x[i + 1] - x[i]
                    dy = y[i + 1] - y[i]
                    v = sqrt(dx * dx + dy * dy) * 1000.0 / (t[i + 1] - t[i])
                else:
                    dx = x[k] - x[k - 1]
                    dy = y[k] - y[k - 1]
                    v = sqrt(dx * dx + dy * dy) * 1000.0 / (t[k] - t[k - 1])
                slow = v < velocity
                if slow and not in_run:
                    in_run = True
                    run_start = k
                elif not slow and in_run:
                    in_run = False
                    if t[k - 1] - t[run_start] >= min_duration:
                        out.append((run_start, k - 1))
            if in_run and t[end - 1] - t[run_start] >= min_duration:
                out.append((run_start, end - 1))
        i = end
    return np.array(out, dtype=np.int64).reshape(-1, 2)


def dwell_times(const double[:] t, const long long[:] codes, const unsigned char[:] valid,
                double tail, Py_ssize_t n_zones):
    cdef Py_ssize_t n = t.shape[0]
    cdef Py_ssize_t i
    acc_arr = np.zeros(n_zones, dtype=np.float64)
    cdef double[:] acc = acc_arr
    for i in range(n):
        if not valid[i]:
            continue
        if i + 1 < n and valid[i + 1]:
            acc[codes[i]] += t[i + 1] - t[i]
        else:
            acc[codes[i]] += tail
    return acc_arr


def blur_separable(const double[:, :] img, const double[:] kernel):
    """Zero-padded 'same' convolution with ``kernel`` along both axes."""
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1]
    cdef Py_ssize_t r = kernel.shape[0] // 2
    cdef Py_ssize_t i, j, k, lo, hi
    cdef double s, v
    tmp_arr = np.zeros((h, w), dtype=np.float64)
    out_arr = np.zeros((h, w), dtype=np.float64)
    cdef double[:, :] tmp = tmp_arr
    cdef double[:, :] out = out_arr
    # scatter nonzero pixels along rows; the histogram is mostly empty
    for i in range(h):
        for j in range(w):
            v = img[i, j]
            if v == 0.0:
                continue
            lo = j - r if j >= r else 0
            hi = j + r if j + r < w else w - 1
            for k in range(lo, hi + 1):
                tmp[i, k] += v * kernel[k - j + r]
    for j in range(w):
        for i in range(h):
            v = tmp[i, j]
            if v == 0.0:
                continue
            lo = i - r if i >= r else 0
            hi = i + r if i + r < h else h - 1
            for k in range(lo, hi + 1):
                out[k, j] += v * kernel[k - i + r]
    return out_arr
