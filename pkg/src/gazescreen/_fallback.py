"""Pure-Python implementations of the inner loops in ``_speedups.pyx``.

Both modules expose the same four functions with identical semantics; the
active one is picked in :mod:`gazescreen.kernels`.
"""
import math

import numpy as np


def _segment_ends(valid):
    n = len(valid)
    out = [0] * n
    end = n
    for i in range(n - 1, -1, -1):
        if not valid[i]:
            end = i
            out[i] = i
        else:
            out[i] = end
    return out


def idt_windows(t, x, y, valid, dispersion, min_duration):
    """Dispersion-threshold sweep over each run of valid samples.

    Returns an ``(k, 2)`` int64 array of inclusive ``[first, last]`` indices.
    """
    t = np.asarray(t, dtype=np.float64).tolist()
    x = np.asarray(x, dtype=np.float64).tolist()
    y = np.asarray(y, dtype=np.float64).tolist()
    valid = np.asarray(valid, dtype=bool).tolist()
    seg_end = _segment_ends(valid)
    n = len(t)
    out = []
    i = 0
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
        wx = x[i:j0 + 1]
        wy = y[i:j0 + 1]
        xmin, xmax, ymin, ymax = min(wx), max(wx), min(wy), max(wy)
        if (xmax - xmin) + (ymax - ymin) > dispersion:
            i += 1
            continue
        j = j0
        while j + 1 < end:
            k = j + 1
            nxmin, nxmax = min(xmin, x[k]), max(xmax, x[k])
            nymin, nymax = min(ymin, y[k]), max(ymax, y[k])
            if (nxmax - nxmin) + (nymax - nymin) > dispersion:
                break
            xmin, xmax, ymin, ymax = nxmin, nxmax, nymin, nymax
            j = k
        out.append((i, j))
        i = j + 1
    return np.array(out, dtype=np.int64).reshape(-1, 2)


def ivt_runs(t, x, y, valid, velocity, min_duration):
    """Velocity-threshold runs; a run's first sample borrows the next sample's speed."""
    t = np.asarray(t, dtype=np.float64).tolist()
    x = np.asarray(x, dtype=np.float64).tolist()
    y = np.asarray(y, dtype=np.float64).tolist()
    valid = np.asarray(valid, dtype=bool).tolist()
    seg_end = _segment_ends(valid)
    n = len(t)
    out = []
    i = 0
    while i < n:
        if not valid[i]:
            i += 1
            continue
        end = seg_end[i]
        if end - i >= 2:
            in_run = False
            run_start = i
            for k in range(i, end):
                a = k if k > i else i + 1
                v = math.sqrt((x[a] - x[a - 1]) ** 2 + (y[a] - y[a - 1]) ** 2) * 1000.0 / (t[a] - t[a - 1])
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


def dwell_times(t, codes, valid, tail, n_zones):
    """Forward-interval time per zone code; run-final valid samples get ``tail``."""
    t = np.asarray(t, dtype=np.float64)
    codes = np.asarray(codes, dtype=np.int64)
    valid = np.asarray(valid, dtype=bool)
    n = len(t)
    acc = np.zeros(n_zones, dtype=np.float64)
    if n == 0:
        return acc
    dt = np.full(n, tail, dtype=np.float64)
    if n > 1:
        both = valid[:-1] & valid[1:]
        dt[:-1] = np.where(both, t[1:] - t[:-1], tail)
    # sequential accumulation keeps the summation order of the compiled loop
    for c, d, v in zip(codes.tolist(), dt.tolist(), valid.tolist()):
        if v:
            acc[c] += d
    return acc


def blur_separable(img, kernel):
    img = np.asarray(img, dtype=np.float64)
    kernel = np.asarray(kernel, dtype=np.float64)
    r = len(kernel) // 2
    h, w = img.shape
    tmp = np.zeros_like(img)
    for d in range(-r, r + 1):
        kv = kernel[d + r]
        if d >= 0:
            tmp[:, d:] += img[:, :w - d] * kv
        else:
            tmp[:, :w + d] += img[:, -d:] * kv
    out = np.zeros_like(img)
    for d in range(-r, r + 1):
        kv = kernel[d + r]
        if d >= 0:
            out[d:, :] += tmp[:h - d, :] * kv
        else:
            out[:h + d, :] += tmp[-d:, :] * kv
    return out
