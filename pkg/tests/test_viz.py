import re

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gazescreen.classifier import EpochRecord, LearningCurve
from gazescreen.core import Fixation, GazeRecording, ScreenGeometry
from gazescreen.errors import EmptyInput, EmptyRecording
from gazescreen.synth import default_aoi
from gazescreen.viz import (CURVES_HEADER, decode_pgm, emit_curves_csv, encode_pgm, fixation_radius, gaussian_kernel,
                            heatmap_array, pixel_of, read_curves_csv, render_heatmap, render_scanpath, scanpath_svg)

SMALL = ScreenGeometry(160, 90)


def test_single_point_peak():
    rec = GazeRecording(np.arange(10.0), [0.3] * 10, [0.6] * 10)
    img = heatmap_array(rec, SMALL, 3.0)
    col, row = pixel_of(0.3, 0.6, SMALL)
    assert img.shape == (90, 160) and img.dtype == np.uint8
    assert img[row, col] == 255 and np.unravel_index(np.argmax(img), img.shape) == (row, col)


def test_two_equal_clusters():
    rec = GazeRecording(np.arange(20.0), [0.25] * 10 + [0.75] * 10, [0.5] * 20)
    img = heatmap_array(rec, SMALL, 4.0).astype(int)
    (c1, r1), (c2, r2) = pixel_of(0.25, 0.5, SMALL), pixel_of(0.75, 0.5, SMALL)
    assert abs(img[r1, c1] - img[r2, c2]) <= 1 and max(img[r1, c1], img[r2, c2]) == 255
    assert img[r1, (c1 + c2) // 2] < 10


def test_blur_matches_direct_kernel_sum():
    rng = np.random.default_rng(0)
    n, sigma = 25, 2.5
    xs, ys = rng.uniform(0, 1, n), rng.uniform(0, 1, n)
    img = heatmap_array(GazeRecording(np.arange(float(n)), xs, ys), SMALL, sigma)
    k = gaussian_kernel(sigma)
    r = len(k) // 2
    ref = np.zeros((SMALL.height_px, SMALL.width_px))
    for x, y in zip(xs, ys):
        c, rr = pixel_of(x, y, SMALL)
        for dy in range(-r, r + 1):
            for dx in range(-r, r + 1):
                if 0 <= rr + dy < SMALL.height_px and 0 <= c + dx < SMALL.width_px:
                    ref[rr + dy, c + dx] += k[dy + r] * k[dx + r]
    want = np.rint(ref * 255 / ref.max()).astype(np.uint8)
    assert np.abs(img.astype(int) - want.astype(int)).max() <= 1


def test_invalid_samples_ignored_and_empty_rejected():
    rec = GazeRecording([0.0, 1.0], [0.2, 0.8], [0.2, 0.8], [True, False])
    img = heatmap_array(rec, SMALL, 2.0)
    c, r = pixel_of(0.8, 0.8, SMALL)
    assert img[r, c] == 0
    with pytest.raises(EmptyRecording):
        heatmap_array(GazeRecording([0.0], [0.5], [0.5], [False]), SMALL, 2.0)
    with pytest.raises(ValueError):
        heatmap_array(rec, SMALL, 0.0)


@given(st.integers(0, 2 ** 32 - 1), st.randoms())
def test_heatmap_ignores_sample_order(seed, rnd):
    rng = np.random.default_rng(seed)
    n = 40
    xs, ys = rng.uniform(0, 1, n), rng.uniform(0, 1, n)
    perm = list(range(n))
    rnd.shuffle(perm)
    a = heatmap_array(GazeRecording(np.arange(float(n)), xs, ys), SMALL, 3.0)
    b = heatmap_array(GazeRecording(np.arange(float(n)), xs[perm], ys[perm]), SMALL, 3.0)
    assert np.array_equal(a, b)


def test_pgm_round_trip_and_determinism(tmp_path):
    rec = GazeRecording(np.arange(50.0), np.linspace(0.1, 0.9, 50), np.linspace(0.2, 0.7, 50))
    render_heatmap(rec, SMALL, 3.0, tmp_path / "a.pgm")
    render_heatmap(rec, SMALL, 3.0, tmp_path / "b.pgm")
    data = (tmp_path / "a.pgm").read_bytes()
    assert data == (tmp_path / "b.pgm").read_bytes()
    assert data.startswith(b"P5\n160 90\n255\n")
    assert np.array_equal(decode_pgm(data), heatmap_array(rec, SMALL, 3.0))
    assert decode_pgm(encode_pgm(np.zeros((2, 3), np.uint8))).shape == (2, 3)


def _count(svg, cls):
    return len(re.findall(f'class="{cls}"', svg))


def test_empty_scanpath_has_only_outlines():
    aoi = default_aoi()
    svg = scanpath_svg([], aoi)
    assert _count(svg, "fixation") == 0 and _count(svg, "saccade") == 0
    assert _count(svg, "aoi") == sum(len(r.rects) for r in aoi.regions)


def test_single_fixation_radius():
    svg = scanpath_svg([Fixation(0.5, 0.25, 0.0, 200.0, 12)], default_aoi())
    m = re.search(r'<circle class="fixation" cx="([\d.]+)" cy="([\d.]+)" r="([\d.]+)"', svg)
    assert (float(m.group(1)), float(m.group(2)), float(m.group(3))) == (640.0, 180.0, 44.0)
    assert fixation_radius(100.0, 200.0) == 24.0


@given(st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1), st.floats(1, 900)), max_size=15))
def test_scanpath_element_counts(items):
    fixes = [Fixation(x, y, float(i), d, 2) for i, (x, y, d) in enumerate(items)]
    svg = scanpath_svg(fixes, default_aoi())
    assert _count(svg, "fixation") == len(fixes)
    assert _count(svg, "saccade") == max(0, len(fixes) - 1)
    assert _count(svg, "ordinal") == len(fixes)


def test_scanpath_positions_scale_with_geometry():
    fixes = [Fixation(0.2, 0.3, 0.0, 100.0, 3), Fixation(0.6, 0.7, 120.0, 50.0, 2)]

    def centers(g):
        svg = scanpath_svg(fixes, default_aoi(), g)
        return [(float(a), float(b)) for a, b in re.findall(r'class="fixation" cx="([\d.]+)" cy="([\d.]+)"', svg)]
    small, big = centers(ScreenGeometry(640, 360)), centers(ScreenGeometry(1280, 720))
    assert big == [(2 * x, 2 * y) for x, y in small]


def test_scanpath_file_is_deterministic(tmp_path):
    fixes = [Fixation(0.2, 0.3, 0.0, 100.0, 3)]
    render_scanpath(fixes, default_aoi(), ScreenGeometry(), tmp_path / "a.svg")
    render_scanpath(fixes, default_aoi(), ScreenGeometry(), tmp_path / "b.svg")
    assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()


def _curve(n, offset=0.0):
    return LearningCurve(EpochRecord(i + 1, 0.7 - i * 0.01 + offset, 0.5 + i / (2 * n), 0.69 + offset, 0.5)
                         for i in range(n))


def test_curves_csv(tmp_path):
    p = tmp_path / "c.csv"
    emit_curves_csv({"clean": _curve(3)}, p)
    lines = p.read_text().splitlines()
    assert lines[0] == CURVES_HEADER and len(lines) == 4
    emit_curves_csv({"clean": _curve(200), "noised": _curve(200, 0.1)}, p)
    rows = p.read_text().splitlines()[1:]
    assert len(rows) == 400 and {r.split(",")[0] for r in rows} == {"clean", "noised"}
    back = read_curves_csv(p)
    for name, off in (("clean", 0.0), ("noised", 0.1)):
        for a, b in zip(back[name], _curve(200, off)):
            assert a.epoch == b.epoch
            assert max(abs(u - v) for u, v in zip(a[1:], b[1:])) <= 1e-9
    with pytest.raises(EmptyInput):
        emit_curves_csv({}, p)
