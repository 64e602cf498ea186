"""The compiled extension and the pure-Python fallback must agree exactly."""
import numpy as np
import pytest
from hypothesis import given, strategies as st

from gazescreen import kernels
from gazescreen.viz import gaussian_kernel

from conftest import random_recording

BACKENDS = kernels.backends()
compiled = pytest.mark.skipif("compiled" not in BACKENDS, reason="extension not built")


def _cols(rec):
    return (np.ascontiguousarray(rec.t_ms), np.ascontiguousarray(rec.x), np.ascontiguousarray(rec.y),
            np.ascontiguousarray(rec.valid, dtype=np.uint8))


def test_backend_reported():
    assert kernels.BACKEND in BACKENDS
    assert "python" in BACKENDS


@compiled
@given(st.integers(0, 2 ** 32 - 1), st.integers(0, 120), st.floats(0.005, 0.1), st.floats(0.0, 150.0))
def test_idt_equivalent(seed, n, thr, md):
    cols = _cols(random_recording(np.random.default_rng(seed), n))
    a = BACKENDS["python"].idt_windows(*cols, thr, md)
    b = BACKENDS["compiled"].idt_windows(*cols, thr, md)
    assert a.dtype == b.dtype == np.int64 and np.array_equal(a, b)


@compiled
@given(st.integers(0, 2 ** 32 - 1), st.integers(0, 120), st.floats(0.1, 5.0), st.floats(0.0, 150.0))
def test_ivt_equivalent(seed, n, thr, md):
    cols = _cols(random_recording(np.random.default_rng(seed), n))
    assert np.array_equal(BACKENDS["python"].ivt_runs(*cols, thr, md), BACKENDS["compiled"].ivt_runs(*cols, thr, md))


@compiled
@given(st.integers(0, 2 ** 32 - 1), st.integers(0, 300), st.floats(1.0, 50.0))
def test_dwell_equivalent_bitwise(seed, n, tail):
    rng = np.random.default_rng(seed)
    rec = random_recording(rng, n, p_invalid=0.2)
    codes = rng.integers(0, 5, size=n).astype(np.int64)
    t, _, _, v = _cols(rec)
    a = BACKENDS["python"].dwell_times(t, codes, v, tail, 5)
    b = BACKENDS["compiled"].dwell_times(t, codes, v, tail, 5)
    assert np.array_equal(a, b)


@compiled
@given(st.integers(0, 2 ** 32 - 1), st.floats(0.5, 6.0))
def test_blur_equivalent(seed, sigma):
    rng = np.random.default_rng(seed)
    img = np.zeros((37, 53))
    idx = rng.integers(0, img.size, size=30)
    np.add.at(img.reshape(-1), idx, 1.0)
    k = gaussian_kernel(sigma)
    a = BACKENDS["python"].blur_separable(img, k)
    b = BACKENDS["compiled"].blur_separable(img, k)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-14)


def test_pure_switch_selects_fallback():
    import os
    import subprocess
    import sys
    env = dict(os.environ, GAZESCREEN_PURE="1")
    out = subprocess.run([sys.executable, "-c", "import gazescreen; print(gazescreen.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
