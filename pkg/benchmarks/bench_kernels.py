"""Time each hot kernel under every available backend.

    python3 benchmarks/bench_kernels.py [--samples N] [--repeat R]

Inputs come from a synthetic 60 Hz recording so the fixation kernels see
realistic fixation lengths.  Outputs are cross-checked between backends.
"""
import argparse
import timeit

import numpy as np

from gazescreen import kernels
from gazescreen.core import N_ZONES
from gazescreen.features import tail_interval, zone_codes
from gazescreen.synth import TD_PROFILE, default_aoi, generate_recording
from gazescreen.viz import gaussian_kernel


def inputs(n_samples: int):
    aoi = default_aoi()
    duration = n_samples * 1000.0 / TD_PROFILE.sample_rate_hz
    rec = generate_recording(TD_PROFILE.zone_weights, TD_PROFILE, aoi, duration, seed=1)
    t = np.ascontiguousarray(rec.t_ms)
    x, y = np.ascontiguousarray(rec.x), np.ascontiguousarray(rec.y)
    valid = np.ones(len(t), dtype=np.uint8)
    valid[::97] = 0
    codes = np.ascontiguousarray(zone_codes(x, y, aoi))
    rng = np.random.default_rng(0)
    img = np.zeros((720, 1280))
    np.add.at(img, (rng.integers(0, 720, 5000), rng.integers(0, 1280, 5000)), 1.0)
    tail = tail_interval(t, valid.astype(bool))
    return {
        "idt": lambda m: m.idt_windows(t, x, y, valid, 0.02, 100.0),
        "ivt": lambda m: m.ivt_runs(t, x, y, valid, 1.0, 100.0),
        "dwell": lambda m: m.dwell_times(t, codes, valid, tail, N_ZONES),
        "blur": lambda m: m.blur_separable(img, gaussian_kernel(15.0)),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=7200)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    found = kernels.backends()
    if "compiled" not in found:
        print("compiled extension not built; timing the python backend only")
    cases = inputs(args.samples)
    print(f"{'kernel':<8}" + "".join(f"{name:>14}" for name in found) + ("     speedup" if len(found) > 1 else ""))
    for kernel, call in cases.items():
        outs = {name: call(mod) for name, mod in found.items()}
        ref = outs["python"]
        for name, got in outs.items():
            assert np.allclose(got, ref, rtol=0, atol=1e-9), f"{kernel}: {name} disagrees with python"
        best = {}
        for name, mod in found.items():
            number = 1 if name == "python" else 10
            best[name] = min(timeit.repeat(lambda: call(mod), number=number, repeat=args.repeat)) / number
        row = f"{kernel:<8}" + "".join(f"{best[name] * 1e3:>11.3f} ms" for name in found)
        if "compiled" in best:
            row += f"{best['python'] / best['compiled']:>11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
