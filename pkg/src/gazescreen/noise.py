"""Webcam-grade gaze error simulation by i.i.d. Gaussian perturbation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import GazeRecording

DEFAULT_SIGMA = 0.025
# Philox4x64-10 keyed by the seed; sample i draws uniforms at counters 2i and
# 2i+1, mapped to an (x, y) normal pair by Box-Muller.
NOISE_RNG = "numpy.Philox4x64-10/box-muller"
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class NoiseSpec:
    sigma_frac: float = DEFAULT_SIGMA
    seed: int = 0

    def __post_init__(self):
        if not self.sigma_frac >= 0:
            raise ValueError("sigma_frac must be non-negative")
        if not 0 <= int(self.seed) <= _MASK64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def metadata(self) -> dict:
        return {"noise": {"generator": NOISE_RNG, "sigma_frac": self.sigma_frac, "seed": int(self.seed)}}


def standard_normal_pairs(n: int, seed: int, start: int = 0) -> np.ndarray:
    """``(n, 2)`` standard normals for sample indices ``start .. start+n-1``.

    The value for a given (seed, sample index, axis) does not depend on
    ``start`` or ``n``, so chunks can be generated independently.
    """
    bitgen = np.random.Philox(key=int(seed) & _MASK64)
    if start:
        # each uniform double consumes one 64-bit output; Philox yields 4 per counter step
        skip = 2 * start
        bitgen.advance(skip // 4)
        gen = np.random.Generator(bitgen)
        gen.random(skip % 4)
    else:
        gen = np.random.Generator(bitgen)
    u = gen.random(2 * n).reshape(n, 2)
    r = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
    theta = 2.0 * np.pi * u[:, 1]
    return np.column_stack((r * np.cos(theta), r * np.sin(theta)))


def noise_offsets(n: int, spec: NoiseSpec) -> np.ndarray:
    """Unclamped per-sample (dx, dy) offsets."""
    return spec.sigma_frac * standard_normal_pairs(n, spec.seed)


def add_webcam_noise(rec: GazeRecording, spec: NoiseSpec) -> GazeRecording:
    """Return a copy of ``rec`` with Gaussian error added to every valid sample.

    Coordinates are clamped to the screen.  Timestamps, validity and metadata
    are carried over unchanged.
    """
    if spec.sigma_frac == 0 or len(rec) == 0:
        return rec.replace()
    off = noise_offsets(len(rec), spec)
    v = rec.valid
    x = np.where(v, np.clip(rec.x + off[:, 0], 0.0, 1.0), rec.x)
    y = np.where(v, np.clip(rec.y + off[:, 1], 0.0, 1.0), rec.y)
    return rec.replace(x=x, y=y)


def noise_sweep(rec: GazeRecording, sigmas, seed: int) -> list[GazeRecording]:
    """One noised copy per sigma; copy k uses seed ``seed + k``."""
    out = []
    for k, s in enumerate(sigmas):
        if s < 0:
            raise ValueError(f"negative sigma {s}")
        out.append(add_webcam_noise(rec, NoiseSpec(float(s), (int(seed) + k) & _MASK64)))
    return out
