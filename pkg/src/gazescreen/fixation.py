"""Fixation detection (I-DT and I-VT) and per-zone fixation statistics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import ZONES, AoiSet, Fixation, GazeRecording, ZoneLabel, zone_of
from .errors import InsufficientData, ZeroTimestep

DEFAULT_DISPERSION = 0.02
DEFAULT_MIN_DURATION_MS = 100.0
DEFAULT_VELOCITY = 1.0


@dataclass(frozen=True)
class IdtParams:
    """``dispersion_threshold`` bounds (x-extent + y-extent) in screen fractions."""

    dispersion_threshold: float = DEFAULT_DISPERSION
    min_duration_ms: float = DEFAULT_MIN_DURATION_MS

    def __post_init__(self):
        if not 0 < self.dispersion_threshold <= 1:
            raise ValueError("dispersion_threshold must lie in (0, 1]")
        if not self.min_duration_ms > 0:
            raise ValueError("min_duration_ms must be positive")


@dataclass(frozen=True)
class IvtParams:
    """``velocity_threshold`` is in screen fractions per second."""

    velocity_threshold: float = DEFAULT_VELOCITY
    min_duration_ms: float = DEFAULT_MIN_DURATION_MS

    def __post_init__(self):
        if not self.velocity_threshold > 0:
            raise ValueError("velocity_threshold must be positive")
        if not self.min_duration_ms > 0:
            raise ValueError("min_duration_ms must be positive")


def _columns(rec: GazeRecording):
    if rec.n_valid < 2:
        raise InsufficientData(f"need at least 2 valid samples, recording has {rec.n_valid}")
    return (np.ascontiguousarray(rec.t_ms), np.ascontiguousarray(rec.x),
            np.ascontiguousarray(rec.y), np.ascontiguousarray(rec.valid, dtype=np.uint8))


def _to_fixations(rec: GazeRecording, windows: np.ndarray) -> list[Fixation]:
    out = []
    for first, last in windows.tolist():
        sl = slice(first, last + 1)
        out.append(Fixation(
            centroid_x=float(np.mean(rec.x[sl])),
            centroid_y=float(np.mean(rec.y[sl])),
            start_ms=float(rec.t_ms[first]),
            duration_ms=float(rec.t_ms[last] - rec.t_ms[first]),
            sample_count=last - first + 1,
            first_index=first,
            last_index=last,
        ))
    return out


def idt_windows(rec: GazeRecording, p: IdtParams = IdtParams()) -> np.ndarray:
    """Inclusive ``[first, last]`` sample-index pairs of each I-DT fixation."""
    t, x, y, v = _columns(rec)
    return kernels.idt_windows(t, x, y, v, float(p.dispersion_threshold), float(p.min_duration_ms))


def detect_fixations_idt(rec: GazeRecording, p: IdtParams = IdtParams()) -> list[Fixation]:
    """Dispersion-threshold identification.

    A window starting at a valid sample is first grown to span
    ``min_duration_ms``; if its dispersion is within threshold it keeps growing
    sample by sample until adding the next one would exceed it.  Invalid
    samples end a window, so no fixation spans a tracking gap.
    """
    return _to_fixations(rec, idt_windows(rec, p))


def ivt_windows(rec: GazeRecording, p: IvtParams = IvtParams()) -> np.ndarray:
    t, x, y, v = _columns(rec)
    vb = v.astype(bool)
    pair = vb[1:] & vb[:-1]
    bad = np.flatnonzero(pair & (np.diff(t) <= 0))
    if bad.size:
        raise ZeroTimestep(int(bad[0]) + 1)
    return kernels.ivt_runs(t, x, y, v, float(p.velocity_threshold), float(p.min_duration_ms))


def detect_fixations_ivt(rec: GazeRecording, p: IvtParams = IvtParams()) -> list[Fixation]:
    """Velocity-threshold identification.

    Each valid sample's speed is its displacement from the previous valid
    sample divided by the time step; the first sample of a valid run takes
    the speed of the step that follows it.  Runs of samples slower than the
    threshold lasting at least ``min_duration_ms`` become fixations.
    """
    return _to_fixations(rec, ivt_windows(rec, p))


def fixation_zone_durations(fixes, aoi: AoiSet) -> dict[ZoneLabel, float]:
    totals = {z: 0.0 for z in ZONES}
    for f in fixes:
        totals[zone_of(f.centroid_x, f.centroid_y, aoi)] += f.duration_ms
    return totals
