"""Dwell-time zone features and cohort-level zone statistics."""
from __future__ import annotations

import math
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from .core import N_ZONES, ZONES, AoiSet, FeatureVector, GazeRecording, Label, ZoneLabel, zone_codes
from .errors import EmptyInput, EmptyRecording
from .ingest import atomic_write_text

ZoneStats = dict[Label, dict[ZoneLabel, tuple[float, float]]]


def tail_interval(t: np.ndarray, valid: np.ndarray) -> float:
    """Median inter-sample interval used for the last sample of each valid run."""
    if len(t) < 2:
        return 1.0
    d = np.diff(t)
    both = valid[1:] & valid[:-1]
    if both.any():
        return float(np.median(d[both]))
    return float(np.median(d))


def dwell_times(rec: GazeRecording, aoi: AoiSet) -> np.ndarray:
    """Absolute dwell time (ms) per zone in :data:`ZONES` order."""
    if rec.n_valid == 0:
        raise EmptyRecording(f"recording {rec.subject_id!r} has no valid samples")
    valid = np.asarray(rec.valid, dtype=bool)
    codes = zone_codes(np.where(valid, rec.x, 0.0), np.where(valid, rec.y, 0.0), aoi)
    return kernels.dwell_times(np.ascontiguousarray(rec.t_ms), np.ascontiguousarray(codes),
                               np.ascontiguousarray(valid, dtype=np.uint8),
                               tail_interval(rec.t_ms, valid), N_ZONES)


def dwell_fractions(rec: GazeRecording, aoi: AoiSet, label: Label | None = None) -> FeatureVector:
    """Fraction of valid gaze time spent in each zone.

    Every valid sample owns the interval up to the next sample when that
    sample is also valid; the last sample of a valid run owns the median
    valid interval instead.  Tracking gaps therefore contribute no time.
    """
    times = dwell_times(rec, aoi)
    total = float(times.sum())
    fr = times / total
    return FeatureVector(tuple(fr.tolist()), subject_id=rec.subject_id, label=label)


def cohort_zone_means(features: Sequence[FeatureVector]) -> ZoneStats:
    """Mean and population std of every zone fraction, per label."""
    if not features:
        raise EmptyInput("no feature vectors")
    groups: dict[Label, list[np.ndarray]] = {}
    for fv in features:
        if fv.label is None:
            raise EmptyInput(f"feature vector {fv.subject_id!r} carries no label")
        groups.setdefault(fv.label, []).append(fv.as_array())
    stats: ZoneStats = {}
    for label in Label:
        if label not in groups:
            continue
        m = np.vstack(groups[label])
        mean, std = m.mean(axis=0), m.std(axis=0)
        stats[label] = {z: (float(mean[i]), float(std[i])) for i, z in enumerate(ZONES)}
    return stats


def eyes_ratio(stats: ZoneStats) -> float:
    """Mean ASD Eyes fraction over mean TD Eyes fraction."""
    td = stats[Label.TD][ZoneLabel.EYES][0]
    asd = stats[Label.ASD][ZoneLabel.EYES][0]
    return asd / td if td > 0 else math.inf


def zone_gap(stats: ZoneStats, zone: ZoneLabel = ZoneLabel.EYES) -> float:
    return abs(stats[Label.ASD][zone][0] - stats[Label.TD][zone][0])


def zone_distribution_rows(conditions: Mapping[str, ZoneStats]) -> list[tuple[str, str, str, float, float]]:
    rows = []
    for cond, stats in conditions.items():
        if not stats:
            raise EmptyInput(f"condition {cond!r} has no labeled statistics")
        for label in Label:
            if label not in stats:
                raise EmptyInput(f"condition {cond!r} has no {label.value} vectors")
            for z in ZONES:
                mean, std = stats[label][z]
                rows.append((cond, label.value, z.value, mean, std))
    return rows


def emit_zone_distribution_table(clean: ZoneStats, noised: ZoneStats, path) -> None:
    """Write the per-condition/label/zone mean and std table behind a zone bar chart."""
    rows = zone_distribution_rows({"clean": clean, "noised": noised})
    lines = ["condition,label,zone,mean,std"]
    lines += [f"{c},{lab},{z},{m:.6f},{s:.6f}" for c, lab, z, m, s in rows]
    atomic_write_text(path, "\n".join(lines) + "\n")
