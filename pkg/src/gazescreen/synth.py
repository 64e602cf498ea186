"""Synthetic labeled gaze cohorts from per-group zone-visit profiles.

A subject's gaze hops between the five zones as a Markov chain over visits:
each visit lasts an exponentially distributed time, after which gaze stays
in the same zone with probability ``stickiness`` and otherwise redraws a zone
from the subject's weights.  This chain's long-run time share of each zone
equals the weights.  While in a zone, samples sit at the zone anchor plus
Gaussian jitter.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import N_ZONES, ZONES, AoiSet, Familiarity, GazeRecording, Label
from .errors import DegenerateProfile
from .ingest import (CohortManifest, ManifestEntry, aoi_from_dict, atomic_write_text,
                     write_aoi_json, write_gaze_csv, write_manifest)

SYNTH_RNG = "numpy.PCG64/SeedSequence"
WEIGHT_TOL = 1e-9


def default_aoi() -> AoiSet:
    text = resources.files("gazescreen").joinpath("data/default_aoi.json").read_text(encoding="utf-8")
    return aoi_from_dict(json.loads(text))


def derive_seed(seed: int, *keys: int) -> int:
    """Mix ``seed`` and integer keys into an independent 64-bit seed."""
    ss = np.random.SeedSequence([int(seed) & ((1 << 64) - 1), *map(int, keys)])
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class GazeProfile:
    zone_weights: tuple[float, ...]
    stickiness: float = 0.3
    mean_dwell_ms: float = 300.0
    jitter_frac: float = 0.003
    sample_rate_hz: float = 60.0

    def __post_init__(self):
        w = tuple(float(v) for v in self.zone_weights)
        object.__setattr__(self, "zone_weights", w)
        if len(w) != N_ZONES or any(v < 0 for v in w) or abs(sum(w) - 1.0) > WEIGHT_TOL:
            raise DegenerateProfile(f"zone_weights must be {N_ZONES} non-negative reals summing to 1: {w}")
        if not 0 <= self.stickiness < 1:
            raise DegenerateProfile("stickiness must lie in [0, 1)")
        if not self.mean_dwell_ms > 0:
            raise DegenerateProfile("mean_dwell_ms must be positive")
        if not self.jitter_frac >= 0:
            raise DegenerateProfile("jitter_frac must be non-negative")
        if not self.sample_rate_hz > 0:
            raise DegenerateProfile("sample_rate_hz must be positive")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["zone_weights"] = list(self.zone_weights)
        return d


TD_PROFILE = GazeProfile((0.40, 0.20, 0.20, 0.10, 0.10))
ASD_PROFILE = GazeProfile((0.20, 0.10, 0.15, 0.15, 0.40))
DEFAULT_DURATION_MS = 120_000.0
DEFAULT_VARIABILITY = 60.0


@dataclass(frozen=True)
class CohortSpec:
    n_per_group: int = 25
    td_profile: GazeProfile = TD_PROFILE
    asd_profile: GazeProfile = ASD_PROFILE
    duration_ms: float = DEFAULT_DURATION_MS
    aoi: AoiSet = field(default_factory=default_aoi)
    seed: int = 42
    subject_variability: float = DEFAULT_VARIABILITY

    def __post_init__(self):
        if int(self.n_per_group) < 1:
            raise ValueError("n_per_group must be at least 1")
        if not self.duration_ms > 0:
            raise ValueError("duration_ms must be positive")
        if not self.subject_variability >= 0:
            raise ValueError("subject_variability must be non-negative")


def load_profiles(path) -> tuple[GazeProfile, GazeProfile]:
    """Read ``{"td": {...}, "asd": {...}}`` overrides on top of the default profiles."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    td = replace(TD_PROFILE, **doc.get("td", {}))
    asd = replace(ASD_PROFILE, **doc.get("asd", {}))
    return td, asd


def sample_subject_weights(profile: GazeProfile, variability: float, seed: int) -> np.ndarray:
    """Per-subject zone weights ~ Dirichlet(profile weights * variability).

    ``variability == 0`` returns the profile weights unchanged; zones with
    zero profile weight stay at zero.
    """
    if variability < 0:
        raise ValueError("variability must be non-negative")
    w = np.array(profile.zone_weights, dtype=np.float64)
    if variability == 0:
        return w
    rng = np.random.Generator(np.random.PCG64(seed))
    support = w > 0
    out = np.zeros(N_ZONES)
    out[support] = rng.dirichlet(w[support] * variability)
    return out / out.sum()


def _visit_schedule(weights, profile, duration_ms, rng):
    """Zone codes and end times of consecutive visits covering ``duration_ms``."""
    batch = 256
    zones, ends = [], []
    clock = 0.0
    current = int(rng.choice(N_ZONES, p=weights))
    first = True
    while clock < duration_ms:
        dur = rng.exponential(profile.mean_dwell_ms, size=batch)
        stay = rng.random(batch) < profile.stickiness
        draws = rng.choice(N_ZONES, p=weights, size=batch)
        for k in range(batch):
            if not first and not stay[k]:
                current = int(draws[k])
            first = False
            clock += float(dur[k])
            zones.append(current)
            ends.append(clock)
            if clock >= duration_ms:
                break
    return np.array(zones, dtype=np.int64), np.array(ends)


def generate_recording(weights: Sequence[float], profile: GazeProfile, aoi: AoiSet,
                       duration_ms: float, seed: int, subject_id: str = "") -> GazeRecording:
    w = np.asarray(weights, dtype=np.float64)
    if len(w) != N_ZONES or (w < 0).any() or abs(w.sum() - 1.0) > WEIGHT_TOL:
        raise DegenerateProfile(f"weights must be a distribution over {N_ZONES} zones: {w}")
    w = w / w.sum()
    visit_ss, jitter_ss = np.random.SeedSequence(int(seed)).spawn(2)
    zones, ends = _visit_schedule(w, profile, duration_ms, np.random.Generator(np.random.PCG64(visit_ss)))
    step = 1000.0 / profile.sample_rate_hz
    t = np.arange(int(np.ceil(duration_ms / step)), dtype=np.float64) * step
    t = t[t < duration_ms]
    code = zones[np.minimum(np.searchsorted(ends, t, side="right"), len(zones) - 1)]
    anchors = np.array([aoi.anchor(z) for z in ZONES])
    jitter = np.random.Generator(np.random.PCG64(jitter_ss)).normal(0.0, 1.0, size=(len(t), 2))
    xy = np.clip(anchors[code] + profile.jitter_frac * jitter, 0.0, 1.0)
    return GazeRecording(t, xy[:, 0], xy[:, 1], np.ones(len(t), dtype=bool),
                         subject_id=subject_id, stimulus_id=aoi.stimulus_id,
                         familiarity=Familiarity.UNSPECIFIED)


def subject_recording(spec: CohortSpec, label: Label, index: int) -> tuple[str, GazeRecording]:
    """Generate one subject.  TD and ASD subjects with the same index share random streams."""
    profile = spec.td_profile if label is Label.TD else spec.asd_profile
    sid = f"{label.value.lower()}_{index:03d}"
    weights = sample_subject_weights(profile, spec.subject_variability, derive_seed(spec.seed, index, 0))
    rec = generate_recording(weights, profile, spec.aoi, spec.duration_ms,
                             derive_seed(spec.seed, index, 1), subject_id=sid)
    return sid, rec


def iter_cohort(spec: CohortSpec):
    for label in (Label.TD, Label.ASD):
        for i in range(spec.n_per_group):
            sid, rec = subject_recording(spec, label, i)
            yield label, sid, rec


def cohort_metadata(spec: CohortSpec) -> dict:
    return {
        "generator": SYNTH_RNG,
        "seed": int(spec.seed),
        "n_per_group": int(spec.n_per_group),
        "duration_ms": spec.duration_ms,
        "subject_variability": spec.subject_variability,
        "td_profile": spec.td_profile.to_dict(),
        "asd_profile": spec.asd_profile.to_dict(),
    }


def generate_cohort(spec: CohortSpec, out_dir) -> CohortManifest:
    """Write one gaze CSV per subject plus ``manifest.json``, ``aoi.json`` and ``cohort.json``."""
    out = Path(out_dir)
    entries = []
    for label, sid, rec in iter_cohort(spec):
        name = f"{sid}.csv"
        write_gaze_csv(rec, out / name)
        entries.append(ManifestEntry(sid, label, name, spec.aoi.stimulus_id, Familiarity.UNSPECIFIED))
    manifest = CohortManifest(tuple(entries), root=out)
    write_aoi_json(spec.aoi, out / "aoi.json")
    atomic_write_text(out / "cohort.json", json.dumps(cohort_metadata(spec), indent=2, sort_keys=True) + "\n")
    write_manifest(manifest, out / "manifest.json")
    return manifest
