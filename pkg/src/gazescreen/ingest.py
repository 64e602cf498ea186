"""Readers and writers for gaze CSVs, AOI documents, feature tables and manifests.

All writers produce canonical bytes (fixed decimals, LF endings) through a
write-to-temp-then-rename step so a failed write never leaves a partial file.
"""
from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .core import (DEFAULT_GEOMETRY, N_ZONES, ZONES, AoiRegion, AoiSet, Familiarity,
                   FeatureVector, GazeRecording, Label, ScreenGeometry, ZoneLabel,
                   validate_recording)
from .errors import (IoFailure, MalformedHeader, MalformedRow, NonMonotonicTime,
                     RowSumViolation, SchemaViolation)

GAZE_HEADER = "t_ms,x,y,valid"
FEATURE_HEADER = "subject_id,label,f_eyes,f_mouth,f_face_other,f_body,f_objects"
SIDECAR_SUFFIX = ".meta.json"
READ_SUM_TOL = 1e-6
_UNITS = 10 ** 6


def _umask() -> int:
    m = os.umask(0)
    os.umask(m)
    return m


def atomic_write_bytes(path, data: bytes) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            # mkstemp creates 0600; give the file ordinary permissions
            os.chmod(tmp, 0o666 & ~_umask())
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def _read_text(path) -> str:
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            return fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc


def _lines(text: str) -> list[str]:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return [ln[:-1] if ln.endswith("\r") else ln for ln in lines]


# -- gaze CSV ----------------------------------------------------------------

def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + SIDECAR_SUFFIX)


def format_gaze_csv(rec: GazeRecording) -> str:
    out = [GAZE_HEADER]
    for t, x, y, v in zip(rec.t_ms.tolist(), rec.x.tolist(), rec.y.tolist(), rec.valid.tolist()):
        out.append(f"{t:.6f},{x:.6f},{y:.6f},{1 if v else 0}")
    return "\n".join(out) + "\n"


def write_gaze_csv(rec: GazeRecording, path, *, sidecar: dict | None = None) -> None:
    """Write ``rec`` in canonical form; ``sidecar`` adds a metadata document next to it."""
    problems = validate_recording(rec)
    if problems:
        raise ValueError(f"refusing to write invalid recording: {problems[0]}")
    atomic_write_text(path, format_gaze_csv(rec))
    if sidecar is not None:
        meta = {
            "subject_id": rec.subject_id,
            "stimulus_id": rec.stimulus_id,
            "familiarity": rec.familiarity.value,
            "geometry": [rec.geometry.width_px, rec.geometry.height_px],
        }
        meta.update(sidecar)
        atomic_write_text(sidecar_path(path), json.dumps(meta, indent=2, sort_keys=True) + "\n")


def _read_sidecar(path) -> dict:
    sc = sidecar_path(path)
    if not sc.exists():
        return {}
    try:
        return json.loads(_read_text(sc))
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"{sc}: {exc}") from exc


def read_gaze_csv(path, **meta) -> GazeRecording:
    """Parse a gaze CSV.

    Metadata comes from keyword overrides, then the optional ``.meta.json``
    sidecar, then defaults (subject id = file stem, 1280x720 screen).
    """
    lines = _lines(_read_text(path))
    if not lines or lines[0].strip() != GAZE_HEADER:
        got = lines[0] if lines else "<empty file>"
        raise MalformedHeader(f"{path}: expected header {GAZE_HEADER!r}, got {got!r}")
    t, x, y, v = [], [], [], []
    for row, line in enumerate(lines[1:], start=1):
        fields = line.split(",")
        if len(fields) != 4:
            raise MalformedRow(row, f"expected 4 fields, got {len(fields)}")
        try:
            ti, xi, yi = float(fields[0]), float(fields[1]), float(fields[2])
        except ValueError as exc:
            raise MalformedRow(row, str(exc)) from None
        flag = fields[3].strip()
        if flag not in ("0", "1"):
            raise MalformedRow(row, f"valid flag must be 0 or 1, got {flag!r}")
        if not math.isfinite(ti):
            raise MalformedRow(row, "non-finite timestamp")
        if t and not ti > t[-1]:
            raise NonMonotonicTime(row)
        t.append(ti)
        x.append(xi)
        y.append(yi)
        v.append(flag == "1")
    side = _read_sidecar(path)
    geom = side.get("geometry")
    kw = {
        "subject_id": side.get("subject_id", Path(path).name.rsplit(".", 1)[0]),
        "stimulus_id": side.get("stimulus_id", ""),
        "familiarity": Familiarity(side.get("familiarity", Familiarity.UNSPECIFIED.value)),
        "geometry": ScreenGeometry(*geom) if geom else DEFAULT_GEOMETRY,
    }
    kw.update({k: val for k, val in meta.items() if val is not None})
    return GazeRecording(t, x, y, v, **kw)


# -- AOI document ------------------------------------------------------------

def aoi_from_dict(doc) -> AoiSet:
    if not isinstance(doc, dict) or "regions" not in doc:
        raise SchemaViolation("AOI document needs 'stimulus_id' and 'regions'")
    merged: dict[ZoneLabel, list] = {}
    for k, reg in enumerate(doc["regions"]):
        try:
            zone = ZoneLabel(reg["zone"])
        except (KeyError, TypeError, ValueError):
            raise SchemaViolation(f"region {k}: unknown zone {reg.get('zone') if isinstance(reg, dict) else reg!r}") from None
        rects = reg.get("rects", [])
        if not isinstance(rects, list):
            raise SchemaViolation(f"region {k}: 'rects' must be a list")
        # duplicate zone entries fold into the first occurrence
        merged.setdefault(zone, []).extend(rects)
    regions = []
    for zone, rects in merged.items():
        try:
            regions.append(AoiRegion(zone, tuple(tuple(r) for r in rects)))
        except (ValueError, TypeError) as exc:
            raise SchemaViolation(f"zone {zone.value}: {exc}") from None
    return AoiSet(str(doc.get("stimulus_id", "")), tuple(regions))


def aoi_to_dict(aoi: AoiSet) -> dict:
    return {
        "stimulus_id": aoi.stimulus_id,
        "regions": [{"zone": r.zone.value, "rects": [list(rc) for rc in r.rects]} for r in aoi.regions],
    }


def read_aoi_json(path) -> AoiSet:
    try:
        doc = json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"{path}: {exc}") from exc
    return aoi_from_dict(doc)


def write_aoi_json(aoi: AoiSet, path) -> None:
    atomic_write_text(path, json.dumps(aoi_to_dict(aoi), indent=2) + "\n")


# -- features CSV ------------------------------------------------------------

def _micro_units(fractions: Sequence[float]) -> list[int]:
    """Round to 1e-6 units with largest-remainder so the written row sums to exactly 1."""
    scaled = [f * _UNITS for f in fractions]
    base = [math.floor(s) for s in scaled]
    short = _UNITS - sum(base)
    order = sorted(range(len(scaled)), key=lambda i: (-(scaled[i] - base[i]), i))
    for i in order[:max(short, 0)]:
        base[i] += 1
    return base


def format_features_csv(rows: Sequence[FeatureVector]) -> str:
    out = [FEATURE_HEADER]
    for fv in rows:
        if "," in fv.subject_id or "\n" in fv.subject_id:
            raise SchemaViolation(f"subject id {fv.subject_id!r} cannot be written to CSV")
        units = _micro_units(fv.fractions)
        label = fv.label.value if fv.label is not None else ""
        out.append(",".join([fv.subject_id, label] + [f"{u // _UNITS}.{u % _UNITS:06d}" for u in units]))
    return "\n".join(out) + "\n"


def write_features_csv(path, rows: Sequence[FeatureVector]) -> None:
    atomic_write_text(path, format_features_csv(rows))


def read_features_csv(path, *, require_labels: bool = False) -> list[FeatureVector]:
    lines = _lines(_read_text(path))
    if not lines or lines[0].strip() != FEATURE_HEADER:
        raise SchemaViolation(f"{path}: expected header {FEATURE_HEADER!r}")
    out = []
    for row, line in enumerate(lines[1:], start=1):
        fields = line.split(",")
        if len(fields) != 2 + N_ZONES:
            raise SchemaViolation(f"row {row}: expected {2 + N_ZONES} fields, got {len(fields)}")
        sid, lab = fields[0], fields[1].strip()
        try:
            label = Label(lab) if lab else None
        except ValueError:
            raise SchemaViolation(f"row {row}: unknown label {lab!r}") from None
        if label is None and require_labels:
            raise SchemaViolation(f"row {row}: label required")
        try:
            fr = [float(f) for f in fields[2:]]
        except ValueError as exc:
            raise SchemaViolation(f"row {row}: {exc}") from None
        if any(not (0.0 <= f <= 1.0) for f in fr):
            raise SchemaViolation(f"row {row}: fraction outside [0, 1]")
        total = math.fsum(fr)
        if abs(total - 1.0) > READ_SUM_TOL:
            raise RowSumViolation(row, total)
        if abs(total - 1.0) > 1e-12:
            fr = [f / total for f in fr]
        out.append(FeatureVector(tuple(fr), subject_id=sid, label=label))
    return out


# -- cohort manifest ---------------------------------------------------------

@dataclass(frozen=True)
class ManifestEntry:
    subject_id: str
    label: Label
    recording: str
    stimulus_id: str = ""
    familiarity: Familiarity = Familiarity.UNSPECIFIED


@dataclass(frozen=True)
class CohortManifest:
    entries: tuple[ManifestEntry, ...]
    root: Path = Path(".")

    def __post_init__(self):
        seen = set()
        for e in self.entries:
            key = (e.subject_id, e.stimulus_id)
            if key in seen:
                raise SchemaViolation(f"duplicate manifest entry {key}")
            seen.add(key)

    def __len__(self):
        return len(self.entries)

    def path_of(self, entry: ManifestEntry) -> Path:
        return self.root / entry.recording

    def load(self, entry: ManifestEntry) -> GazeRecording:
        return read_gaze_csv(self.path_of(entry), subject_id=entry.subject_id,
                             stimulus_id=entry.stimulus_id, familiarity=entry.familiarity)


def manifest_to_list(m: CohortManifest) -> list[dict]:
    return [{"subject_id": e.subject_id, "label": e.label.value, "recording": e.recording,
             "stimulus_id": e.stimulus_id, "familiarity": e.familiarity.value} for e in m.entries]


def write_manifest(m: CohortManifest, path) -> None:
    atomic_write_text(path, json.dumps(manifest_to_list(m), indent=2) + "\n")


def read_manifest(path) -> CohortManifest:
    try:
        doc = json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"{path}: {exc}") from exc
    if not isinstance(doc, list):
        raise SchemaViolation("manifest must be a JSON array")
    entries = []
    for k, item in enumerate(doc):
        try:
            entries.append(ManifestEntry(
                subject_id=str(item["subject_id"]),
                label=Label(item["label"]),
                recording=str(item["recording"]),
                stimulus_id=str(item.get("stimulus_id", "")),
                familiarity=Familiarity(item.get("familiarity", Familiarity.UNSPECIFIED.value)),
            ))
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaViolation(f"manifest entry {k}: {exc!r}") from None
        if Path(entries[-1].recording).is_absolute():
            raise SchemaViolation(f"manifest entry {k}: recording path must be relative")
    return CohortManifest(tuple(entries), root=Path(path).parent)
