"""Domain types: screen geometry, gaze recordings, AOI zones, features, fixations.

Coordinates are normalized screen fractions in [0, 1] with the origin at the
top-left corner.  Pixel geometry travels separately in :class:`ScreenGeometry`.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np


class ZoneLabel(str, enum.Enum):
    EYES = "Eyes"
    MOUTH = "Mouth"
    FACE_OTHER = "FaceOther"
    BODY = "Body"
    OBJECTS = "Objects"

    @property
    def index(self) -> int:
        return ZONES.index(self)


ZONES: tuple[ZoneLabel, ...] = tuple(ZoneLabel)
N_ZONES = len(ZONES)
OBJECTS_CODE = ZONES.index(ZoneLabel.OBJECTS)


class Label(str, enum.Enum):
    ASD = "ASD"
    TD = "TD"

    @property
    def target(self) -> int:
        """Binary classifier target; ASD is the positive class."""
        return 1 if self is Label.ASD else 0


class Familiarity(str, enum.Enum):
    KNOWN = "Known"
    UNKNOWN = "Unknown"
    UNSPECIFIED = "Unspecified"


@dataclass(frozen=True)
class ScreenGeometry:
    width_px: int = 1280
    height_px: int = 720

    def __post_init__(self):
        if int(self.width_px) != self.width_px or self.width_px < 1:
            raise ValueError(f"width_px must be a positive integer, got {self.width_px!r}")
        if int(self.height_px) != self.height_px or self.height_px < 1:
            raise ValueError(f"height_px must be a positive integer, got {self.height_px!r}")


DEFAULT_GEOMETRY = ScreenGeometry(1280, 720)


class GazeSample(NamedTuple):
    t_ms: float
    x: float
    y: float
    valid: bool


def _frozen(a, dtype) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True).reshape(-1)
    arr.flags.writeable = False
    return arr


class GazeRecording:
    """An ordered sequence of gaze samples plus recording metadata.

    Samples are stored column-wise as read-only numpy arrays (``t_ms``, ``x``,
    ``y``, ``valid``).  Construction does not enforce the sample invariants;
    use :func:`validate_recording` to list violations.
    """

    __slots__ = ("subject_id", "stimulus_id", "familiarity", "geometry",
                 "t_ms", "x", "y", "valid")

    def __init__(self, t_ms, x, y, valid=None, *, subject_id: str = "",
                 stimulus_id: str = "", familiarity: Familiarity = Familiarity.UNSPECIFIED,
                 geometry: ScreenGeometry = DEFAULT_GEOMETRY):
        t = _frozen(t_ms, np.float64)
        xs = _frozen(x, np.float64)
        ys = _frozen(y, np.float64)
        v = _frozen(np.ones(len(t), dtype=bool) if valid is None else valid, bool)
        if not (len(t) == len(xs) == len(ys) == len(v)):
            raise ValueError("sample columns must have equal length")
        object.__setattr__(self, "t_ms", t)
        object.__setattr__(self, "x", xs)
        object.__setattr__(self, "y", ys)
        object.__setattr__(self, "valid", v)
        object.__setattr__(self, "subject_id", str(subject_id))
        object.__setattr__(self, "stimulus_id", str(stimulus_id))
        object.__setattr__(self, "familiarity", Familiarity(familiarity))
        object.__setattr__(self, "geometry", geometry)

    def __setattr__(self, name, value):
        raise AttributeError("GazeRecording is immutable")

    @classmethod
    def from_samples(cls, samples: Iterable[GazeSample], **meta) -> "GazeRecording":
        rows = list(samples)
        if not rows:
            return cls([], [], [], [], **meta)
        t, x, y, v = zip(*rows)
        return cls(t, x, y, v, **meta)

    @property
    def samples(self) -> list[GazeSample]:
        return [GazeSample(float(t), float(x), float(y), bool(v))
                for t, x, y, v in zip(self.t_ms, self.x, self.y, self.valid)]

    @property
    def n_valid(self) -> int:
        return int(self.valid.sum())

    def __len__(self):
        return len(self.t_ms)

    def replace(self, **changes) -> "GazeRecording":
        kw = dict(t_ms=self.t_ms, x=self.x, y=self.y, valid=self.valid,
                  subject_id=self.subject_id, stimulus_id=self.stimulus_id,
                  familiarity=self.familiarity, geometry=self.geometry)
        kw.update(changes)
        t, x, y, v = kw.pop("t_ms"), kw.pop("x"), kw.pop("y"), kw.pop("valid")
        return GazeRecording(t, x, y, v, **kw)

    def __eq__(self, other):
        if not isinstance(other, GazeRecording):
            return NotImplemented
        return (self.subject_id == other.subject_id
                and self.stimulus_id == other.stimulus_id
                and self.familiarity == other.familiarity
                and self.geometry == other.geometry
                and np.array_equal(self.t_ms, other.t_ms, equal_nan=True)
                and np.array_equal(self.x, other.x, equal_nan=True)
                and np.array_equal(self.y, other.y, equal_nan=True)
                and np.array_equal(self.valid, other.valid))

    __hash__ = None

    def __repr__(self):
        return (f"GazeRecording(subject_id={self.subject_id!r}, stimulus_id={self.stimulus_id!r}, "
                f"n={len(self)}, valid={self.n_valid})")


def validate_recording(rec: GazeRecording) -> list[str]:
    """Return one description per violated sample invariant (empty if clean)."""
    problems = []
    for i, t in enumerate(rec.t_ms):
        if not math.isfinite(t) or t < 0:
            problems.append(f"invalid timestamp at index {i}")
        if i > 0 and not t > rec.t_ms[i - 1]:
            problems.append(f"non-increasing timestamp at index {i}")
        if rec.valid[i]:
            x, y = rec.x[i], rec.y[i]
            if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
                problems.append(f"coordinate out of range at index {i}")
    return problems


Rect = tuple[float, float, float, float]


def check_rect(rect: Sequence[float]) -> Rect:
    if len(rect) != 4:
        raise ValueError(f"rectangle needs 4 numbers, got {len(rect)}")
    x0, y0, x1, y1 = (float(v) for v in rect)
    if not (0.0 <= x0 < x1 <= 1.0):
        raise ValueError(f"bad x extent in rect {list(rect)}: need 0 <= x_min < x_max <= 1")
    if not (0.0 <= y0 < y1 <= 1.0):
        raise ValueError(f"bad y extent in rect {list(rect)}: need 0 <= y_min < y_max <= 1")
    return (x0, y0, x1, y1)


@dataclass(frozen=True)
class AoiRegion:
    zone: ZoneLabel
    rects: tuple[Rect, ...]

    def __post_init__(self):
        object.__setattr__(self, "zone", ZoneLabel(self.zone))
        object.__setattr__(self, "rects", tuple(check_rect(r) for r in self.rects))

    def contains(self, x: float, y: float) -> bool:
        return any(x0 <= x <= x1 and y0 <= y <= y1 for x0, y0, x1, y1 in self.rects)


@dataclass(frozen=True)
class AoiSet:
    """Prioritized zone geometry; earlier regions win on overlap.

    Points matching no rectangle fall through to ``Objects``.
    """

    stimulus_id: str
    regions: tuple[AoiRegion, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "regions", tuple(self.regions))

    def region(self, zone: ZoneLabel) -> AoiRegion | None:
        for r in self.regions:
            if r.zone is zone:
                return r
        return None

    def anchor(self, zone: ZoneLabel) -> tuple[float, float]:
        """Centroid of the zone's first rectangle; Objects sits at the right edge."""
        if zone is ZoneLabel.OBJECTS:
            return OBJECTS_ANCHOR
        reg = self.region(zone)
        if reg is None or not reg.rects:
            raise ValueError(f"AOI set {self.stimulus_id!r} has no rectangle for {zone.value}")
        x0, y0, x1, y1 = reg.rects[0]
        return ((x0 + x1) / 2.0, (y0 + y1) / 2.0)


OBJECTS_ANCHOR = (0.92, 0.5)


def zone_of(x: float, y: float, aoi: AoiSet) -> ZoneLabel:
    for region in aoi.regions:
        if region.contains(x, y):
            return region.zone
    return ZoneLabel.OBJECTS


def zone_codes(x: np.ndarray, y: np.ndarray, aoi: AoiSet) -> np.ndarray:
    """Vectorized :func:`zone_of`, returning indices into :data:`ZONES`."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    codes = np.full(x.shape, OBJECTS_CODE, dtype=np.int64)
    unassigned = np.ones(x.shape, dtype=bool)
    for region in aoi.regions:
        hit = np.zeros(x.shape, dtype=bool)
        for x0, y0, x1, y1 in region.rects:
            hit |= (x >= x0) & (x <= x1) & (y >= y0) & (y <= y1)
        hit &= unassigned
        codes[hit] = region.zone.index
        unassigned &= ~hit
    return codes


FRACTION_SUM_TOL = 1e-9


@dataclass(frozen=True)
class FeatureVector:
    """Per-recording dwell fractions over the five zones, in :data:`ZONES` order."""

    fractions: tuple[float, ...]
    subject_id: str = ""
    label: Label | None = None

    def __post_init__(self):
        fr = tuple(float(f) for f in self.fractions)
        if len(fr) != N_ZONES:
            raise ValueError(f"expected {N_ZONES} fractions, got {len(fr)}")
        if any(not (0.0 <= f <= 1.0) for f in fr):
            raise ValueError(f"fractions must lie in [0, 1]: {fr}")
        if abs(math.fsum(fr) - 1.0) > FRACTION_SUM_TOL:
            raise ValueError(f"fractions must sum to 1 within {FRACTION_SUM_TOL}: sum={math.fsum(fr)!r}")
        object.__setattr__(self, "fractions", fr)
        if self.label is not None:
            object.__setattr__(self, "label", Label(self.label))

    def __getitem__(self, zone: ZoneLabel) -> float:
        return self.fractions[ZoneLabel(zone).index]

    def as_array(self) -> np.ndarray:
        return np.array(self.fractions, dtype=np.float64)


@dataclass(frozen=True)
class Fixation:
    centroid_x: float
    centroid_y: float
    start_ms: float
    duration_ms: float
    sample_count: int
    # sample index range [first_index, last_index] in the source recording
    first_index: int = field(default=-1, compare=False)
    last_index: int = field(default=-1, compare=False)

    def __post_init__(self):
        if not self.duration_ms > 0:
            raise ValueError(f"fixation duration must be positive, got {self.duration_ms}")
        if self.sample_count < 1:
            raise ValueError("fixation needs at least one sample")
