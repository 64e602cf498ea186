"""Heatmap (PGM) and scanpath (SVG) rendering plus plot-ready curve tables."""
from __future__ import annotations

import math
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from .classifier import EpochRecord, LearningCurve
from .core import DEFAULT_GEOMETRY, AoiSet, Fixation, GazeRecording, ScreenGeometry
from .errors import EmptyInput, EmptyRecording, SchemaViolation
from .ingest import _lines, _read_text, atomic_write_bytes, atomic_write_text

DEFAULT_KERNEL_SIGMA_PX = 15.0
ZONE_COLORS = {"Eyes": "#1f77b4", "Mouth": "#d62728", "FaceOther": "#2ca02c",
               "Body": "#9467bd", "Objects": "#7f7f7f"}


def pixel_of(x: float, y: float, geometry: ScreenGeometry) -> tuple[int, int]:
    """Column/row of the pixel containing normalized point (x, y)."""
    col = min(int(math.floor(x * geometry.width_px)), geometry.width_px - 1)
    row = min(int(math.floor(y * geometry.height_px)), geometry.height_px - 1)
    return max(col, 0), max(row, 0)


def gaussian_kernel(sigma_px: float) -> np.ndarray:
    r = max(1, int(math.ceil(3.0 * sigma_px)))
    d = np.arange(-r, r + 1, dtype=np.float64)
    return np.exp(-(d * d) / (2.0 * sigma_px * sigma_px))


def heatmap_array(rec: GazeRecording, geometry: ScreenGeometry = DEFAULT_GEOMETRY,
                  kernel_sigma_px: float = DEFAULT_KERNEL_SIGMA_PX) -> np.ndarray:
    """8-bit ``(height, width)`` intensity grid with its maximum scaled to 255.

    Valid samples are binned to the pixel they fall in and the count image is
    blurred with a truncated (3 sigma) Gaussian.  Binning first makes the
    result independent of sample order.
    """
    if not kernel_sigma_px > 0:
        raise ValueError("kernel_sigma_px must be positive")
    v = rec.valid
    if not v.any():
        raise EmptyRecording("heatmap needs at least one valid sample")
    w, h = geometry.width_px, geometry.height_px
    cols = np.clip(np.floor(rec.x[v] * w).astype(np.int64), 0, w - 1)
    rows = np.clip(np.floor(rec.y[v] * h).astype(np.int64), 0, h - 1)
    hist = np.zeros((h, w), dtype=np.float64)
    np.add.at(hist, (rows, cols), 1.0)
    dens = kernels.blur_separable(hist, gaussian_kernel(kernel_sigma_px))
    peak = dens.max()
    return np.rint(dens * (255.0 / peak)).astype(np.uint8)


def encode_pgm(img: np.ndarray) -> bytes:
    h, w = img.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + np.ascontiguousarray(img, dtype=np.uint8).tobytes()


def decode_pgm(data: bytes) -> np.ndarray:
    parts = data.split(b"\n", 3)
    if len(parts) < 4 or parts[0] != b"P5":
        raise SchemaViolation("not a binary PGM image")
    w, h = (int(v) for v in parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8, count=w * h).reshape(h, w)


def render_heatmap(rec: GazeRecording, geometry: ScreenGeometry, kernel_sigma_px: float, out_path) -> None:
    atomic_write_bytes(out_path, encode_pgm(heatmap_array(rec, geometry, kernel_sigma_px)))


def fixation_radius(duration_ms: float, max_duration_ms: float) -> float:
    return 4.0 + 40.0 * duration_ms / max_duration_ms


def scanpath_svg(fixes: Sequence[Fixation], aoi: AoiSet, geometry: ScreenGeometry = DEFAULT_GEOMETRY) -> str:
    W, H = geometry.width_px, geometry.height_px
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
           f'<rect class="background" x="0" y="0" width="{W}" height="{H}" fill="white"/>']
    for region in aoi.regions:
        color = ZONE_COLORS[region.zone.value]
        for x0, y0, x1, y1 in region.rects:
            out.append(f'<rect class="aoi" data-zone="{region.zone.value}" x="{x0 * W:.3f}" y="{y0 * H:.3f}" '
                       f'width="{(x1 - x0) * W:.3f}" height="{(y1 - y0) * H:.3f}" '
                       f'fill="none" stroke="{color}" stroke-width="2"/>')
    pts = [(f.centroid_x * W, f.centroid_y * H) for f in fixes]
    for (ax, ay), (bx, by) in zip(pts, pts[1:]):
        out.append(f'<line class="saccade" x1="{ax:.3f}" y1="{ay:.3f}" x2="{bx:.3f}" y2="{by:.3f}" '
                   f'stroke="black" stroke-width="1.5"/>')
    if fixes:
        longest = max(f.duration_ms for f in fixes)
        for k, (f, (cx, cy)) in enumerate(zip(fixes, pts), start=1):
            r = fixation_radius(f.duration_ms, longest)
            out.append(f'<circle class="fixation" cx="{cx:.3f}" cy="{cy:.3f}" r="{r:.3f}" '
                       f'fill="orange" fill-opacity="0.5" stroke="black"/>')
            out.append(f'<text class="ordinal" x="{cx:.3f}" y="{cy:.3f}" font-size="12" '
                       f'text-anchor="middle" dominant-baseline="central">{k}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_scanpath(fixes: Sequence[Fixation], aoi: AoiSet, geometry: ScreenGeometry, out_path) -> None:
    atomic_write_text(out_path, scanpath_svg(fixes, aoi, geometry))


CURVES_HEADER = "series,epoch,train_loss,train_acc,eval_loss,eval_acc"


def format_curves_csv(curves: Mapping[str, LearningCurve]) -> str:
    if not curves:
        raise EmptyInput("no learning curves to write")
    lines = [CURVES_HEADER]
    for name, curve in curves.items():
        if "," in name:
            raise SchemaViolation(f"series name {name!r} contains a comma")
        for r in curve:
            lines.append(f"{name},{r.epoch},{r.train_loss!r},{r.train_accuracy!r},"
                         f"{r.eval_loss!r},{r.eval_accuracy!r}")
    return "\n".join(lines) + "\n"


def emit_curves_csv(curves: Mapping[str, LearningCurve], out_path) -> None:
    atomic_write_text(out_path, format_curves_csv(curves))


def read_curves_csv(path) -> dict[str, LearningCurve]:
    lines = _lines(_read_text(path))
    if not lines or lines[0] != CURVES_HEADER:
        raise SchemaViolation(f"{path}: expected header {CURVES_HEADER!r}")
    out: dict[str, LearningCurve] = {}
    for row, line in enumerate(lines[1:], start=1):
        f = line.split(",")
        if len(f) != 6:
            raise SchemaViolation(f"row {row}: expected 6 fields")
        out.setdefault(f[0], LearningCurve()).append(
            EpochRecord(int(f[1]), float(f[2]), float(f[3]), float(f[4]), float(f[5])))
    return out
