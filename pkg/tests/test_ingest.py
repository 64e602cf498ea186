import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gazescreen.core import AoiSet, FeatureVector, Familiarity, GazeRecording, Label, ScreenGeometry, ZoneLabel, zone_of
from gazescreen.errors import (IoFailure, MalformedHeader, MalformedRow, NonMonotonicTime, RowSumViolation,
                               SchemaViolation)
from gazescreen.ingest import (CohortManifest, ManifestEntry, aoi_from_dict, format_features_csv, format_gaze_csv,
                               read_aoi_json, read_features_csv, read_gaze_csv, read_manifest, sidecar_path,
                               write_aoi_json, write_features_csv, write_gaze_csv, write_manifest)

from conftest import random_recording


def test_parse_two_rows(tmp_path):
    p = tmp_path / "r.csv"
    p.write_text("t_ms,x,y,valid\n0,0.5,0.5,1\n16.7,0.52,0.5,1\n")
    rec = read_gaze_csv(p)
    assert len(rec) == 2 and rec.subject_id == "r" and rec.geometry == ScreenGeometry()
    assert rec.t_ms.tolist() == [0.0, 16.7] and rec.valid.all()


def test_bad_number_reports_row(tmp_path):
    p = tmp_path / "r.csv"
    p.write_text("t_ms,x,y,valid\nabc,0.5,0.5,1\n")
    with pytest.raises(MalformedRow) as ei:
        read_gaze_csv(p)
    assert ei.value.row == 1


@pytest.mark.parametrize("header", ["t,x,y,valid", "x,t_ms,y,valid", ""])
def test_wrong_header(tmp_path, header):
    p = tmp_path / "r.csv"
    p.write_text(header + "\n0,0.5,0.5,1\n")
    with pytest.raises(MalformedHeader):
        read_gaze_csv(p)


def test_non_monotonic_time_reports_row(tmp_path):
    p = tmp_path / "r.csv"
    p.write_text("t_ms,x,y,valid\n0,0.5,0.5,1\n10,0.5,0.5,1\n10,0.5,0.5,1\n")
    with pytest.raises(NonMonotonicTime) as ei:
        read_gaze_csv(p)
    assert ei.value.row == 3


def test_bad_valid_flag(tmp_path):
    p = tmp_path / "r.csv"
    p.write_text("t_ms,x,y,valid\n0,0.5,0.5,yes\n")
    with pytest.raises(MalformedRow):
        read_gaze_csv(p)


def test_missing_file_is_io_failure(tmp_path):
    with pytest.raises(IoFailure):
        read_gaze_csv(tmp_path / "nope.csv")


def test_canonical_line_format(tmp_path):
    rec = GazeRecording([0.0], [0.5], [0.5], [True])
    assert format_gaze_csv(rec) == "t_ms,x,y,valid\n0.000000,0.500000,0.500000,1\n"
    p = tmp_path / "e.csv"
    write_gaze_csv(GazeRecording([], [], []), p)
    assert p.read_bytes() == b"t_ms,x,y,valid\n"


def test_refuses_invalid_recording(tmp_path):
    with pytest.raises(ValueError):
        write_gaze_csv(GazeRecording([0, 0], [0.5, 0.5], [0.5, 0.5]), tmp_path / "x.csv")


def test_sidecar_carries_metadata(tmp_path):
    rec = GazeRecording([0, 10], [0.1, 0.2], [0.3, 0.4], subject_id="kid", stimulus_id="mom",
                        familiarity=Familiarity.KNOWN, geometry=ScreenGeometry(640, 480))
    p = tmp_path / "a.csv"
    write_gaze_csv(rec, p, sidecar={"note": 1})
    assert json.loads(sidecar_path(p).read_text())["note"] == 1
    back = read_gaze_csv(p)
    assert back == rec
    assert read_gaze_csv(p, subject_id="other").subject_id == "other"


@pytest.mark.parametrize("seed", range(100))
def test_gaze_round_trip_is_byte_stable(tmp_path, seed):
    rng = np.random.default_rng(seed)
    rec = random_recording(rng, int(rng.integers(0, 60)))
    first = format_gaze_csv(rec)
    p = tmp_path / "g.csv"
    p.write_text(first)
    back = read_gaze_csv(p)
    assert format_gaze_csv(back) == first
    # canonical data survives unchanged
    p.write_text(format_gaze_csv(back))
    assert read_gaze_csv(p) == back


def test_crlf_is_accepted(tmp_path):
    p = tmp_path / "r.csv"
    p.write_bytes(b"t_ms,x,y,valid\r\n0,0.5,0.5,1\r\n")
    assert len(read_gaze_csv(p)) == 1


# -- AOI -----------------------------------------------------------------------

def test_single_region_document():
    aoi = aoi_from_dict({"stimulus_id": "f", "regions": [{"zone": "Eyes", "rects": [[0.30, 0.25, 0.70, 0.40]]}]})
    assert len(aoi.regions) == 1 and aoi.regions[0].zone is ZoneLabel.EYES


@pytest.mark.parametrize("doc", [
    {"stimulus_id": "f", "regions": [{"zone": "Eyes", "rects": [[0.7, 0.2, 0.3, 0.4]]}]},
    {"stimulus_id": "f", "regions": [{"zone": "Nose", "rects": [[0.1, 0.1, 0.2, 0.2]]}]},
    {"stimulus_id": "f", "regions": [{"zone": "Eyes", "rects": [[0.1, 0.1, 1.2, 0.2]]}]},
    {"stimulus_id": "f", "regions": [{"zone": "Eyes", "rects": [[0.1, 0.1, 0.2]]}]},
    {"stimulus_id": "f"},
    [],
])
def test_schema_violations(doc):
    with pytest.raises(SchemaViolation):
        aoi_from_dict(doc)


def test_duplicate_zones_merge_at_first_priority():
    doc = {"stimulus_id": "f", "regions": [
        {"zone": "Eyes", "rects": [[0.1, 0.1, 0.3, 0.3]]},
        {"zone": "FaceOther", "rects": [[0.0, 0.0, 1.0, 1.0]]},
        {"zone": "Eyes", "rects": [[0.6, 0.6, 0.9, 0.9]]},
    ]}
    aoi = aoi_from_dict(doc)
    assert [r.zone for r in aoi.regions] == [ZoneLabel.EYES, ZoneLabel.FACE_OTHER]
    # oracle: winner is the containing zone whose first listing comes earliest
    first_seen = {}
    for k, reg in enumerate(doc["regions"]):
        first_seen.setdefault(reg["zone"], k)
    g = np.linspace(0, 1, 100)
    for x in g:
        for y in g:
            hits = [reg["zone"] for reg in doc["regions"]
                    for x0, y0, x1, y1 in reg["rects"] if x0 <= x <= x1 and y0 <= y <= y1]
            want = min(hits, key=first_seen.get) if hits else "Objects"
            assert zone_of(x, y, aoi).value == want


def test_aoi_round_trip(tmp_path):
    from gazescreen.synth import default_aoi
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    write_aoi_json(default_aoi(), a)
    write_aoi_json(read_aoi_json(a), b)
    assert a.read_bytes() == b.read_bytes()
    assert read_aoi_json(b) == default_aoi()


def test_aoi_bad_json(tmp_path):
    p = tmp_path / "a.json"
    p.write_text("{nope")
    with pytest.raises(SchemaViolation):
        read_aoi_json(p)


# -- features ------------------------------------------------------------------

def test_feature_row_parses(tmp_path):
    p = tmp_path / "f.csv"
    write_features_csv(p, [FeatureVector((0.4, 0.2, 0.2, 0.1, 0.1), "s1", Label.TD)])
    assert p.read_text().splitlines()[1] == "s1,TD,0.400000,0.200000,0.200000,0.100000,0.100000"
    fv, = read_features_csv(p, require_labels=True)
    assert fv.label is Label.TD and fv.fractions == (0.4, 0.2, 0.2, 0.1, 0.1)


def test_row_sum_violation(tmp_path):
    p = tmp_path / "f.csv"
    p.write_text("subject_id,label,f_eyes,f_mouth,f_face_other,f_body,f_objects\ns,TD,0.4,0.2,0.1,0.1,0.1\n")
    with pytest.raises(RowSumViolation) as ei:
        read_features_csv(p)
    assert ei.value.row == 1


def test_labels_required_for_training_tables(tmp_path):
    p = tmp_path / "f.csv"
    write_features_csv(p, [FeatureVector((1, 0, 0, 0, 0), "s")])
    assert read_features_csv(p)[0].label is None
    with pytest.raises(SchemaViolation):
        read_features_csv(p, require_labels=True)


fractions = st.lists(st.floats(0, 1, allow_subnormal=False), min_size=5, max_size=5).filter(
    lambda v: sum(v) > 1e-3).map(lambda v: tuple(u / sum(v) for u in v))


@given(st.lists(fractions, min_size=1, max_size=8))
def test_features_round_trip(tmp_path_factory, rows):
    d = tmp_path_factory.mktemp("f")
    vecs = [FeatureVector(fr, f"s{i}", Label.ASD if i % 2 else Label.TD) for i, fr in enumerate(rows)]
    write_features_csv(d / "a.csv", vecs)
    back = read_features_csv(d / "a.csv")
    for v, b in zip(vecs, back):
        assert max(abs(p - q) for p, q in zip(v.fractions, b.fractions)) <= 1e-6
        assert b.subject_id == v.subject_id and b.label is v.label
    write_features_csv(d / "b.csv", back)
    assert (d / "a.csv").read_bytes() == (d / "b.csv").read_bytes()


@given(fractions)
def test_written_rows_sum_to_exactly_one(fr):
    line = format_features_csv([FeatureVector(fr, "s")]).splitlines()[1]
    units = [int(f.replace(".", "")) for f in line.split(",")[2:]]
    assert sum(units) == 10 ** 6


# -- manifest ------------------------------------------------------------------

def test_manifest_round_trip(tmp_path):
    m = CohortManifest((ManifestEntry("a", Label.TD, "a.csv", "f"),
                        ManifestEntry("b", Label.ASD, "sub/b.csv", "f", Familiarity.KNOWN)), root=tmp_path)
    write_manifest(m, tmp_path / "m.json")
    back = read_manifest(tmp_path / "m.json")
    assert back.entries == m.entries and back.root == tmp_path
    write_manifest(back, tmp_path / "m2.json")
    assert (tmp_path / "m.json").read_bytes() == (tmp_path / "m2.json").read_bytes()


def test_manifest_rejects_duplicates_and_absolute_paths(tmp_path):
    with pytest.raises(SchemaViolation):
        CohortManifest((ManifestEntry("a", Label.TD, "a.csv"), ManifestEntry("a", Label.ASD, "b.csv")))
    p = tmp_path / "m.json"
    p.write_text(json.dumps([{"subject_id": "a", "label": "TD", "recording": "/abs.csv"}]))
    with pytest.raises(SchemaViolation):
        read_manifest(p)
    p.write_text(json.dumps([{"subject_id": "a", "recording": "a.csv"}]))
    with pytest.raises(SchemaViolation):
        read_manifest(p)


def test_failed_write_leaves_no_partial_file(tmp_path, monkeypatch):
    import os
    target = tmp_path / "out.csv"

    def boom(*a, **k):
        raise OSError("disk full")
    monkeypatch.setattr(os, "replace", boom)
    with pytest.raises(IoFailure):
        write_gaze_csv(GazeRecording([0], [0.5], [0.5]), target)
    assert list(tmp_path.iterdir()) == []
