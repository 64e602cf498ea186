import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from gazescreen.core import AoiRegion, AoiSet, GazeRecording, ZoneLabel

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_recording(rng: np.random.Generator, n: int, p_invalid: float = 0.1,
                     spread: float = 0.02) -> GazeRecording:
    """Jittery random walk with clustered positions so fixations actually occur."""
    dt = rng.uniform(5.0, 30.0, size=n)
    t = np.cumsum(dt) - (dt[0] if n else 0.0)
    centers = rng.uniform(0.1, 0.9, size=(max(1, n // 8), 2))
    which = np.minimum(np.arange(n) // 8, len(centers) - 1)
    xy = np.clip(centers[which] + rng.normal(0, spread, size=(n, 2)), 0, 1)
    valid = rng.random(n) >= p_invalid
    return GazeRecording(t, xy[:, 0], xy[:, 1], valid)


def regions_of(aoi: AoiSet):
    return [(r.zone.value, [tuple(rc) for rc in r.rects]) for r in aoi.regions]


@pytest.fixture
def simple_aoi():
    return AoiSet("s", (
        AoiRegion(ZoneLabel.EYES, ((0.3, 0.25, 0.7, 0.4),)),
        AoiRegion(ZoneLabel.MOUTH, ((0.4, 0.55, 0.6, 0.65),)),
        AoiRegion(ZoneLabel.FACE_OTHER, ((0.2, 0.1, 0.8, 0.75),)),
        AoiRegion(ZoneLabel.BODY, ((0.1, 0.75, 0.9, 1.0),)),
    ))


rects = st.tuples(st.floats(0, 0.9), st.floats(0, 0.9), st.floats(0.01, 0.5), st.floats(0.01, 0.5)).map(
    lambda r: (r[0], r[1], min(1.0, r[0] + r[2]), min(1.0, r[1] + r[3])))


def pytest_terminal_summary(terminalreporter):
    from report import RESULTS
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
