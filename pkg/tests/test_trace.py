from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st
from shapely.geometry import LineString, Point

from bvloewner.drivers import BVLR_GALLERY, make_example
from bvloewner.errors import DomainError, DriftError
from bvloewner.trace import (IncrementalConfig, TracePath, segment_distances, simpleness_check,
                             trace_incremental, trace_per_anchor, uniform_grid)

from oracles import RAY


def _gal(name):
    return make_example("sqrt", c=1.0) if name == "sqrt" else make_example(name)


def test_vertical_slit():
    p = trace_per_anchor(make_example("zero"), uniform_grid(1.0, 256))
    assert np.max(np.abs(p.gamma - 2j * np.sqrt(p.t))) < 1e-9
    assert np.max(np.abs(p.theta + 4 * p.t)) < 1e-10


@pytest.mark.parametrize("c", sorted(RAY))
def test_ray_is_straight(c):
    _, g1, _ = RAY[c]
    p = trace_per_anchor(make_example("sqrt", c=c), uniform_grid(1.0, 64))
    assert np.max(np.abs(p.gamma - np.sqrt(p.t) * g1)) < 1e-9


@pytest.mark.parametrize("name", BVLR_GALLERY)
def test_incremental_matches_per_anchor(name):
    d = _gal(name)
    g = uniform_grid(d.horizon, 64)
    a = trace_per_anchor(d, g)
    b = trace_incremental(d, g, icfg=IncrementalConfig(reanchor_every=0))
    assert np.max(np.abs(a.gamma - b.gamma)) < 1e-5
    assert b.method == "incremental" and b.meta["drift_checks"] == []


def test_reanchoring_replaces_values():
    d = make_example("logsqrt")
    g = uniform_grid(1.0, 32)
    a = trace_per_anchor(d, g)
    b = trace_incremental(d, g, icfg=IncrementalConfig(reanchor_every=8))
    assert [t for t, _ in b.meta["drift_checks"]] == [0.25, 0.5, 0.75, 1.0]
    for k in (8, 16, 24, 32):
        assert b.gamma[k] == a.gamma[k]


def test_drift_error_when_tolerance_is_impossible():
    d = make_example("logsqrt")
    with pytest.raises(DriftError) as ei:
        trace_incremental(d, uniform_grid(1.0, 32),
                          icfg=IncrementalConfig(reanchor_every=8, drift_tol=1e-16))
    assert ei.value.anchor == 0.25


@pytest.mark.parametrize("grid", [[0.0], [0.1, 0.5], [0.0, 0.5, 0.4], [0.0, 2.0]])
def test_bad_grids(grid):
    with pytest.raises(DomainError):
        trace_per_anchor(make_example("sqrt"), grid)


def test_uniform_grid():
    np.testing.assert_allclose(uniform_grid(2.0, 4), [0, 0.5, 1, 1.5, 2])
    with pytest.raises(DomainError):
        uniform_grid(1.0, 0)


def test_csv_columns(tmp_path):
    p = trace_per_anchor(make_example("zero"), uniform_grid(1.0, 4))
    p.to_csv(tmp_path / "t.csv", sqrt_time=True)
    rows = (tmp_path / "t.csv").read_text().splitlines()
    assert rows[0] == "t,re_gamma,im_gamma,err_estimate,sqrt_t"
    assert len(rows) == 6
    assert float(rows[-1].split(",")[2]) == pytest.approx(2.0)


@pytest.mark.parametrize("name", BVLR_GALLERY)
def test_gallery_traces_are_simple(name):
    d = _gal(name)
    r = simpleness_check(trace_per_anchor(d, uniform_grid(d.horizon, 128)))
    assert r.passed and r.intersections == 0


def test_self_intersection_detected():
    z = np.array([0, 1, 1 + 1j, 0.5 - 0.5j], complex)
    p = TracePath(np.arange(4.0), z, np.zeros(4), "synthetic")
    r = simpleness_check(p)
    assert not r.passed and r.intersections == 1


def test_near_touch_detected():
    # a hairpin: the return leg runs 0.1 x spacing from the outgoing leg
    z = np.array([0, 1, 2, 2 + 0.1j, 1 + 0.1j, 0.1j], complex)
    r = simpleness_check(TracePath(np.arange(6.0), z, np.zeros(6), "synthetic"))
    assert not r.passed and r.min_ratio == pytest.approx(0.1)


_pt = st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False)


@given(_pt, _pt, _pt, _pt)
def test_segment_distance_against_shapely(a0, a1, b0, b1):
    def geom(p, q):
        # shapely gives inf for (near) zero-length line strings; a point is within 1e-12
        return Point(p.real, p.imag) if abs(p - q) < 1e-12 else LineString([(p.real, p.imag), (q.real, q.imag)])

    ref = geom(a0, a1).distance(geom(b0, b1))
    got = float(segment_distances(np.array([a0]), np.array([a1]), np.array([b0]), np.array([b1]))[0])
    assert got == pytest.approx(ref, abs=1e-9)
