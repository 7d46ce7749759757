from __future__ import annotations

import cmath

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bvloewner.drivers import BVLR_GALLERY, make_example
from bvloewner.errors import DomainError
from bvloewner.forward import (ForwardConfig, flow_forward, hcap_estimate, large_z_slope,
                               roundtrip_residual)
from bvloewner.reverse import SolverConfig
from bvloewner.trace import trace_per_anchor, uniform_grid


def _upper_sqrt(w):
    r = cmath.sqrt(w)
    return r if r.imag >= 0 else -r


def test_zero_driver_closed_form():
    z = 1 + 1j
    f = flow_forward(make_example("zero"), z, 1.0)
    assert f.alive
    assert abs(f.g_end - _upper_sqrt(z * z + 4)) < 1e-9


@given(st.floats(-3, 3).filter(lambda x: abs(x) > 0.05), st.floats(0.05, 3))
def test_zero_driver_closed_form_property(x, y):
    z = complex(x, y)
    f = flow_forward(make_example("zero"), z, 0.5)
    assert abs(f.g_end - _upper_sqrt(z * z + 2)) < 1e-8 * (1 + abs(z))


@given(st.floats(0.1, 1.9))
def test_swallow_time_on_slit(y):
    f = flow_forward(make_example("zero"), 1j * y, 1.0)
    assert f.status == "swallowed"
    assert f.swallow_time == pytest.approx(y * y / 4, abs=1e-6)


def test_i_is_swallowed_at_a_quarter():
    f = flow_forward(make_example("zero"), 1j)
    assert not f.alive and f.swallow_time == pytest.approx(0.25, abs=1e-9)


def test_record_and_stops():
    f = flow_forward(make_example("sqrt"), 2 + 2j, 1.0, record=True, stops=[0.0, 0.5, 1.0])
    assert f.times[0] == 0.0 and f.times[-1] == 1.0
    assert set(f.stops) == {0.0, 0.5, 1.0}
    assert f.stops[1.0] == f.g_end


@pytest.mark.parametrize("z", [0, -1j, 1 - 1e-3j])
def test_bad_start_points(z):
    with pytest.raises(DomainError):
        flow_forward(make_example("zero"), z)


def test_bad_forward_config():
    with pytest.raises(DomainError):
        ForwardConfig(base_step=0)
    with pytest.raises(DomainError):
        ForwardConfig(eta_levels=1)


def test_hcap_zero_driver_exact():
    r = hcap_estimate(make_example("zero"), 0.5)
    assert r.half_b == pytest.approx(0.5, abs=1e-8)
    assert r.warning is None


@pytest.mark.parametrize("name", BVLR_GALLERY)
def test_hcap_normalization(name):
    d = make_example("sqrt", c=1.0) if name == "sqrt" else make_example(name)
    for r in hcap_estimate(d, [0.25, 1.0]):
        assert abs(r.half_b - r.t) < 1e-6


def test_hcap_domain():
    with pytest.raises(DomainError):
        hcap_estimate(make_example("zero"), 0.0)


def test_large_z_slope():
    slope, errs = large_z_slope(make_example("sqrt"), 1.0)
    assert slope == pytest.approx(-2.0, abs=0.05)
    assert errs[0] > errs[-1]


def test_roundtrip_passes_for_accurate_trace():
    d = make_example("sqrt")
    p = trace_per_anchor(d, uniform_grid(1.0, 64))
    r = roundtrip_residual(d, p, sample=6)
    assert r.passed and r.max_residual < 1e-5
    assert len(r.t) == 6 and np.all(r.raw >= 0)


def test_roundtrip_fails_for_sabotaged_trace():
    d = make_example("sqrt")
    p = trace_per_anchor(d, uniform_grid(1.0, 64), SolverConfig(base_step=0.1), strict=False)
    r = roundtrip_residual(d, p, sample=6)
    assert not r.passed
