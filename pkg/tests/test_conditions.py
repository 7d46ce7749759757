from __future__ import annotations

import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bvloewner.conditions import (FAIL, INCONCLUSIVE, PASS, check_c1, check_c2, check_conditions,
                                  default_probe_times, divergence_probe, holder_smallness,
                                  holder_witness)
from bvloewner.drivers import BVLR_GALLERY, C2_GALLERY, PiecewiseLinearDriver, make_example
from bvloewner.errors import DomainError


def _ramp(height=3.0, h=1 / 1024, t0=0.5):
    # sampled driver that jumps by height * sqrt(h) over the single knot interval ending at t0
    tt = np.arange(0, 1 + h / 2, h)
    u = np.where(tt >= t0, height * math.sqrt(h), 0.0)
    return PiecewiseLinearDriver(np.stack([tt, u], axis=1))


@pytest.mark.parametrize("name", BVLR_GALLERY)
def test_c1_passes_on_gallery(name):
    r = check_c1(make_example(name))
    assert r.c1_verdict == PASS
    assert r.tv_finite
    assert all(p.estimate < 1.95 for p in r.c1)


def test_c1_ramp_witness_fails():
    r = check_c1(_ramp(), [0.5])
    assert r.c1_verdict == FAIL
    assert r.c1[0].estimate == pytest.approx(3.0)


def test_c1_ramp_below_two_passes():
    r = check_c1(_ramp(height=1.0), [0.5])
    assert r.c1_verdict == PASS


def test_c1_margin_band_is_inconclusive():
    r = check_c1(_ramp(height=2.0), [0.5])
    assert r.c1_verdict == INCONCLUSIVE


def test_probe_times_inside_horizon():
    for name in BVLR_GALLERY:
        d = make_example(name)
        t = default_probe_times(d)
        assert np.all((t > 0) & (t <= d.horizon))
    with pytest.raises(DomainError):
        check_c1(make_example("zero"), [0.0])


@pytest.mark.parametrize("name,verdict", [("zero", PASS), ("power", PASS), ("sqrt", INCONCLUSIVE),
                                          ("logsqrt", INCONCLUSIVE), ("spiral", FAIL)])
def test_c2_verdicts(name, verdict):
    r = check_c2(make_example(name))
    assert r.c2_verdict == verdict
    if verdict == FAIL:
        assert r.c2_detail["reason"] == "divergent"
        assert 1.0 in r.c2_detail["divergent_at"]


def test_c2_gallery_is_what_passes():
    assert set(C2_GALLERY) == {"zero", "power"}


def test_sqrt_plateau_is_pi_over_two():
    # int_0^t r^{-1/2} d(sqrt t - sqrt(t - r)) = int_0^t dr / (2 sqrt(r (t - r))) = pi / 2
    r = check_c2(make_example("sqrt"))
    assert r.c2_detail["sup_delta"] == pytest.approx(math.pi / 2, rel=1e-3)


def test_c2_bad_ladder():
    with pytest.raises(DomainError):
        check_c2(make_example("zero"), eps_ladder=[0.1, 0.5])


def test_spiral_divergence_pieces_are_log_two():
    p = divergence_probe(make_example("spiral"), 1.0)
    assert p.divergent
    np.testing.assert_allclose(p.pieces[-4:], math.log(2), rtol=1e-3)


@given(st.floats(0.05, 1.0))
def test_power_never_divergent(t):
    assert not divergence_probe(make_example("power"), t).divergent


def test_holder_smallness_on_spiral():
    h = holder_smallness(make_example("spiral"), 1.0)
    assert h.passed and h.decays and h.cauchy_schwarz_ok
    # the energy is finite but the ratio is not bounded by it without the square root
    assert not h.literal_ok
    assert np.all(np.diff(h.ratios[np.argsort(h.scales)]) >= 0)


def test_holder_smallness_fails_for_sqrt_at_origin_scale():
    # U = sqrt(t) at t: ratio at s = t is 1, no decay toward s = t
    h = holder_smallness(make_example("sqrt"), 1.0, scales=[1.0, 0.5, 0.25])
    assert not h.decays


def test_monotone_bvlr_witness_grows():
    w = holder_witness(make_example("monotone_bvlr"))
    r = np.array(w["holder_ratios"])
    assert np.all(np.diff(r) > 0)
    np.testing.assert_allclose(r, w["predicted"], rtol=1e-9)
    assert holder_witness(make_example("zero")) == {}


def test_report_is_json_serializable():
    r = check_conditions(make_example("power"))
    text = json.dumps(r.to_dict())
    back = json.loads(text)
    assert back["c1_verdict"] == PASS and back["c2_verdict"] == PASS
    assert r.verdict == PASS
