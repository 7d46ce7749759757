from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bvloewner.drivers import BVLR_GALLERY, make_example, reversed_increment
from bvloewner.errors import DomainError, NonConvergenceError
from bvloewner.reverse import (SolverConfig, branch_sqrt_step, envelope_check, regularization_ladder,
                               solve_endpoints, solve_phi, solve_phi_zero, solve_zero_endpoints,
                               with_overrides, xy_identity_check)

from oracles import RAY


def _gal(name):
    return make_example("sqrt", c=1.0) if name == "sqrt" else make_example(name)


def test_zero_driver_is_exact():
    p = solve_phi_zero(reversed_increment(make_example("zero"), 1.0))
    # the accepted rung starts at -y^2, about 1e-11
    np.testing.assert_allclose(p.phi, -4 * p.s, rtol=0, atol=1e-10)
    # sqrt starts at i y for the accepted rung, then locks onto 2i sqrt(s)
    assert abs(p.sqrt[0]) == pytest.approx(p.meta["y"])
    np.testing.assert_allclose(p.sqrt[1:], 2j * np.sqrt(p.s[1:]), atol=1e-8)


@given(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False).filter(
    lambda w: w.imag > 1e-3 or w.real < -1e-3), st.floats(0.01, 1.0))
def test_zero_driver_from_any_start(w, s):
    p = solve_phi(reversed_increment(make_example("zero"), 1.0), w, s_end=s)
    assert p.end == pytest.approx(w - 4 * s, abs=1e-10 * (1 + abs(w)))


@pytest.mark.parametrize("c", sorted(RAY))
def test_ray_tip(c):
    _, g1, _ = RAY[c]
    r = solve_zero_endpoints(make_example("sqrt", c=c), [1.0])
    assert abs(r.ends[0] - g1) < 1e-9
    assert r.err[0] < 1e-5   # |a2 - a1| / 3 is conservative after extrapolation


@given(st.floats(1e-3, 1.0))
def test_ray_scaling(t):
    _, g1, _ = RAY[1.0]
    r = solve_zero_endpoints(make_example("sqrt", c=1.0), [t])
    assert abs(r.ends[0] - np.sqrt(t) * g1) < 1e-9


@given(st.floats(-1.9, 1.9), st.floats(0.05, 1.0))
def test_reflection_symmetry(c, t):
    a = solve_zero_endpoints(make_example("sqrt", c=c), [t]).ends[0]
    b = solve_zero_endpoints(make_example("sqrt", c=-c), [t]).ends[0]
    assert abs(a + np.conj(b)) < 1e-9


def test_branch_sqrt_step_upper_and_continuous():
    assert branch_sqrt_step(1j, -4.0 + 1e-3j).imag > 0
    # on the cut: pick the root next to the previous value
    assert branch_sqrt_step(1.0 + 0j, 4.0) == pytest.approx(2.0)
    assert branch_sqrt_step(-1.0 + 0j, 4.0) == pytest.approx(-2.0)
    with pytest.raises(DomainError):
        branch_sqrt_step(-1j, 1.0)


def test_positive_real_start_rejected():
    with pytest.raises(DomainError):
        solve_phi(reversed_increment(make_example("sqrt"), 1.0), 1.0)


@pytest.mark.parametrize("name", BVLR_GALLERY)
def test_path_in_upper_half_plane_and_envelopes(name):
    d = _gal(name)
    for t in (0.3, 1.0):
        p = solve_phi_zero(reversed_increment(d, t))
        assert np.all(p.Y >= -1e-12)
        assert xy_identity_check(p).passed
        if name != "monotone_bvlr":
            assert envelope_check(p).passed


def test_xy_rejects_mismatched_increment():
    d = make_example("sqrt")
    p = solve_phi_zero(reversed_increment(d, 1.0))
    with pytest.raises(DomainError):
        xy_identity_check(p, reversed_increment(d, 0.5))


@pytest.mark.parametrize("name", ["sqrt", "logsqrt", "spiral"])
def test_schemes_agree(name):
    d = _gal(name)
    a = solve_zero_endpoints(d, [0.5, 1.0]).ends
    b = solve_zero_endpoints(d, [0.5, 1.0], cfg=SolverConfig(scheme="predictor-corrector")).ends
    assert np.max(np.abs(a - b)) < 1e-6


def test_richardson_improves_on_coarse():
    d = make_example("sqrt")
    _, g1, _ = RAY[1.0]
    plain = solve_zero_endpoints(d, [1.0], cfg=SolverConfig(richardson=False)).ends[0]
    rich = solve_zero_endpoints(d, [1.0]).ends[0]
    assert abs(rich - g1) < abs(plain - g1)


def test_ladder_gaps_decrease_geometrically():
    b = reversed_increment(make_example("sqrt"), 1.0)
    gaps, s, paths = regularization_ladder(b, 2.0 ** -np.arange(1, 15))
    assert paths.shape == (14, len(s))
    assert np.all(np.diff(gaps) < 0)
    # w = -y^2 with y halved: gaps shrink by about 4
    assert 3.0 < gaps[-2] / gaps[-1] < 5.0
    with pytest.raises(DomainError):
        regularization_ladder(b, [0.5, 0.5])


def test_ladder_exhaustion_raises():
    cfg = SolverConfig(cauchy_tol=1e-30, ladder_rungs=4)
    with pytest.raises(NonConvergenceError) as ei:
        solve_phi_zero(reversed_increment(make_example("sqrt"), 1.0), cfg)
    assert ei.value.anchor == 1.0
    r = solve_zero_endpoints(make_example("sqrt"), [1.0], cfg=cfg, raise_on_fail=False)
    assert not r.converged[0]


def test_solve_endpoints_matches_solve_phi():
    d = make_example("logsqrt")
    w = -0.3 + 0.2j
    a, _ = solve_endpoints(d, [0.7], [w], s_end=[0.4])
    p = solve_phi(reversed_increment(d, 0.7), w, s_end=0.4)
    assert abs(a[0] ** 2 - p.end) < 1e-12


def test_base_step_mesh():
    cfg = SolverConfig(base_step=1e-2)
    assert cfg.cells_for(0.5) == 50
    assert with_overrides(cfg, base_step=None).base_step == 1e-2
    assert with_overrides(cfg, cells=64).cells == 64


@pytest.mark.parametrize("kw", [dict(cells=0), dict(base_step=-1.0), dict(ladder_base=1.0),
                                dict(cauchy_tol=0.0), dict(scheme="euler")])
def test_config_validation(kw):
    with pytest.raises(DomainError):
        SolverConfig(**kw)


def test_certified_prefix_and_csv(tmp_path):
    p = solve_phi_zero(reversed_increment(make_example("sqrt", c=1.9), 1.0))
    s0, delta = p.certified_prefix()
    assert s0 == pytest.approx(1.0) and delta == pytest.approx(1.9)
    p.to_csv(tmp_path / "phi.csv")
    lines = (tmp_path / "phi.csv").read_text().splitlines()
    assert lines[0].startswith("s,re_phi") and len(lines) == len(p.s) + 1
