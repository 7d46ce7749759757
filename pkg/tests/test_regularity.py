from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bvloewner.drivers import C2_GALLERY, make_example
from bvloewner.errors import ConditionError, DivergentIntegralError, DomainError
from bvloewner.regularity import (derivative_report, flow_property_residual, flow_property_table,
                                  tangent_of_sqrt_parametrization, theta_derivative, theta_fd,
                                  z_factor, z_factor_ratio)
from bvloewner.trace import trace_per_anchor, uniform_grid

from oracles import RAY


@pytest.mark.parametrize("name", C2_GALLERY)
def test_theta_prime_at_zero(name):
    assert theta_derivative(make_example(name), 0.0) == -4.0


@pytest.mark.parametrize("c", sorted(RAY))
@pytest.mark.parametrize("t0", [0.25, 0.5, 1.0])
def test_theta_prime_on_ray(c, t0):
    # theta_t = t gamma_1^2, so theta' = gamma_1^2 at every t0
    _, _, g1sq = RAY[c]
    d = make_example("sqrt", c=c, horizon=1.5)
    got = theta_derivative(d, t0, force=True)
    assert abs(got - g1sq) < 1e-5 * abs(g1sq)
    fd = theta_fd(d, t0, 1e-3)
    assert abs(fd - g1sq) < 1e-4 * abs(g1sq)


def test_zero_driver_derivative_everywhere():
    d = make_example("zero", horizon=2.0)
    for t0 in (0.1, 1.0):
        assert theta_derivative(d, t0) == pytest.approx(-4.0, abs=1e-12)


def test_gate_requires_c2_or_force():
    d = make_example("sqrt", horizon=1.5)
    with pytest.raises(ConditionError):
        theta_derivative(d, 0.5)
    with pytest.raises(DivergentIntegralError):
        theta_derivative(make_example("spiral"), 1.0, force=True)


def test_domain_errors():
    d = make_example("power")
    with pytest.raises(DomainError):
        theta_derivative(d, 1.5)
    with pytest.raises(DomainError):
        z_factor(d, 0.5, 0.7)
    with pytest.raises(DomainError):
        theta_fd(d, 1.0, 1e-3)
    assert z_factor(d, 0.5, 0.0) == 1.0


def test_z_factor_matches_defining_ratio():
    d = make_example("power", horizon=1.2)
    for s in (0.2, 0.5):
        z = z_factor(d, 0.5, s)
        r = z_factor_ratio(d, 0.5, s, 1e-4)
        assert abs(z - r) < 1e-2 * abs(z)


@settings(max_examples=5)
@given(st.floats(0.6, 1.0), st.floats(-1.0, 1.0).filter(lambda a: abs(a) > 0.05))
def test_power_analytic_matches_fd(alpha, a):
    d = make_example("power", a=a, alpha=alpha, horizon=1.1)
    an = theta_derivative(d, 0.5, force=True)
    fd = theta_fd(d, 0.5, 1e-3)
    assert abs(an - fd) < 1e-2 * abs(an)


def test_flow_property():
    d = make_example("sqrt")
    assert flow_property_residual(d, 0.5, 0.3, 0.2) < 1e-9
    tab = flow_property_table(d, 0.5, [0.1, 0.5], [0.1, 0.2, 0.5])
    assert tab.shape == (2, 3) and tab.max() < 1e-9
    with pytest.raises(DomainError):
        flow_property_table(d, 0.5, [0.6], [0.1])


def test_derivative_report_csv(tmp_path):
    d = make_example("power")
    rep = derivative_report(d, [0.25, 0.5])
    assert rep.c2_flag == "pass" and np.all(rep.rel_err < 1e-2)
    rep.to_csv(tmp_path / "d.csv")
    rows = (tmp_path / "d.csv").read_text().splitlines()
    assert rows[0].startswith("t0,re_analytic") and len(rows) == 3


def test_tangent_constant_for_slit_and_ray():
    for d in (make_example("zero"), make_example("sqrt")):
        s = np.linspace(0, 1, 65)
        tr = trace_per_anchor(d, s ** 2)
        rep = tangent_of_sqrt_parametrization(tr)
        assert rep.max_jump < 1e-6
    tr = trace_per_anchor(make_example("zero"), np.linspace(0, 1, 65) ** 2)
    np.testing.assert_allclose(tangent_of_sqrt_parametrization(tr).angles, np.pi / 2, atol=1e-6)


def test_tangent_spiral_winds():
    d = make_example("spiral")
    s = np.linspace(0, 1, 513)
    calm = tangent_of_sqrt_parametrization(trace_per_anchor(make_example("power"), s ** 2))
    wild = tangent_of_sqrt_parametrization(trace_per_anchor(d, s ** 2))
    # the winding is log-log slow, so on a uniform grid it is a modest but clear excess
    assert wild.winding > 3 * calm.winding
    assert wild.max_jump > 3 * calm.max_jump
