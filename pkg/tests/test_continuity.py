from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bvloewner.continuity import (PerturbationExperiment, driver_distances, equicontinuity_profile,
                                  perturb, run_perturbation_sweep)
from bvloewner.drivers import DelayMixDriver, PiecewiseLinearDriver, make_example
from bvloewner.errors import DomainError


@given(st.floats(1e-5, 0.5), st.integers(0, 100))
@settings(max_examples=15)
def test_tv_families_have_the_requested_magnitude(m, seed):
    base = make_example("sqrt")
    for fam in ("bump", "jitter"):
        exp = PerturbationExperiment(base, fam, seed=seed)
        tv, sup = driver_distances(base, perturb(exp, m))
        assert tv == pytest.approx(m, rel=1e-6)
        assert sup <= tv + 1e-15


def test_bump_sup_distance_is_half_the_variation():
    base = make_example("sqrt")
    tv, sup = driver_distances(base, perturb(PerturbationExperiment(base, "bump"), 1e-2))
    assert sup == pytest.approx(5e-3, rel=1e-9)


def test_mollify_is_uniform_mode():
    exp = PerturbationExperiment(make_example("sqrt"), "mollify")
    assert exp.mode == "uniform"
    assert isinstance(perturb(exp, 1e-3), DelayMixDriver)


@pytest.mark.parametrize("fam", ["bump", "jitter", "mollify"])
def test_sweeps_decrease(fam):
    rep = run_perturbation_sweep(PerturbationExperiment(make_example("sqrt"), fam, grid_n=32))
    assert rep.decreasing
    d = [r.trace_dist for r in rep.rows]
    assert d[-1] < d[0] / 100


def test_sweep_csv(tmp_path):
    exp = PerturbationExperiment(make_example("zero"), "bump", magnitudes=(1e-1, 1e-2), grid_n=16)
    rep = run_perturbation_sweep(exp)
    assert rep.passed(1e-2)
    rep.to_csv(tmp_path / "s.csv")
    rows = (tmp_path / "s.csv").read_text().splitlines()
    assert rows[0] == "magnitude,tv_dist,sup_dist,trace_dist" and len(rows) == 3


@pytest.mark.parametrize("kw", [dict(family="warp"), dict(magnitudes=(1e-2, 1e-1)),
                                dict(magnitudes=()), dict(grid_n=1)])
def test_experiment_validation(kw):
    with pytest.raises(DomainError):
        PerturbationExperiment(make_example("zero"), **kw)


def test_equicontinuity_flags_outlier():
    base = make_example("sqrt")
    fam = [DelayMixDriver(base, w) for w in (1e-1, 1e-2, 1e-3)]
    t = np.linspace(0, 1, 401)
    saw = PiecewiseLinearDriver(np.stack([t, 0.5 * (np.arange(401) % 2)], axis=1))
    rep = equicontinuity_profile([*fam, saw])
    assert rep.flagged == (3,)
    assert np.all(np.diff(rep.modulus) <= 1e-12)
    ok = equicontinuity_profile(fam)
    assert ok.flagged == ()
    # the shared modulus of the mollified family is controlled by the base driver
    assert ok.modulus[-1] < 0.1


def test_equicontinuity_needs_shared_horizon():
    with pytest.raises(DomainError):
        equicontinuity_profile([make_example("zero"), make_example("zero", horizon=2.0)])
    with pytest.raises(DomainError):
        equicontinuity_profile([])
