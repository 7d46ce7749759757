"""All twelve acceptance criteria at their stated tolerances and wall-time budgets.

The suite runs once per session; each criterion is then its own test, and a
one-line pass/fail summary per criterion is printed at the end of the run.
"""

from __future__ import annotations

import pytest

from bvloewner.acceptance import CHECKS, run_acceptance

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="module")
def results():
    out = {c.name: c for c in run_acceptance(log=ACCEPTANCE_LINES.append)}
    return out


@pytest.mark.slow
@pytest.mark.parametrize("name", sorted(CHECKS, key=lambda n: CHECKS[n][0]))
def test_criterion(results, name):
    c = results[name]
    print(c.line())
    assert c.seconds <= c.budget, f"{name} took {c.seconds:.2f}s, budget {c.budget}s"
    assert c.passed, f"{name}: value {c.value:.3e} vs tolerance {c.tolerance:.1e}; {c.detail}"
