"""Empirical continuity of the driver-to-trace map.

A sweep perturbs a base driver along a decreasing magnitude ladder and records
the driver distance (in total variation and uniformly) next to the sup-distance
of the traces. Two topologies are supported: "tv" (perturbations whose total
variation equals the magnitude) and "uniform" (mollification, where only the
uniform distance is small and the variation profiles must be equicontinuous).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .conditions import check_c1
from .drivers import (BumpDriver, DelayMixDriver, Driver, PiecewiseLinearDriver, SumDriver)
from .errors import DomainError, LoewnerError
from .reverse import SolverConfig
from .stieltjes import graded_nodes, piece_counts, piece_cuts
from .trace import trace_per_anchor, uniform_grid

__all__ = [
    "PerturbationExperiment",
    "SweepRow",
    "SweepReport",
    "perturb",
    "driver_distances",
    "run_perturbation_sweep",
    "EquicontinuityReport",
    "equicontinuity_profile",
]

FAMILIES = ("bump", "jitter", "mollify")


@dataclass(frozen=True)
class PerturbationExperiment:
    base: Driver
    family: str = "bump"
    magnitudes: tuple = (1e-1, 1e-2, 1e-3, 1e-4)
    grid_n: int = 128
    seed: int = 0
    bump_start: float = 0.25       # fraction of the horizon
    bump_width: float = 0.5
    jitter_knots: int = 16

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown perturbation family {self.family!r}; choose from {FAMILIES}")
        m = np.asarray(self.magnitudes, dtype=float)
        if len(m) < 1 or np.any(m <= 0) or np.any(np.diff(m) >= 0):
            raise DomainError("magnitudes must be positive and strictly decreasing")
        if self.grid_n < 2:
            raise DomainError("grid_n must be at least 2")

    @property
    def mode(self) -> str:
        return "uniform" if self.family == "mollify" else "tv"


def _jitter(T: float, eps: float, knots: int, seed: int) -> PiecewiseLinearDriver:
    rng = np.random.default_rng(seed)
    t = np.linspace(0.0, T, knots + 1)
    u = np.concatenate([[0.0], rng.standard_normal(knots)])
    tv = np.sum(np.abs(np.diff(u)))
    return PiecewiseLinearDriver(np.stack([t, u * (eps / tv)], axis=1), family="jitter",
                                 params={"eps": eps, "seed": seed})


def perturb(exp: PerturbationExperiment, magnitude: float) -> Driver:
    d = exp.base
    T = d.horizon
    if exp.family == "bump":
        # (h/2)(1 - cos) has total variation 2h, so h = magnitude / 2
        b = BumpDriver(magnitude / 2.0, exp.bump_start * T, exp.bump_width * T, horizon=T)
        return SumDriver([d, b])
    if exp.family == "jitter":
        return SumDriver([d, _jitter(T, magnitude, exp.jitter_knots, exp.seed)])
    return DelayMixDriver(d, width=magnitude)


def _nodes(drivers, n: int = 1 << 14) -> np.ndarray:
    T = min(x.horizon for x in drivers)
    marks = set()
    for x in drivers:
        marks |= {b for b in (*x.breakpoints, *x.singular_times) if 0 < b < T}
    cuts = piece_cuts(0.0, T, sorted(marks))
    return graded_nodes(cuts, piece_counts(cuts, n, 8))


def driver_distances(U: Driver, V: Driver, n: int = 1 << 14) -> tuple[float, float]:
    """(|U - V|_TV, ||U - V||_inf) from a fine graded sampling of the difference."""
    x = _nodes([U, V], n)
    diff = np.asarray(U.value(x)) - np.asarray(V.value(x))
    return float(np.sum(np.abs(np.diff(diff)))), float(np.max(np.abs(diff)))


@dataclass(frozen=True)
class SweepRow:
    magnitude: float
    tv_dist: float
    sup_dist: float
    trace_dist: float
    skipped: str | None = None


@dataclass
class SweepReport:
    family: str
    mode: str
    rows: list
    decreasing: bool
    final_distance: float
    meta: dict = field(default_factory=dict)

    def passed(self, final_tol: float = 1e-3) -> bool:
        return self.decreasing and self.final_distance <= final_tol

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["magnitude", "tv_dist", "sup_dist", "trace_dist"])
            for r in self.rows:
                w.writerow([f"{r.magnitude:.6g}", f"{r.tv_dist:.9g}", f"{r.sup_dist:.9g}",
                            "nan" if r.skipped else f"{r.trace_dist:.9g}"])


def run_perturbation_sweep(exp: PerturbationExperiment, cfg: SolverConfig | None = None,
                           noise: float = 1e-9) -> SweepReport:
    cfg = cfg or SolverConfig()
    grid = uniform_grid(exp.base.horizon, exp.grid_n)
    base = trace_per_anchor(exp.base, grid, cfg)
    probes = np.linspace(exp.base.horizon / 8, exp.base.horizon, 8)
    rows = []
    for m in exp.magnitudes:
        V = perturb(exp, m)
        tv, sup = driver_distances(exp.base, V)
        if check_c1(V, probes).c1_verdict == "fail":
            rows.append(SweepRow(m, tv, sup, float("nan"), "c1"))
            continue
        try:
            tr = trace_per_anchor(V, grid, cfg)
        except LoewnerError as exc:
            rows.append(SweepRow(m, tv, sup, float("nan"), type(exc).__name__))
            continue
        rows.append(SweepRow(m, tv, sup, float(np.max(np.abs(tr.gamma - base.gamma)))))
    dist = [r.trace_dist for r in rows if r.skipped is None]
    dec = len(dist) > 0 and all(b <= a + noise for a, b in zip(dist[:-1], dist[1:]))
    final = dist[-1] if dist else float("inf")
    return SweepReport(exp.family, exp.mode, rows, dec, final,
                       {"grid_n": exp.grid_n, "seed": exp.seed, "base": exp.base.to_dict()})


@dataclass(frozen=True)
class EquicontinuityReport:
    h: np.ndarray
    modulus: np.ndarray            # sup over the family of sup_s (V_n(s+h) - V_n(s))
    per_driver: np.ndarray         # (n_drivers, len(h))
    tv: np.ndarray
    flagged: tuple                 # indices of members whose variation exceeds tv_cap x median


def equicontinuity_profile(drivers, h_ladder=None, tv_cap: float = 10.0, n: int = 4096) -> EquicontinuityReport:
    """Shared modulus of continuity of s -> |U_n|_TV,[0,s] across a family."""
    drivers = list(drivers)
    if not drivers:
        raise DomainError("need at least one driver")
    T = drivers[0].horizon
    if any(abs(d.horizon - T) > 1e-12 * T for d in drivers):
        raise DomainError("drivers must share a horizon")
    h = T * 2.0 ** -np.arange(1, 12) if h_ladder is None else np.asarray(h_ladder, float)
    s = _nodes(drivers, n)
    per = np.zeros((len(drivers), len(h)))
    for i, d in enumerate(drivers):
        for j, hh in enumerate(h):
            lo = s[s <= T - hh]
            per[i, j] = float(np.max(np.asarray(d.variation(lo + hh)) - np.asarray(d.variation(lo))))
    tv = np.array([float(d.variation(T)) for d in drivers])
    med = float(np.median(tv))
    flagged = tuple(int(i) for i in np.nonzero(tv > tv_cap * max(med, 1e-300))[0])
    return EquicontinuityReport(h, per.max(axis=0), per, tv, flagged)
