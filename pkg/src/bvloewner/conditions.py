"""Finite-resolution checks of the left-local conditions (C1) and (C2).

(C1) at t:  limsup_{s->0+} |beta^t|_TV,s / sqrt(s) < 2.
(C2):       delta(eps) = sup_t int_0^{eps ^ t} r^{-1/2} d|beta^t|_r -> 0 as eps -> 0.

Neither limit is computable from finitely many scales, so every verdict is
one of pass / fail / inconclusive and carries the scales it was based on.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.integrate import quad

from .drivers import Driver, PiecewiseLinearDriver, reversed_increment
from .errors import DomainError
from .stieltjes import stieltjes_integral

__all__ = [
    "C1Probe",
    "ConditionReport",
    "DivergenceProbe",
    "check_c1",
    "check_c2",
    "check_conditions",
    "divergence_probe",
    "holder_smallness",
    "HolderReport",
    "default_probe_times",
    "default_c2_grid",
]

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


def _combine(verdicts):
    if any(v == FAIL for v in verdicts):
        return FAIL
    if any(v == INCONCLUSIVE for v in verdicts):
        return INCONCLUSIVE
    return PASS


@dataclass(frozen=True)
class C1Probe:
    t: float
    estimate: float
    verdict: str
    scales: tuple[float, ...]
    ratios: tuple[float, ...]
    flag: str | None = None        # "resolution" when too few admissible scales remain


@dataclass
class ConditionReport:
    tv_finite: bool
    tv_total: float
    c1: list[C1Probe] = field(default_factory=list)
    c1_verdict: str | None = None
    c2_eps: np.ndarray | None = None
    c2_delta: np.ndarray | None = None
    c2_verdict: str | None = None
    c2_detail: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)
    witness: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "tv_finite": self.tv_finite,
            "tv_total": self.tv_total,
            "c1_verdict": self.c1_verdict,
            "c1": [asdict(p) for p in self.c1],
            "c2_verdict": self.c2_verdict,
            "c2_eps": None if self.c2_eps is None else [float(x) for x in self.c2_eps],
            "c2_delta": None if self.c2_delta is None else [float(x) for x in self.c2_delta],
            "c2_detail": self.c2_detail,
            "grid": self.grid,
            "witness": self.witness,
        }
        return _jsonable(out)

    @property
    def verdict(self) -> str:
        vs = [v for v in (self.c1_verdict, self.c2_verdict) if v is not None]
        if not self.tv_finite:
            return FAIL
        return _combine(vs) if vs else INCONCLUSIVE


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if math.isfinite(v) else str(v)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    return x


def default_probe_times(d: Driver, n: int = 16) -> np.ndarray:
    T = d.horizon
    pts = set(np.linspace(T / n, T, n).tolist())
    pts |= {b for b in (*d.breakpoints, *d.singular_times) if 0 < b <= T}
    return np.array(sorted(pts))


def _tv_total(d: Driver) -> float:
    v = float(d.variation(d.horizon))
    return v


# ---------------------------------------------------------------------------
# (C1)


def _c1_scales(d: Driver, t: float, ratio: float, n_scales: int):
    if d.resolution is not None and isinstance(d, PiecewiseLinearDriver):
        floor = d.local_spacing(t)
        # ladder anchored at the local knot spacing, going up
        k = np.arange(0, 200)
        s = floor / ratio ** k
        return s[s <= t], floor
    if d.resolution is not None:
        floor = d.resolution
        k = np.arange(0, 200)
        s = floor / ratio ** k
        return s[s <= t], floor
    s = t * ratio ** np.arange(0, n_scales)
    floor = 64 * np.finfo(float).eps * t
    return s[s >= floor], floor


def check_c1(d: Driver, probe_times=None, *, ratio: float = 0.5, n_scales: int = 42,
             smallest: int = 3, margin: float = 0.05) -> ConditionReport:
    """limsup estimate of (V(t) - V(t-s))/sqrt(s) from the smallest admissible scales."""
    probes = default_probe_times(d) if probe_times is None else np.asarray(probe_times, float)
    if np.any(probes <= 0) or np.any(probes > d.horizon * (1 + 1e-12)):
        raise DomainError("probe times must lie in (0, T]")
    out = []
    for t in probes:
        t = float(min(t, d.horizon))
        scales, floor = _c1_scales(d, t, ratio, n_scales)
        scales = np.sort(scales)
        flag = None
        if len(scales) < smallest:
            out.append(C1Probe(t, float("nan"), INCONCLUSIVE, tuple(scales.tolist()), (), "resolution"))
            continue
        use = scales[:smallest]
        r = np.asarray(d.rev_variation(t, use)) / np.sqrt(use)
        est = float(np.max(r))
        if est < 2 - margin:
            v = PASS
        elif est > 2 + margin:
            v = FAIL
        else:
            v = INCONCLUSIVE
        out.append(C1Probe(t, est, v, tuple(use.tolist()), tuple(r.tolist()), flag))
    tv = _tv_total(d)
    rep = ConditionReport(math.isfinite(tv), tv, out, _combine([p.verdict for p in out]))
    rep.grid = {"probe_times": probes.tolist(), "ratio": ratio, "smallest": smallest, "margin": margin}
    rep.witness = holder_witness(d)
    return rep


def holder_witness(d: Driver) -> dict:
    """For the monotone construction: ratios (U(t_n) - U(s_n))/sqrt(t_n - s_n) = (t_n - s_n)^(-eps)."""
    if getattr(d, "family", None) != "monotone_bvlr":
        return {}
    from .drivers import monotone_bvlr_construction

    p = d.params
    con = monotone_bvlr_construction(p["c"], p["alpha"], p["eps"], p["amplitude"], p["n_max"], p["theta"])
    gap = con["t"] - con["s"]
    ratios = (d.value(con["t"]) - d.value(con["s"])) / np.sqrt(gap)
    return {"holder_ratios": ratios.tolist(), "predicted": (gap ** (-p["eps"])).tolist(),
            "gaps": gap.tolist()}


# ---------------------------------------------------------------------------
# (C2)


@dataclass(frozen=True)
class DivergenceProbe:
    t: float
    pieces: tuple[float, ...]
    divergent: bool


def divergence_probe(d: Driver, t: float, n_pieces: int = 10, ratio_min: float = 0.75,
                     floor: float = 1e-3) -> DivergenceProbe:
    """Inner-cutoff test of int_0 r^{-1/2} d|beta^t|_r at a single anchor.

    With r = exp(-x) the integral is int sqrt(r) |U'(t - r)| dx. It is cut into
    pieces over x in [x0 - 1 + 2^j, x0 - 1 + 2^(j+1)]. A convergent integral has
    pieces that collapse; log-type divergence shows pieces that do not shrink
    (the spiral gives log 2 per piece).
    """
    t = float(t)
    if not 0 < t <= d.horizon * (1 + 1e-12):
        raise DomainError("anchor outside (0, T]")
    x0 = max(1.0, -math.log(t) + 1e-12)
    g = lambda x: float(math.exp(-0.5 * x) * d.rev_speed(t, math.exp(-x)) * 1.0) if x < 740 else 0.0
    pieces = []
    for j in range(n_pieces):
        a = x0 - 1 + 2.0 ** j
        b = x0 - 1 + 2.0 ** (j + 1)
        if b > 740:
            break
        # the integrand is continuous in x except where t - r hits a breakpoint; quad copes
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            val, _ = quad(g, a, b, limit=200)
        pieces.append(val)
    tail = pieces[-4:]
    div = False
    if len(tail) == 4 and tail[-1] >= floor:
        ratios = [b / a for a, b in zip(tail[:-1], tail[1:]) if a > 0]
        div = len(ratios) == 3 and min(ratios) >= ratio_min
    return DivergenceProbe(t, tuple(pieces), div)


def default_c2_grid(d: Driver, n_uniform: int = 32, n_geom: int = 20) -> np.ndarray:
    T = d.horizon
    pts = set(np.linspace(T / n_uniform, T, n_uniform).tolist())
    pts |= set((T * 2.0 ** -np.arange(1, n_geom + 1)).tolist())
    for b in (*d.breakpoints, *d.singular_times):
        if 0 < b <= T:
            pts.add(b)
    return np.array(sorted(pts))


def _c2_integral(d: Driver, t: float, eps: float, cells: int) -> float:
    b = reversed_increment(d, t)
    r = stieltjes_integral(lambda x: 1.0 / np.sqrt(x), b, 0.0, min(eps, t), variation=True, cells=cells)
    return float(r.value)


def check_c2(d: Driver, eps_ladder=None, t_grid=None, *, cells: int = 64, slope_min: float = 0.1,
             tail: int = 8) -> ConditionReport:
    """delta_hat(eps) = max over t_grid of int_0^{eps ^ t} r^{-1/2} d|beta^t|_r, plus divergence probes."""
    T = d.horizon
    eps = T * 2.0 ** -np.arange(0, 21) if eps_ladder is None else np.asarray(eps_ladder, float)
    if np.any(eps <= 0) or np.any(eps > T * (1 + 1e-12)) or np.any(np.diff(eps) >= 0):
        raise DomainError("eps ladder must be strictly decreasing within (0, T]")
    grid = default_c2_grid(d) if t_grid is None else np.asarray(t_grid, float)
    probes = [divergence_probe(d, t) for t in grid]
    divergent = [p.t for p in probes if p.divergent]
    table = np.zeros((len(grid), len(eps)))
    for i, t in enumerate(grid):
        for j, e in enumerate(eps):
            table[i, j] = _c2_integral(d, t, e, cells)
    delta = table.max(axis=0)
    detail = {"sup_delta": float(delta.max()), "sup_below_2": bool(delta.max() < 2.0),
              "argmax_t": [float(grid[k]) for k in table.argmax(axis=0)]}
    if divergent:
        verdict = FAIL
        detail.update(reason="divergent", divergent_at=divergent,
                      pieces={str(p.t): list(p.pieces) for p in probes if p.divergent})
    elif delta.max() <= 1e-12:
        verdict = PASS
        detail.update(reason="identically zero")
    else:
        k = min(tail, len(eps))
        le, ld = np.log(eps[-k:]), np.log(np.maximum(delta[-k:], 1e-300))
        slope = float(np.polyfit(le, ld, 1)[0])
        detail["tail_slope"] = slope
        mono = bool(np.all(np.diff(delta) <= 1e-9 * (1 + delta[:-1])))
        detail["monotone"] = mono
        if slope >= slope_min and mono:
            verdict = PASS
            detail.update(reason="decays")
        else:
            verdict = INCONCLUSIVE
            detail.update(reason="no decay along the ladder (plateau or growth, finite at every probe)")
    tv = _tv_total(d)
    rep = ConditionReport(math.isfinite(tv), tv, c2_eps=eps, c2_delta=delta, c2_verdict=verdict,
                          c2_detail=detail)
    rep.grid = {"t_grid": grid.tolist(), "cells": cells}
    return rep


def check_conditions(d: Driver, **kw) -> ConditionReport:
    """Both checks merged into one report."""
    r1 = check_c1(d, kw.get("probe_times"), margin=kw.get("margin", 0.05))
    r2 = check_c2(d, kw.get("eps_ladder"), kw.get("t_grid"))
    r1.c2_eps, r1.c2_delta, r1.c2_verdict, r1.c2_detail = r2.c2_eps, r2.c2_delta, r2.c2_verdict, r2.c2_detail
    r1.grid = {"c1": r1.grid, "c2": r2.grid}
    return r1


# ---------------------------------------------------------------------------
# 1/2-Hölder smallness


@dataclass(frozen=True)
class HolderReport:
    t: float
    scales: np.ndarray
    ratios: np.ndarray          # |beta|_TV,s / sqrt(s)
    energy: np.ndarray          # int_0^s |U'(t - r)|^2 dr (truncated at r ~ 1e-320, a lower bound)
    cauchy_schwarz_ok: bool     # |beta|_TV,s <= sqrt(s) sqrt(energy)
    literal_ok: bool            # |beta|_TV,s <= sqrt(s) energy
    decays: bool
    passed: bool


def _energy(d: Driver, t: float, s: float) -> float:
    f = lambda x: float(d.rev_speed(t, math.exp(-x)) ** 2 * math.exp(-x))
    x0 = -math.log(s)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        val, _ = quad(f, x0, 740.0, limit=400)
    return val


def holder_smallness(d: Driver, t: float, scales=None, decay_factor: float = 0.25) -> HolderReport:
    """|beta^t|_TV,s / sqrt(s) -> 0, with the energy bound from Cauchy–Schwarz."""
    s = 0.5 * 2.0 ** -np.arange(0, 40, 3) if scales is None else np.asarray(scales, float)
    s = s[s <= t]
    ratios = np.asarray(d.rev_variation(t, s)) / np.sqrt(s)
    energy = np.array([_energy(d, t, x) for x in s])
    cs = bool(np.all(ratios <= np.sqrt(energy) * (1 + 1e-9) + 1e-15))
    lit = bool(np.all(ratios <= energy * (1 + 1e-9) + 1e-15))
    order = np.argsort(s)[::-1]
    r = ratios[order]
    decays = bool(np.all(np.diff(r) <= 1e-12) and r[-1] <= decay_factor * r[0])
    return HolderReport(float(t), s, ratios, energy, cs, lit, decays, cs and decays)
