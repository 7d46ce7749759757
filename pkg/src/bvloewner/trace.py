"""Trace extraction gamma_t = sqrt(phi_t^t(0)).

Two methods:

* per-anchor: an independent w = 0 solve at every grid time (vectorized);
* incremental: the flow property phi_{s+h}^{t+h}(0) = phi_s^t(phi_h^{t+h}(0))
  composed along the grid. The newest short segment is solved from scratch
  and then pushed through the per-interval step tables of all earlier
  intervals, so the work is quadratic in the number of grid points.
"""

from __future__ import annotations

import cmath
import csv
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .drivers import Driver
from .errors import DomainError, DriftError
from .reverse import SolverConfig, solve_zero_endpoints
from .stieltjes import graded_nodes, piece_cuts

__all__ = [
    "TracePath",
    "IncrementalConfig",
    "uniform_grid",
    "trace_per_anchor",
    "trace_incremental",
    "SimplenessReport",
    "simpleness_check",
    "segment_distances",
]


def uniform_grid(T: float, n: int) -> np.ndarray:
    """n + 1 equally spaced times on [0, T]."""
    if n < 1:
        raise DomainError("grid needs at least one step")
    return np.linspace(0.0, T, n + 1)


@dataclass(frozen=True)
class TracePath:
    t: np.ndarray
    gamma: np.ndarray
    err: np.ndarray
    method: str
    driver: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    @property
    def theta(self):
        """theta_t = phi_t^t(0) = gamma_t^2."""
        return self.gamma ** 2

    def __len__(self):
        return len(self.t)

    def to_csv(self, path, sqrt_time: bool = False):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            head = ["t", "re_gamma", "im_gamma", "err_estimate"]
            if sqrt_time:
                head.append("sqrt_t")
            w.writerow(head)
            for t, g, e in zip(self.t, self.gamma, self.err):
                row = [f"{t:.17g}", f"{g.real:.17g}", f"{g.imag:.17g}", f"{e:.6g}"]
                if sqrt_time:
                    row.append(f"{np.sqrt(t):.17g}")
                w.writerow(row)


def _check_grid(d: Driver, grid) -> np.ndarray:
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1 or len(g) < 2:
        raise DomainError("grid must have at least two times")
    if g[0] != 0.0 or np.any(np.diff(g) <= 0):
        raise DomainError("grid must start at 0 and be strictly increasing")
    if g[-1] > d.horizon * (1 + 1e-12):
        raise DomainError("grid extends past the driver horizon")
    return g


def trace_per_anchor(d: Driver, grid, cfg: SolverConfig | None = None, strict: bool = True) -> TracePath:
    """Independent w = 0 solve at every positive grid time; gamma_0 = 0.

    With ``strict=False`` anchors whose ladder did not meet the Cauchy criterion keep
    their last-rung value (listed in meta["unconverged"]) instead of raising.
    """
    cfg = cfg or SolverConfig()
    g = _check_grid(d, grid)
    t0 = time.perf_counter()
    r = solve_zero_endpoints(d, g[1:], cfg=cfg, raise_on_fail=strict)
    gamma = np.concatenate([[0.0 + 0.0j], r.ends])
    err = np.concatenate([[0.0], r.err])
    meta = {"rungs": int(r.rungs.max()), "seconds": time.perf_counter() - t0,
            "cells": cfg.cells if cfg.base_step is None else None,
            "unconverged": [float(x) for x in g[1:][~r.converged]]}
    return TracePath(g, gamma, err, "per-anchor", d.to_dict(), meta)


@dataclass(frozen=True)
class IncrementalConfig:
    short_steps: int = 4        # grid steps solved from scratch for every new anchor
    short_cells: int = 64       # coarse cells for those short solves
    substeps: int = 4           # table cells per interval (Richardson partner: twice as many)
    singular_boost: int = 4     # extra factor for intervals touching a singular time
    reanchor_every: int = 64    # per-anchor check-and-replace cadence (0 disables)
    drift_tol: float = 1e-5     # DriftError when |incremental - per-anchor| > 10 x this

    def __post_init__(self):
        if self.short_steps < 1 or self.short_cells < 1 or self.substeps < 1 or self.singular_boost < 1:
            raise DomainError("incremental step counts must be positive")


def _interval_tables(d: Driver, g: np.ndarray, icfg: IncrementalConfig):
    """Per interval i (between g[i-1] and g[i]) the (dbeta, ds) steps, walking x downward.

    Returns two lists (coarse, fine) indexed by i; entry 0 is unused.
    """
    sing = set(d.singular_times)
    marks = [*d.breakpoints, *d.singular_times]
    coarse, fine = [None], [None]
    for i in range(1, len(g)):
        lo, hi = g[i - 1], g[i]
        cuts = piece_cuts(lo, hi, marks)
        counts = np.full(len(cuts) - 1, icfg.substeps)
        for j in range(len(counts)):
            if cuts[j] in sing or cuts[j + 1] in sing:
                counts[j] *= icfg.singular_boost
        for lev, out in ((1, coarse), (2, fine)):
            x = graded_nodes(cuts, lev * counts)[::-1]
            u = d.value(x)
            out.append(list(zip((u[:-1] - u[1:]).tolist(), (x[:-1] - x[1:]).tolist())))
    return coarse, fine


def _push(a: complex, tables, guard: float) -> complex:
    """Advance a branch value through a sequence of step tables (scalar, exact quadratic step)."""
    sqrt = cmath.sqrt
    for tab in tables:
        for db, ds in tab:
            disc = sqrt(db * db + 4.0 * (a * a + a * db - 4.0 * ds))
            b1 = 0.5 * (db + disc)
            b2 = db - b1
            b = b1 if b1.imag >= b2.imag else b2
            if abs(b.imag) <= guard * (1.0 + abs(b)):
                b = complex((b1 if abs(b1 - a) <= abs(b2 - a) else b2).real, 0.0)
            a = b
    return a


def trace_incremental(d: Driver, grid, cfg: SolverConfig | None = None,
                      icfg: IncrementalConfig | None = None) -> TracePath:
    """Trace by composing flow maps along the grid (cost quadratic in grid size)."""
    cfg = cfg or SolverConfig()
    icfg = icfg or IncrementalConfig()
    g = _check_grid(d, grid)
    t_start = time.perf_counter()
    N = len(g) - 1
    ks = np.arange(1, N + 1)
    J = np.minimum(ks, icfg.short_steps)
    scfg = replace(cfg, cells=min(cfg.cells, icfg.short_cells)) if cfg.base_step is None else cfg
    short = solve_zero_endpoints(d, g[1:], s_end=g[ks] - g[ks - J], cfg=scfg)
    tab1, tab2 = _interval_tables(d, g, icfg)
    gamma = np.zeros(N + 1, complex)
    err = np.zeros(N + 1)
    checks = []
    K = icfg.reanchor_every
    check_idx = [k for k in range(1, N + 1) if K and k % K == 0]
    if check_idx:
        ref = solve_zero_endpoints(d, g[check_idx], cfg=cfg)
        ref_map = dict(zip(check_idx, zip(ref.ends, ref.err)))
    else:
        ref_map = {}
    for k in range(1, N + 1):
        a0 = complex(short.ends[k - 1])
        # intervals k-J, ..., 1 in the order the reversed time s meets them
        idx = range(k - J[k - 1], 0, -1)
        r1 = _push(a0, [tab1[i] for i in idx], cfg.guard)
        r2 = _push(a0, [tab2[i] for i in idx], cfg.guard)
        val = r2 + (r2 - r1) / 3.0
        e = abs(r2 - r1) / 3.0 + float(short.err[k - 1])
        if k in ref_map:
            pa, pe = ref_map[k]
            drift = abs(val - pa)
            checks.append((float(g[k]), float(drift)))
            if drift > 10.0 * icfg.drift_tol:
                raise DriftError(f"incremental trace drifted by {drift:.3g} at t={g[k]:g}",
                                 anchor=float(g[k]), drift=float(drift))
            val, e = complex(pa), float(pe)
        gamma[k] = val
        err[k] = e
    meta = {"seconds": time.perf_counter() - t_start, "drift_checks": checks,
            "short_steps": icfg.short_steps, "substeps": icfg.substeps}
    return TracePath(g, gamma, err, "incremental", d.to_dict(), meta)


# ---------------------------------------------------------------------------
# simpleness


def _pt_seg(p, a, b):
    ab = b - a
    L2 = np.abs(ab) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        u = np.where(L2 > 0, ((p - a) * np.conj(ab)).real / np.where(L2 > 0, L2, 1.0), 0.0)
    u = np.clip(u, 0.0, 1.0)
    return np.abs(p - (a + u * ab))


def _cross(u, v):
    return u.real * v.imag - u.imag * v.real


def segment_distances(a0, a1, b0, b1):
    """Distances between segments [a0, a1] and [b0, b1] (complex arrays, broadcast)."""
    d = np.minimum.reduce([_pt_seg(a0, b0, b1), _pt_seg(a1, b0, b1),
                           _pt_seg(b0, a0, a1), _pt_seg(b1, a0, a1)])
    r = a1 - a0
    s = b1 - b0
    den = _cross(r, s)
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        tt = _cross(b0 - a0, s) / den
        uu = _cross(b0 - a0, r) / den
    hit = (den != 0) & (tt >= 0) & (tt <= 1) & (uu >= 0) & (uu <= 1)
    return np.where(hit, 0.0, d)


@dataclass(frozen=True)
class SimplenessReport:
    passed: bool
    min_ratio: float               # min over pairs of distance / local spacing
    min_distance: float
    pair: tuple[int, int] | None   # segment indices attaining min_ratio
    min_gap_factor: float
    intersections: int


def simpleness_check(p: TracePath, min_gap_factor: float = 0.5, block: int = 512) -> SimplenessReport:
    """Non-adjacent polyline segments must stay min_gap_factor x local spacing apart.

    Local spacing for a pair is the shorter of the two segment lengths.
    """
    z = np.asarray(p.gamma)
    a, b = z[:-1], z[1:]
    lens = np.abs(b - a)
    n = len(a)
    best = (np.inf, np.inf, None)
    hits = 0
    for i0 in range(0, n, block):
        i = np.arange(i0, min(n, i0 + block))[:, None]
        j = np.arange(n)[None, :]
        dist = segment_distances(a[i], b[i], a[j], b[j])
        loc = np.minimum(lens[i], lens[j])
        mask = j >= i + 2
        hits += int(np.sum((dist == 0) & mask))
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(mask, dist / np.where(loc > 0, loc, np.inf), np.inf)
        k = np.unravel_index(np.argmin(ratio), ratio.shape)
        if ratio[k] < best[0]:
            best = (float(ratio[k]), float(dist[k]), (int(i[k[0], 0]), int(k[1])))
    ok = best[0] >= min_gap_factor and hits == 0
    return SimplenessReport(ok, best[0], best[1], best[2], min_gap_factor, hits)
