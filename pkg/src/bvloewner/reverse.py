"""Squared reverse-time Loewner equation.

For an anchor t the reversed increment beta_s = U(t) - U(t-s) drives

    phi_s = w + 2 int_0^s sqrt(phi_r) dbeta_r - 4 s,

with the square root taken continuously in the closed upper half-plane.
Writing a = sqrt(phi), one trapezoid step of the phi-form,

    a1^2 - a0^2 = (a0 + a1) dbeta - 4 ds,

is a quadratic in a1 that we solve exactly. Dividing by a0 + a1 shows it is
also the harmonic-midpoint step of dh = dbeta - 2/h ds, so the phi-form and the
h-form coincide for this scheme. Runs at two mesh levels are Richardson-combined.

The singular start w = 0 is reached through the regularization ladder
w = -y_k^2, y_k -> 0, stopped by a sup-norm Cauchy criterion.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .drivers import Driver, ReversedIncrement, reversed_increment
from .errors import DomainError, NonConvergenceError, SolverFailure
from .stieltjes import graded_nodes, piece_counts, piece_cuts

__all__ = [
    "SolverConfig",
    "PhiPath",
    "branch_sqrt_step",
    "solve_phi",
    "solve_phi_zero",
    "solve_zero_endpoints",
    "solve_endpoints",
    "regularization_ladder",
    "xy_identity_check",
    "envelope_check",
    "XYReport",
    "EnvelopeReport",
]


@dataclass(frozen=True)
class SolverConfig:
    cells: int = 256             # coarse cells per anchor; Richardson partner uses twice as many
    grading: float = 2.0         # exponent of the two-ended mesh grading
    min_cells: int = 4           # per smooth piece of the integrator
    base_step: float | None = None  # if set, cells = ceil(s_end / base_step) (coarse runs)
    ladder_base: float = 4.0     # y_k = ladder_base^(-k)
    ladder_start: int = 1
    ladder_rungs: int = 16
    ladder_batch: int = 4
    cauchy_tol: float = 1e-10    # relative to max(1, sup |phi|)
    guard: float = 1e-9          # closest-root rule when phi is this close to [0, inf)
    max_refine: int = 4
    scheme: str = "trapezoid"    # or "predictor-corrector"
    richardson: bool = True

    def __post_init__(self):
        if self.cells < 1 or self.min_cells < 1 or self.grading <= 0:
            raise DomainError("cells, min_cells and grading must be positive")
        if self.base_step is not None and not self.base_step > 0:
            raise DomainError("base_step must be positive")
        if not self.ladder_base > 1 or self.ladder_rungs < 2 or self.ladder_batch < 2:
            raise DomainError("ladder must be strictly decreasing with at least two rungs")
        if not (self.cauchy_tol > 0 and self.guard > 0):
            raise DomainError("tolerances must be positive")
        if self.scheme not in ("trapezoid", "predictor-corrector"):
            raise DomainError(f"unknown scheme {self.scheme!r}")

    def ladder(self) -> np.ndarray:
        k = np.arange(self.ladder_start, self.ladder_start + self.ladder_rungs)
        return self.ladder_base ** (-k.astype(float))

    def cells_for(self, s_end: float) -> int:
        if self.base_step is None:
            return self.cells
        return max(1, int(math.ceil(s_end / self.base_step - 1e-9)))


# ---------------------------------------------------------------------------
# branch selection


def _upper(r):
    return np.where(r.imag < 0, -r, r)


def _near_cut(phi, guard):
    dist = np.where(phi.real >= 0, np.abs(phi.imag), np.abs(phi))
    return dist <= guard * (1.0 + np.abs(phi))


def branch_sqrt_step(prev: complex, next_phi: complex, guard: float = 1e-9) -> complex:
    """Square root of next_phi in the closed upper half-plane, continuous along a path.

    Away from [0, inf) the upper root is unique. Within ``guard`` of the cut the
    two candidates are both (nearly) real and we return the one closest to prev.
    """
    if complex(prev).imag < -guard * (1 + abs(prev)):
        raise DomainError("previous branch value must lie in the closed upper half-plane")
    out = _branch_vec(np.asarray(prev, complex), np.asarray(next_phi, complex), guard)
    return complex(out)


def _branch_vec(prev, phi, guard):
    r = _upper(np.sqrt(phi))
    near = _near_cut(phi, guard)
    if np.any(near):
        rr = np.where(r.real >= 0, r, -r).real + 0j
        alt = -rr
        pick = np.where(np.abs(rr - prev) <= np.abs(alt - prev), rr, alt)
        r = np.where(near, pick, r)
    return r


# ---------------------------------------------------------------------------
# one step of each scheme; both return (new value, tie mask)


def _step_trapezoid(a, db, ds, guard):
    c = a * a + a * db - 4.0 * ds
    disc = np.sqrt(db * db + 4.0 * c)
    b1 = 0.5 * (db + disc)
    b2 = db - b1
    out = np.where(b1.imag >= b2.imag, b1, b2)
    # the roots sum to the real number db, so Im b1 = -Im b2; near-real means ambiguous
    near = np.abs(out.imag) <= guard * (1.0 + np.abs(out))
    tie = None
    if np.any(near):
        d1 = np.abs(b1 - a)
        d2 = np.abs(b2 - a)
        pick = np.where(d1 <= d2, b1, b2)
        out = np.where(near, pick.real + 0j, out)
        tie = near & (np.abs(d1 - d2) <= guard * (1.0 + np.abs(a))) & (np.abs(b1 - b2) > guard)
    return out, tie


def _step_pc(a, db, ds, guard):
    phi0 = a * a
    ap = _branch_vec(a, phi0 + 2.0 * a * db - 4.0 * ds, guard)
    phi1 = phi0 + (a + ap) * db - 4.0 * ds
    return _branch_vec(a, phi1, guard), None


_SCHEMES = {"trapezoid": _step_trapezoid, "predictor-corrector": _step_pc}


# ---------------------------------------------------------------------------
# meshes


def _anchor_cuts(driver: Driver, t: float, s_end: float) -> np.ndarray:
    marks = [t - b for b in (*driver.breakpoints, *driver.singular_times)]
    return piece_cuts(0.0, s_end, marks)


def _fine_mesh(driver, t, s_end, cfg):
    cuts = _anchor_cuts(driver, t, s_end)
    n = cfg.cells_for(s_end)
    counts = piece_counts(cuts, n, cfg.min_cells)
    # the piece at s = 0 carries the square-root start; never let it be starved
    counts[0] = max(counts[0], n // 4)
    return graded_nodes(cuts, 2 * counts, cfg.grading)


def _batch_mesh(driver, anchors, s_end, cfg):
    """Fine meshes (2x coarse) for all anchors, padded to a common length."""
    meshes = [_fine_mesh(driver, t, e, cfg) for t, e in zip(anchors, s_end)]
    n = max(len(m) for m in meshes)
    if (n - 1) % 2:
        n += 1
    S = np.empty((len(meshes), n))
    for i, m in enumerate(meshes):
        S[i, : len(m)] = m
        S[i, len(m):] = m[-1]
    return S


# ---------------------------------------------------------------------------
# the marching kernel


@dataclass
class _March:
    end1: np.ndarray            # coarse-level end values (A, L)
    end2: np.ndarray            # fine-level end values
    gaps: np.ndarray            # sup over s of |phi_col - phi_next_col|  (A, L-1)
    phimax: np.ndarray          # sup over s of |phi| per column (A, L)
    path1: np.ndarray | None = None   # coarse level (A, L, K+1) if kept
    path2: np.ndarray | None = None   # fine level at every fine node (A, L, 2K+1)
    s: np.ndarray | None = None       # fine nodes (A, 2K+1); coarse nodes are s[:, ::2]
    beta: np.ndarray | None = None


def _march(driver, anchors, s_end, starts, cfg, keep_path=False):
    """Advance square-root values from s = 0 to s_end for every anchor and column.

    ``starts`` has shape (A, L): initial branch values sqrt(w) per anchor/column.
    """
    anchors = np.asarray(anchors, dtype=float)
    s_end = np.asarray(s_end, dtype=float)
    S2 = _batch_mesh(driver, anchors, s_end, cfg)
    B2 = driver.rev_value(anchors[:, None], S2)
    dS2 = np.diff(S2, axis=1)
    dB2 = np.diff(B2, axis=1)
    S1 = S2[:, ::2]
    B1 = B2[:, ::2]
    dS1 = np.diff(S1, axis=1)
    dB1 = np.diff(B1, axis=1)
    step = _SCHEMES[cfg.scheme]
    a1 = np.array(starts, dtype=complex)
    a2 = a1.copy()
    A, L = a1.shape
    K = dS1.shape[1]
    gaps = np.zeros((A, max(L - 1, 0)))
    phimax = np.abs(a1) ** 2
    if keep_path:
        P1 = np.empty((A, L, K + 1), complex)
        P2 = np.empty((A, L, 2 * K + 1), complex)
        P1[:, :, 0] = a1
        P2[:, :, 0] = a2

    def do(a, db, ds, lo_s, level):
        new, tie = step(a, db[:, None], ds[:, None], cfg.guard)
        if tie is not None and np.any(tie):
            new = _resolve_ties(driver, anchors, a, new, tie, lo_s, ds, cfg, level)
        return new

    for k in range(K):
        a2 = do(a2, dB2[:, 2 * k], dS2[:, 2 * k], S2[:, 2 * k], 2)
        if keep_path:
            P2[:, :, 2 * k + 1] = a2
        a2 = do(a2, dB2[:, 2 * k + 1], dS2[:, 2 * k + 1], S2[:, 2 * k + 1], 2)
        a1 = do(a1, dB1[:, k], dS1[:, k], S1[:, k], 1)
        ar = a2 + (a2 - a1) / 3.0 if cfg.richardson else a2
        ph = ar * ar
        if L > 1:
            np.maximum(gaps, np.abs(np.diff(ph, axis=1)), out=gaps)
        np.maximum(phimax, np.abs(ph), out=phimax)
        if keep_path:
            P1[:, :, k + 1] = a1
            P2[:, :, 2 * k + 2] = a2
    out = _March(a1, a2, gaps, phimax)
    if keep_path:
        out.path1, out.path2, out.s, out.beta = P1, P2, S2, B2
    return out


def _resolve_ties(driver, anchors, a_prev, new, tie, lo_s, ds, cfg, level):
    """Re-integrate ambiguous cells with 2, 4, ... sub-steps from the driver itself."""
    step = _SCHEMES[cfg.scheme]
    new = new.copy()
    for i, l in zip(*np.nonzero(tie)):
        t = anchors[i]
        s0, h = lo_s[i], ds[i]
        for depth in range(1, cfg.max_refine + 1):
            n = 2 ** depth
            sub = s0 + h * np.arange(n + 1) / n
            bs = driver.rev_value(t, sub)
            a = np.array([a_prev[i, l]])
            ok = True
            for j in range(n):
                a, tj = step(a, bs[j + 1] - bs[j], h / n, cfg.guard)
                if tj is not None and tj.any():
                    ok = False
                    break
            if ok:
                new[i, l] = a[0]
                break
        else:
            raise SolverFailure(f"branch ambiguity at s={s0:.6g} not resolved after "
                                f"{cfg.max_refine} refinements (anchor {t:g})", s=float(s0), anchor=float(t))
    return new


def _rich(a1, a2, cfg):
    if not cfg.richardson:
        return a2, np.abs(a2 - a1)
    return a2 + (a2 - a1) / 3.0, np.abs(a2 - a1) / 3.0


# ---------------------------------------------------------------------------
# public API


@dataclass(frozen=True)
class PhiPath:
    """Discrete solution s -> phi_s^t(w) with its branch square root."""

    anchor: float
    start: complex
    s: np.ndarray
    phi: np.ndarray
    sqrt: np.ndarray
    local_err: np.ndarray
    beta: np.ndarray
    beta_tv: np.ndarray
    meta: dict = field(default_factory=dict)
    # raw mesh levels (coarse sqrt, fine sqrt, fine s, fine beta) behind the Richardson values
    levels: tuple | None = field(default=None, repr=False)

    @property
    def end(self) -> complex:
        return complex(self.phi[-1])

    @property
    def end_sqrt(self) -> complex:
        return complex(self.sqrt[-1])

    @property
    def X(self):
        return self.sqrt.real

    @property
    def Y(self):
        return self.sqrt.imag

    def certified_prefix(self, delta_cap: float = 1.95):
        """(s0, delta): longest mesh prefix on which sup |beta|_TV,s / sqrt(s) <= delta < 2."""
        ratio = np.zeros_like(self.s)
        pos = self.s > 0
        ratio[pos] = self.beta_tv[pos] / np.sqrt(self.s[pos])
        run = np.maximum.accumulate(ratio)
        ok = np.nonzero(run <= delta_cap)[0]
        if len(ok) == 0:
            return 0.0, 0.0
        j = ok[-1]
        return float(self.s[j]), float(run[j])

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["s", "re_phi", "im_phi", "re_sqrt", "im_sqrt", "local_err"])
            for row in zip(self.s, self.phi.real, self.phi.imag, self.sqrt.real, self.sqrt.imag,
                           self.local_err):
                w.writerow([f"{v:.17g}" for v in row])


def _as_increment(b) -> ReversedIncrement:
    if not isinstance(b, ReversedIncrement):
        raise DomainError("expected a ReversedIncrement (see reversed_increment)")
    return b


def _start_sqrt(w: complex) -> complex:
    w = complex(w)
    if w.imag == 0 and w.real > 0:
        raise DomainError(f"start point {w} lies on the open positive real axis")
    r = np.sqrt(w)
    return r if r.imag >= 0 else -r


def _path_from_march(m, col, b, w, cfg, meta):
    fine = m.path2[0, col]
    coarse = m.path1[0, col]
    a, err = _rich(coarse, fine[::2], cfg)
    s = m.s[0, ::2]
    phi = a * a
    return PhiPath(anchor=b.anchor, start=complex(w), s=s.copy(), phi=phi, sqrt=a,
                   local_err=2.0 * np.abs(a) * err + err * err, beta=m.beta[0, ::2].copy(),
                   beta_tv=b.base.rev_variation(b.anchor, s), meta=meta,
                   levels=(coarse.copy(), fine.copy(), m.s[0].copy(), m.beta[0].copy()))


def solve_phi(b: ReversedIncrement, w: complex, cfg: SolverConfig | None = None,
              s_end: float | None = None) -> PhiPath:
    """Solve from a start w in C minus (0, inf). w = 0 goes through the ladder."""
    cfg = cfg or SolverConfig()
    b = _as_increment(b)
    s_end = b.anchor if s_end is None else float(s_end)
    if not 0 < s_end <= b.anchor * (1 + 1e-12):
        raise DomainError(f"s_end={s_end} outside (0, {b.anchor}]")
    s_end = min(s_end, b.anchor)
    if complex(w) == 0:
        return solve_phi_zero(b, cfg, s_end=s_end)
    a0 = _start_sqrt(w)
    m = _march(b.base, [b.anchor], [s_end], np.array([[a0]]), cfg, keep_path=True)
    meta = {"scheme": cfg.scheme, "cells": int((m.s.shape[1] - 1) // 2)}
    return _path_from_march(m, 0, b, w, cfg, meta)


@dataclass
class _ZeroResult:
    ends: np.ndarray          # Richardson end sqrt values per anchor
    err: np.ndarray           # discretization + ladder error estimates
    rungs: np.ndarray         # index of the accepted rung per anchor
    gaps: list                # per-anchor list of Cauchy gaps
    converged: np.ndarray
    coarse: np.ndarray
    fine: np.ndarray


def solve_zero_endpoints(driver: Driver, anchors, s_end=None, cfg: SolverConfig | None = None,
                         raise_on_fail: bool = True) -> _ZeroResult:
    """End values sqrt(phi_{s_end}^t(0)) for many anchors, vectorized over anchors and rungs."""
    cfg = cfg or SolverConfig()
    anchors = np.atleast_1d(np.asarray(anchors, dtype=float))
    s_end = anchors.copy() if s_end is None else np.broadcast_to(np.asarray(s_end, float), anchors.shape).copy()
    if np.any(anchors <= 0) or np.any(anchors > driver.horizon * (1 + 1e-12)):
        raise DomainError("anchors must lie in (0, T]")
    if np.any(s_end <= 0) or np.any(s_end > anchors * (1 + 1e-12)):
        raise DomainError("s_end must lie in (0, anchor]")
    anchors = np.minimum(anchors, driver.horizon)
    s_end = np.minimum(s_end, anchors)
    ys = cfg.ladder()
    A = len(anchors)
    ends = np.zeros(A, complex)
    err = np.full(A, np.inf)
    rung = np.full(A, -1)
    conv = np.zeros(A, bool)
    coarse = np.zeros(A, complex)
    fine = np.zeros(A, complex)
    gaps = [[] for _ in range(A)]
    active = np.arange(A)
    k0 = 0
    while len(active) and k0 < len(ys) - 1:
        cols = ys[k0: k0 + cfg.ladder_batch]
        starts = np.broadcast_to(1j * cols, (len(active), len(cols)))
        m = _march(driver, anchors[active], s_end[active], starts, cfg)
        ar, er = _rich(m.end1, m.end2, cfg)
        scale = np.maximum(1.0, m.phimax.max(axis=1))
        for j, i in enumerate(active):
            for c in range(len(cols) - 1):
                g = float(m.gaps[j, c])
                gaps[i].append(g)
                if g <= cfg.cauchy_tol * scale[j]:
                    conv[i] = True
                    rung[i] = k0 + c + 1
                    ends[i] = ar[j, c + 1]
                    # ladder error bounded by the last gap (geometric decay in y^2)
                    err[i] = er[j, c + 1] + g
                    coarse[i], fine[i] = m.end1[j, c + 1], m.end2[j, c + 1]
                    break
            if not conv[i]:
                ends[i] = ar[j, -1]
                err[i] = er[j, -1] + (gaps[i][-1] if gaps[i] else np.inf)
                rung[i] = k0 + len(cols) - 1
                coarse[i], fine[i] = m.end1[j, -1], m.end2[j, -1]
        active = active[~conv[active]]
        k0 += len(cols) - 1   # overlap one rung so the gap across batches is measured
    if raise_on_fail and not conv.all():
        i = int(np.nonzero(~conv)[0][0])
        raise NonConvergenceError(
            f"regularization ladder exhausted at anchor t={anchors[i]:g} "
            f"(last Cauchy gap {gaps[i][-1]:.3g})", anchor=float(anchors[i]),
            gap=float(gaps[i][-1]) if gaps[i] else None)
    return _ZeroResult(ends, err, rung, gaps, conv, coarse, fine)


def solve_endpoints(driver: Driver, anchors, starts, s_end=None, cfg: SolverConfig | None = None):
    """End values sqrt(phi_{s_end}^t(w)) for arbitrary nonzero starts (one per anchor)."""
    cfg = cfg or SolverConfig()
    anchors = np.atleast_1d(np.asarray(anchors, dtype=float))
    s_end = anchors if s_end is None else np.broadcast_to(np.asarray(s_end, float), anchors.shape)
    a0 = np.array([_start_sqrt(w) for w in np.broadcast_to(np.asarray(starts, complex), anchors.shape)])
    m = _march(driver, anchors, s_end, a0[:, None], cfg)
    ar, er = _rich(m.end1, m.end2, cfg)
    return ar[:, 0], er[:, 0]


def solve_phi_zero(b: ReversedIncrement, cfg: SolverConfig | None = None,
                   s_end: float | None = None) -> PhiPath:
    """The w = 0 solution as the limit of w = -y^2 along the ladder."""
    cfg = cfg or SolverConfig()
    b = _as_increment(b)
    s_end = b.anchor if s_end is None else min(float(s_end), b.anchor)
    if not s_end > 0:
        raise DomainError("s_end must be positive")
    ys = cfg.ladder()
    gaps: list[float] = []
    phimax = 0.0
    k0 = 0
    while k0 < len(ys) - 1:
        cols = ys[k0: k0 + cfg.ladder_batch]
        m = _march(b.base, [b.anchor], [s_end], (1j * cols)[None, :], cfg, keep_path=True)
        phimax = max(phimax, float(m.phimax.max()))
        for c in range(len(cols) - 1):
            g = float(m.gaps[0, c])
            gaps.append(g)
            if g <= cfg.cauchy_tol * max(1.0, phimax):
                meta = {"scheme": cfg.scheme, "cells": int((m.s.shape[1] - 1) // 2), "rung": k0 + c + 1,
                        "y": float(cols[c + 1]), "cauchy_gaps": gaps, "ladder": ys[: k0 + c + 2].tolist()}
                p = _path_from_march(m, c + 1, b, 0.0, cfg, meta)
                s0, delta = p.certified_prefix()
                p.meta.update(certified_prefix=s0, delta=delta)
                return p
        k0 += len(cols) - 1
    raise NonConvergenceError(
        f"regularization ladder exhausted at anchor t={b.anchor:g} (last Cauchy gap {gaps[-1]:.3g})",
        anchor=b.anchor, gap=gaps[-1])


def regularization_ladder(b: ReversedIncrement, ys, cfg: SolverConfig | None = None):
    """Paths for every rung w = -y^2 at once.

    Returns (gaps, s, sqrt_paths): gaps[k] = sup_s |phi^(y_k) - phi^(y_{k+1})|, the
    coarse mesh s and the Richardson square-root paths with shape (len(ys), len(s)).
    """
    cfg = cfg or SolverConfig()
    b = _as_increment(b)
    ys = np.asarray(ys, dtype=float)
    if np.any(ys <= 0) or np.any(np.diff(ys) >= 0):
        raise DomainError("ladder must be positive and strictly decreasing")
    m = _march(b.base, [b.anchor], [b.anchor], (1j * ys)[None, :], cfg, keep_path=True)
    a, _ = _rich(m.path1[0], m.path2[0][:, ::2], cfg)
    return m.gaps[0].copy(), m.s[0, ::2].copy(), a


# ---------------------------------------------------------------------------
# self-tests


@dataclass(frozen=True)
class XYReport:
    max_residual: float
    max_allowed: float
    max_scaled: float          # max residual / (1 + Y |beta|_TV)
    tv_bound_ok: bool          # |X_s| <= |beta|_TV,s + tol on the path
    passed: bool


def _cum_trap(Y, beta):
    return np.concatenate([[0.0], np.cumsum(0.5 * (Y[1:] + Y[:-1]) * np.diff(beta))])


def xy_identity_check(p: PhiPath, b: ReversedIncrement | None = None, tol: float = 1e-6) -> XYReport:
    """Compare X_s Y_s with int_0^s Y dbeta along a solved path.

    The integral is a trapezoid Stieltjes sum on each mesh level, Richardson
    combined like the path itself. ``b`` (optional) must be the increment the
    path was solved against; it only serves as a consistency check.
    """
    if b is not None and abs(b.anchor - p.anchor) > 1e-14 * max(1.0, p.anchor):
        raise DomainError("path and increment have different anchors")
    X, Y = p.X, p.Y
    if p.levels is not None:
        coarse, fine, sf, bf = p.levels
        i1 = _cum_trap(coarse.imag, bf[::2])
        i2 = _cum_trap(fine.imag, bf)[::2]
        integral = i2 + (i2 - i1) / 3.0
    else:
        integral = _cum_trap(Y, p.beta)
    xy0 = X[0] * Y[0]
    res = np.abs(X * Y - xy0 - integral)
    scale = 1.0 + Y * p.beta_tv
    tv_ok = bool(np.all(np.abs(X) <= p.beta_tv + 1e-8 + np.abs(X[0])))
    scaled = res / scale
    return XYReport(float(res.max()), float((tol * scale).max()), float(scaled.max()), tv_ok,
                    bool(np.all(scaled <= tol)) and tv_ok)


@dataclass(frozen=True)
class EnvelopeReport:
    prefix: float
    delta: float
    lower_violation: float     # max of (c_delta sqrt(s) - Im a), should be <= tol
    upper_violation: float     # max of (Im a - 2 sqrt(s))
    real_violation: float      # max of (|Re a| - |beta|_TV)
    passed: bool


def envelope_check(p: PhiPath, tol: float = 1e-4, delta_cap: float = 1.95) -> EnvelopeReport:
    """A-priori envelopes of the w = 0 solution on its certified prefix."""
    s0, delta = p.certified_prefix(delta_cap)
    m = (p.s <= s0) & (p.s > 0)
    ratio = np.zeros_like(p.s)
    ratio[p.s > 0] = p.beta_tv[p.s > 0] / np.sqrt(p.s[p.s > 0])
    run = np.maximum.accumulate(ratio)
    rs = np.sqrt(p.s[m])
    cdel = np.sqrt(np.maximum(4.0 - run[m] ** 2, 0.0))
    Y = p.Y[m]
    lo = float(np.max(cdel * rs - Y, initial=-np.inf))
    hi = float(np.max(Y - 2.0 * rs, initial=-np.inf))
    re = float(np.max(np.abs(p.X[m]) - p.beta_tv[m], initial=-np.inf))
    return EnvelopeReport(s0, delta, lo, hi, re, lo <= tol and hi <= tol and re <= tol)


def with_overrides(cfg: SolverConfig, **kw) -> SolverConfig:
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})
