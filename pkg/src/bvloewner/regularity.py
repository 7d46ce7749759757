"""Right derivative of theta_t = phi_t^t(0) and the tangent of t -> gamma(t^2).

Under (C2),

    theta'_+(t0) = -4 Z_{t0}^{t0},   Z_s^{t0} = exp( int_0^s dbeta_r / sqrt(phi_r^{t0}(0)) ).

Along a trapezoid path the integral is accumulated cell by cell as
sum 2 dbeta / (a_k + a_{k+1}), which is exactly the quantity the scheme itself
uses, and Richardson-combined across the two mesh levels.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .conditions import PASS, check_c2, divergence_probe
from .drivers import Driver, reversed_increment
from .errors import ConditionError, DivergentIntegralError, DomainError
from .reverse import PhiPath, SolverConfig, solve_endpoints, solve_phi, solve_phi_zero, solve_zero_endpoints
from .trace import TracePath

__all__ = [
    "theta_derivative",
    "z_factor",
    "z_factor_ratio",
    "theta_fd",
    "DerivativeReport",
    "derivative_report",
    "TangentReport",
    "tangent_of_sqrt_parametrization",
    "flow_property_residual",
    "flow_property_table",
]


def _log_z(path: PhiPath) -> complex:
    coarse, fine, sf, bf = path.levels
    i1 = np.sum(2.0 * np.diff(bf[::2]) / (coarse[1:] + coarse[:-1]))
    i2 = np.sum(2.0 * np.diff(bf) / (fine[1:] + fine[:-1]))
    return complex(i2 + (i2 - i1) / 3.0)


def _require_c2(d: Driver, t0: float, force: bool, c2_report):
    probe = divergence_probe(d, t0)
    if probe.divergent:
        raise DivergentIntegralError(t0, "inner-cutoff pieces do not shrink "
                                         f"(last {probe.pieces[-1]:.3g})")
    if force:
        return
    rep = c2_report if c2_report is not None else check_c2(d)
    if rep.c2_verdict != PASS:
        raise ConditionError(f"(C2) verdict is {rep.c2_verdict!r} for this driver; "
                             "pass force=True to evaluate anyway")


def z_factor(d: Driver, t0: float, s: float, cfg: SolverConfig | None = None, *,
             force: bool = False, c2_report=None) -> complex:
    """Z_s^{t0} = exp(int_0^s dbeta / sqrt(phi^{t0}))."""
    cfg = cfg or SolverConfig()
    if not 0 < t0 <= d.horizon * (1 + 1e-12):
        raise DomainError("t0 must lie in (0, T]")
    if not 0 <= s <= t0:
        raise DomainError("s must lie in [0, t0]")
    if s == 0:
        return 1.0 + 0j
    _require_c2(d, t0, force, c2_report)
    path = solve_phi_zero(reversed_increment(d, t0), cfg, s_end=s)
    return complex(np.exp(_log_z(path)))


def theta_derivative(d: Driver, t0: float, cfg: SolverConfig | None = None, *,
                     force: bool = False, c2_report=None) -> complex:
    """theta'_+(t0) = -4 exp(int_0^{t0} dbeta / sqrt(phi)); exactly -4 at t0 = 0."""
    cfg = cfg or SolverConfig()
    if not 0 <= t0 <= d.horizon * (1 + 1e-12):
        raise DomainError("t0 must lie in [0, T]")
    if t0 == 0:
        return -4.0 + 0j
    _require_c2(d, t0, force, c2_report)
    path = solve_phi_zero(reversed_increment(d, t0), cfg)
    return complex(-4.0 * np.exp(_log_z(path)))


def z_factor_ratio(d: Driver, t0: float, s: float, h: float, cfg: SolverConfig | None = None) -> complex:
    """Defining ratio (phi_{s+h}^{t0+h}(0) - phi_s^{t0}(0)) / phi_h^{t0+h}(0)."""
    cfg = cfg or SolverConfig()
    if t0 + h > d.horizon * (1 + 1e-12):
        raise DomainError("t0 + h exceeds the horizon")
    a = solve_zero_endpoints(d, [t0 + h, t0, t0 + h], s_end=[s + h, s, h], cfg=cfg).ends
    return complex((a[0] ** 2 - a[1] ** 2) / a[2] ** 2)


def flow_property_residual(d: Driver, t: float, s: float, h: float,
                           cfg: SolverConfig | None = None) -> float:
    """|phi_{s+h}^{t+h}(0) - phi_s^t(phi_h^{t+h}(0))|."""
    cfg = cfg or SolverConfig()
    a = solve_zero_endpoints(d, [t + h, t + h], s_end=[s + h, h], cfg=cfg).ends
    lhs = a[0] ** 2
    w = a[1] ** 2
    rhs = solve_phi(reversed_increment(d, t), w, cfg, s_end=s).end
    return float(abs(lhs - rhs))


def flow_property_table(d: Driver, t: float, s_values, h_values, cfg: SolverConfig | None = None):
    """Residuals of the flow property over the (s, h) product grid, batched."""
    cfg = cfg or SolverConfig()
    S, H = np.meshgrid(np.asarray(s_values, float), np.asarray(h_values, float), indexing="ij")
    s, h = S.ravel(), H.ravel()
    if np.any(s > t) or np.any(t + h > d.horizon * (1 + 1e-12)):
        raise DomainError("need s <= t and t + h <= T")
    lhs = solve_zero_endpoints(d, t + h, s_end=s + h, cfg=cfg).ends ** 2
    w = solve_zero_endpoints(d, t + h, s_end=h, cfg=cfg).ends ** 2
    rhs = solve_endpoints(d, np.full_like(s, t), w, s_end=s, cfg=cfg)[0] ** 2
    return np.abs(lhs - rhs).reshape(S.shape)


def theta_fd(d: Driver, t0: float, h: float, cfg: SolverConfig | None = None) -> complex:
    """Right difference quotient of theta with one Richardson step in h (error O(h^2) for smooth theta)."""
    cfg = cfg or SolverConfig()
    if t0 + h > d.horizon * (1 + 1e-12):
        raise DomainError("t0 + h exceeds the horizon")
    ts = [t0 + h, t0 + h / 2]
    if t0 > 0:
        ts.append(t0)
    a = solve_zero_endpoints(d, ts, cfg=cfg).ends
    th0 = a[2] ** 2 if t0 > 0 else 0.0
    d1 = (a[0] ** 2 - th0) / h
    d2 = (a[1] ** 2 - th0) / (h / 2)
    return complex(2 * d2 - d1)


@dataclass
class DerivativeReport:
    t0: np.ndarray
    analytic: np.ndarray
    fd: np.ndarray
    rel_err: np.ndarray
    c2_flag: str
    h: float
    meta: dict = field(default_factory=dict)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t0", "re_analytic", "im_analytic", "re_fd", "im_fd", "rel_err", "c2_flag"])
            for t, a, f, r in zip(self.t0, self.analytic, self.fd, self.rel_err):
                w.writerow([f"{t:.17g}", f"{a.real:.17g}", f"{a.imag:.17g}", f"{f.real:.17g}",
                            f"{f.imag:.17g}", f"{r:.6g}", self.c2_flag])


def derivative_report(d: Driver, t0s, h: float = 1e-3, cfg: SolverConfig | None = None, *,
                      force: bool = False) -> DerivativeReport:
    cfg = cfg or SolverConfig()
    t0s = np.asarray(t0s, dtype=float)
    rep = check_c2(d)
    an, fd = [], []
    for t0 in t0s:
        an.append(theta_derivative(d, t0, cfg, force=force, c2_report=rep))
        fd.append(theta_fd(d, t0, h, cfg))
    an = np.array(an)
    fd = np.array(fd)
    rel = np.abs(an - fd) / np.abs(an)
    return DerivativeReport(t0s, an, fd, rel, rep.c2_verdict, h, {"forced": force})


@dataclass(frozen=True)
class TangentReport:
    s: np.ndarray
    angles: np.ndarray            # unwrapped direction of each chord of s -> gamma(s^2)
    max_jump: float               # largest change between consecutive chord directions
    winding: float                # total angular variation over the last quarter of the s-range


def tangent_of_sqrt_parametrization(p: TracePath, n: int | None = None) -> TangentReport:
    """Chord directions of s -> gamma(s^2) on a uniform s-grid.

    If the trace grid is already uniform in sqrt(t) it is used as is; otherwise gamma
    is interpolated linearly in s = sqrt(t).
    """
    t = np.asarray(p.t)
    s_grid = np.sqrt(t)
    if n is None and np.allclose(np.diff(s_grid), s_grid[1] - s_grid[0], rtol=1e-9, atol=1e-14):
        s, z = s_grid, np.asarray(p.gamma)
    else:
        n = n or len(t) - 1
        s = np.linspace(0.0, s_grid[-1], n + 1)
        z = np.interp(s, s_grid, p.gamma.real) + 1j * np.interp(s, s_grid, p.gamma.imag)
    ang = np.unwrap(np.angle(np.diff(z)))
    jumps = np.abs(np.diff(ang))
    q = len(ang) * 3 // 4
    wind = float(np.sum(np.abs(np.diff(ang[q:])))) if len(ang) - q > 1 else 0.0
    return TangentReport(s, ang, float(jumps.max()) if len(jumps) else 0.0, wind)
