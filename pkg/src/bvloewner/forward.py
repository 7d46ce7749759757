"""Forward chordal Loewner flow, used as an independent check of the traces.

g_t(z) is integrated through its deviation e = g - z with classical RK4 and
step doubling. Steps are capped by the base step and by kappa |g - U|^2, the
scale on which the field 2/(g - U) changes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .drivers import Driver
from .errors import DomainError, NumericalFailure

__all__ = [
    "ForwardConfig",
    "ForwardFlow",
    "flow_forward",
    "hcap_estimate",
    "HcapResult",
    "roundtrip_residual",
    "RoundtripReport",
    "large_z_slope",
]


@dataclass(frozen=True)
class ForwardConfig:
    base_step: float = 1e-2      # cap on the time step
    kappa: float = 0.1           # step <= kappa |g - U|^2
    tol: float = 1e-11           # local error per step, relative to 1 + |e|
    swallow_tol: float = 1e-7    # proximity |g - U| that counts as swallowed
    min_step: float = 1e-15
    max_steps: int = 2_000_000
    eta_scale: float = 1e-2      # roundtrip offsets eta_j = (eta_scale sqrt(t) / 2^j)^2
    eta_levels: int = 3
    ring_radius: float = 50.0    # hcap probes sit on |z| = ring_radius (1 + sqrt(t))
    ring_points: int = 16

    def __post_init__(self):
        if not (self.base_step > 0 and self.kappa > 0 and self.tol > 0):
            raise DomainError("forward step controls must be positive")
        if self.eta_levels < 2:
            raise DomainError("need at least two eta levels for extrapolation")


@dataclass
class ForwardFlow:
    z: complex
    status: str                   # "alive" or "swallowed"
    t_end: float
    g_end: complex
    swallow_time: float | None = None
    steps: int = 0
    times: list = field(default_factory=list)
    values: list = field(default_factory=list)
    stops: dict = field(default_factory=dict)   # requested time -> g at that time

    @property
    def alive(self) -> bool:
        return self.status == "alive"


def _rk4(f, t, e, h, u):
    # u holds U at t, t+h/2, t+h
    k1 = f(e, u[0])
    k2 = f(e + 0.5 * h * k1, u[1])
    k3 = f(e + 0.5 * h * k2, u[1])
    k4 = f(e + h * k3, u[2])
    return e + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def flow_forward(d: Driver, z: complex, T: float | None = None, cfg: ForwardConfig | None = None,
                 record: bool = False, stops=()) -> ForwardFlow:
    """Integrate dg/dt = 2/(g - U_t) from g_0 = z up to T or until z is swallowed."""
    cfg = cfg or ForwardConfig()
    z = complex(z)
    if z == 0 or z.imag < 0:
        raise DomainError(f"start {z} must be nonzero in the closed upper half-plane")
    T = d.horizon if T is None else float(T)
    if not 0 <= T <= d.horizon * (1 + 1e-12):
        raise DomainError(f"T={T} outside [0, {d.horizon}]")
    T = min(T, d.horizon)
    stops = sorted(float(s) for s in stops if 0 <= s <= T)
    out = ForwardFlow(z, "alive", T, z)
    f = lambda e, u: 2.0 / (z + e - u)
    t, e = 0.0, 0j
    h = min(cfg.base_step, 1e-6 * max(1.0, abs(z) ** 2))
    n = 0
    for s in stops:
        if s == 0:
            out.stops[s] = z
    if record:
        out.times.append(0.0)
        out.values.append(z)
    nxt = [s for s in stops if s > 0]
    while t < T:
        u0 = float(d.value(t))
        dist = abs(z + e - u0)
        if dist < cfg.swallow_tol * (1.0 + abs(u0)) or (z + e).imag <= 0:
            # remaining life of a point at distance r from the driver is about r^2 / 4
            out.status = "swallowed"
            out.swallow_time = t + dist * dist / 4.0
            out.t_end, out.g_end, out.steps = t, z + e, n
            return out
        target = nxt[0] if nxt else T
        h = min(h, cfg.base_step, cfg.kappa * dist * dist, target - t)
        while True:
            tt = np.array([t, t + 0.25 * h, t + 0.5 * h, t + 0.75 * h, t + h])
            uu = d.value(np.minimum(tt, d.horizon))
            full = _rk4(f, t, e, h, (uu[0], uu[2], uu[4]))
            mid = _rk4(f, t, e, 0.5 * h, (uu[0], uu[1], uu[2]))
            half = _rk4(f, t + 0.5 * h, mid, 0.5 * h, (uu[2], uu[3], uu[4]))
            err = abs(full - half) / 15.0
            if err <= cfg.tol * (1.0 + abs(half)) and math.isfinite(err):
                break
            h *= 0.5
            if h < cfg.min_step * max(1.0, t):
                raise NumericalFailure(f"step size underflow at t={t:.6g} for z={z}")
        e = half + (half - full) / 15.0
        t = target if t + h >= target - 1e-15 * max(1.0, target) else t + h
        n += 1
        if n > cfg.max_steps:
            raise NumericalFailure(f"step budget exhausted at t={t:.6g} for z={z}")
        if record:
            out.times.append(t)
            out.values.append(z + e)
        if nxt and t >= nxt[0]:
            out.stops[nxt.pop(0)] = z + e
        grow = 4.0 if err == 0 else min(4.0, 0.9 * (cfg.tol * (1.0 + abs(e)) / err) ** 0.2)
        h = max(h * grow, cfg.min_step)
    out.t_end, out.g_end, out.steps = t, z + e, n
    return out


@dataclass(frozen=True)
class HcapResult:
    t: float
    b: complex
    half_b: float
    fit_residual: float
    radius: float
    warning: str | None = None


def hcap_estimate(d: Driver, t, cfg: ForwardConfig | None = None):
    """b_t/2 from g_t(z) = z + b_t/z + c2/z^2 + c3/z^3 fitted on a ring of large-|z| probes.

    ``t`` may be a single time or a sequence (all flows are run once to the last time).
    """
    cfg = cfg or ForwardConfig()
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(ts <= 0) or np.any(ts > d.horizon * (1 + 1e-12)):
        raise DomainError("hcap times must lie in (0, T]")
    R = cfg.ring_radius * (1.0 + math.sqrt(ts.max()) + float(np.max(np.abs(d.value(ts)))))
    ang = np.pi * (np.arange(cfg.ring_points) + 0.5) / cfg.ring_points
    zs = R * np.exp(1j * ang)
    flows = [flow_forward(d, z, ts.max(), cfg, stops=ts.tolist()) for z in zs]
    res = []
    for tk in ts:
        g = np.array([fl.stops[float(tk)] for fl in flows])
        A = np.stack([1 / zs, 1 / zs ** 2, 1 / zs ** 3], axis=1)
        coef, *_ = np.linalg.lstsq(A, g - zs, rcond=None)
        resid = float(np.max(np.abs(A @ coef - (g - zs))))
        warn = None if resid < 1e-6 * abs(coef[0]) / R + 1e-12 else "fit residual above tolerance"
        res.append(HcapResult(float(tk), complex(coef[0]), float(coef[0].real) / 2.0, resid, R, warn))
    return res[0] if np.ndim(t) == 0 else res


def large_z_slope(d: Driver, t: float, radii=(1e2, 1e3, 1e4), angle: float = np.pi / 3,
                  cfg: ForwardConfig | None = None):
    """Log-log slope of |g_t(z) - z - 2t/z| against |z| (expected about -2)."""
    cfg = cfg or ForwardConfig()
    errs = []
    for r in radii:
        z = r * np.exp(1j * angle)
        g = flow_forward(d, z, t, cfg).g_end
        errs.append(abs(g - z - 2 * t / z))
    slope = np.polyfit(np.log(radii), np.log(errs), 1)[0]
    return float(slope), errs


@dataclass(frozen=True)
class RoundtripReport:
    t: np.ndarray
    residual: np.ndarray
    raw: np.ndarray            # |D| at the smallest offset, before extrapolation
    tolerance: float

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residual)) if len(self.residual) else 0.0

    @property
    def passed(self) -> bool:
        return bool(np.all(self.residual <= self.tolerance))


def roundtrip_residual(d: Driver, p, sample=16, cfg: ForwardConfig | None = None,
                       tolerance: float = 1e-3) -> RoundtripReport:
    """|g_t(gamma_t) - U_t| via offsets gamma_t + i eta and extrapolation eta -> 0.

    D(eta) = g_t(gamma_t + i eta) - U_t is smooth in sqrt(eta); with sqrt(eta) halved
    per level, a two-level Richardson table removes the sqrt(eta) and eta terms.
    """
    cfg = cfg or ForwardConfig()
    t_all = np.asarray(p.t)
    pos = np.nonzero(t_all > 0)[0]
    if isinstance(sample, int):
        pick = pos[np.unique(np.linspace(0, len(pos) - 1, min(sample, len(pos))).round().astype(int))]
    else:
        pick = np.asarray(sample, dtype=int)
    res, raw = [], []
    for k in pick:
        t = float(t_all[k])
        gam = complex(p.gamma[k])
        u = float(d.value(t))
        D = []
        for j in range(cfg.eta_levels):
            eta = (cfg.eta_scale * math.sqrt(t) / 2 ** j) ** 2
            fl = flow_forward(d, gam + 1j * eta, t, cfg)
            D.append(fl.g_end - u if fl.alive else complex(np.nan))
        table = D
        fac = 2.0
        while len(table) > 1:
            table = [(fac * b - a) / (fac - 1.0) for a, b in zip(table[:-1], table[1:])]
            fac *= 2.0
        r = abs(table[0])
        res.append(r if math.isfinite(r) else np.inf)
        raw.append(abs(D[-1]))
    return RoundtripReport(t_all[pick], np.array(res), np.array(raw), tolerance)
