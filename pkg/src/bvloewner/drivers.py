"""Driving functions of finite total variation.

A driver is a continuous real function ``U`` on ``[0, T]`` with ``U(0) = 0``.
Every driver exposes its value ``U(t)``, its cumulative variation
``V(t) = |U|_TV on [0, t]`` and the reversed increment seen from an anchor
``t``::

    beta^t(s) = U(t) - U(t - s),     |beta^t|_TV(s) = V(t) - V(t - s).

The reversed quantities are implemented per family so that they stay accurate
for ``s`` many orders of magnitude below ``t`` (the singular integrals probed
by the regularity checks live there).
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import expi

from .errors import DomainError, DriverParseError

__all__ = [
    "Driver",
    "ZeroDriver",
    "SqrtDriver",
    "LogSqrtDriver",
    "PowerDriver",
    "SpiralDriver",
    "PiecewiseLinearDriver",
    "SumDriver",
    "DelayMixDriver",
    "BumpDriver",
    "ReversedIncrement",
    "total_variation",
    "reversed_increment",
    "make_example",
    "monotone_bvlr_construction",
    "GALLERY",
    "BVLR_GALLERY",
    "C2_GALLERY",
    "driver_from_dict",
    "load_driver",
    "parse_driver",
]

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def _arr(x):
    return np.asarray(x, dtype=float)


def _ret(out, like):
    return float(out) if np.ndim(like) == 0 else out


class Driver:
    """Base class. Subclasses implement ``_value`` and ``_variation`` on arrays."""

    kind = "analytic"
    family = "generic"

    def __init__(self, horizon: float = 1.0):
        if not (horizon > 0 and math.isfinite(horizon)):
            raise DomainError(f"horizon must be positive and finite, got {horizon!r}")
        self.horizon = float(horizon)

    # -- metadata -----------------------------------------------------------
    @property
    def params(self) -> dict:
        return {}

    @property
    def breakpoints(self) -> tuple[float, ...]:
        """Times in (0, T) where U fails to be smooth (knots, singular points)."""
        return ()

    @property
    def singular_times(self) -> tuple[float, ...]:
        """Times in [0, T] where |U'| is unbounded."""
        return ()

    @property
    def resolution(self) -> float | None:
        """Sample spacing below which the driver carries no information (None: exact)."""
        return None

    def to_dict(self) -> dict:
        return {"horizon": self.horizon, "kind": "analytic", "family": self.family,
                "params": dict(self.params)}

    def __repr__(self):
        ps = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"{type(self).__name__}({ps}{', ' if ps else ''}horizon={self.horizon:g})"

    # -- checks ---------------------------------------------------------------
    def _check_times(self, t, lo=0.0):
        t = _arr(t)
        tol = 1e-12 * self.horizon
        if np.any(t < lo - tol) or np.any(t > self.horizon + tol) or np.any(~np.isfinite(t)):
            raise DomainError(f"time outside [{lo:g}, {self.horizon:g}]")
        return np.clip(t, lo, self.horizon)

    # -- public evaluation ----------------------------------------------------
    def value(self, t):
        """U(t)."""
        tt = self._check_times(t)
        return _ret(self._value(tt), t)

    def variation(self, t):
        """V(t) = |U|_TV on [0, t]."""
        tt = self._check_times(t)
        return _ret(self._variation(tt), t)

    def derivative(self, x):
        """Signed U'(x) where it exists (one-sided at knots); NaN where undefined."""
        xx = self._check_times(x)
        return _ret(self._derivative(xx), x)

    def rev_value(self, t, s):
        """beta^t(s) = U(t) - U(t - s), broadcasting t against s."""
        t, s = np.broadcast_arrays(_arr(t), _arr(s))
        return self._rev_value(t, s)

    def rev_variation(self, t, s):
        """|beta^t|_TV(s) = V(t) - V(t - s)."""
        t, s = np.broadcast_arrays(_arr(t), _arr(s))
        return self._rev_variation(t, s)

    def rev_speed(self, t, s):
        """Density of d|beta^t|_TV at s, i.e. |U'(t - s)|; None if U is not absolutely
        continuous with a usable density (never the case for the built-in families)."""
        t, s = np.broadcast_arrays(_arr(t), _arr(s))
        return self._rev_speed(t, s)

    # -- defaults -------------------------------------------------------------
    def _derivative(self, x):
        raise NotImplementedError

    def _rev_value(self, t, s):
        return self._value(t) - self._value(np.maximum(t - s, 0.0))

    def _rev_variation(self, t, s):
        return self._variation(t) - self._variation(np.maximum(t - s, 0.0))

    def _rev_speed(self, t, s):
        return np.abs(self._derivative(np.maximum(t - s, 0.0)))


class ZeroDriver(Driver):
    family = "zero"

    def _value(self, t):
        return np.zeros_like(t)

    _variation = _value

    def _derivative(self, x):
        return np.zeros_like(x)

    def _rev_value(self, t, s):
        return np.zeros(np.shape(t))

    _rev_variation = _rev_value
    _rev_speed = _rev_value


class SqrtDriver(Driver):
    """U(t) = c sqrt(t). Its trace is a straight ray."""

    family = "sqrt"

    def __init__(self, c: float = 1.0, horizon: float = 1.0):
        super().__init__(horizon)
        if not math.isfinite(c):
            raise DomainError("c must be finite")
        self.c = float(c)

    @property
    def params(self):
        return {"c": self.c}

    @property
    def singular_times(self):
        return (0.0,) if self.c != 0 else ()

    def _value(self, t):
        return self.c * np.sqrt(t)

    def _variation(self, t):
        return abs(self.c) * np.sqrt(t)

    def _derivative(self, x):
        with np.errstate(divide="ignore"):
            return np.where(x > 0, 0.5 * self.c / np.sqrt(np.where(x > 0, x, 1.0)), np.inf * np.sign(self.c))

    def _rev_value(self, t, s):
        # c (sqrt t - sqrt(t-s)) without cancellation
        x = np.maximum(t - s, 0.0)
        den = np.sqrt(t) + np.sqrt(x)
        with np.errstate(invalid="ignore", divide="ignore"):
            out = self.c * np.where(den > 0, (t - x) / np.where(den > 0, den, 1.0), 0.0)
        return out

    def _rev_variation(self, t, s):
        return np.abs(self._rev_value(t, s))


class LogSqrtDriver(Driver):
    """U(t) = 4 sqrt(t) - 2 sqrt(t) log t; U'(t) = -log(t)/sqrt(t) changes sign at t = 1."""

    family = "logsqrt"

    @property
    def breakpoints(self):
        return (1.0,) if self.horizon > 1.0 else ()

    @property
    def singular_times(self):
        return (0.0,)

    def _value(self, t):
        out = np.zeros_like(t)
        m = t > 0
        tm = t[m]
        out[m] = np.sqrt(tm) * (4.0 - 2.0 * np.log(tm))
        return out

    def _variation(self, t):
        u = self._value(t)
        # increasing up to t = 1 (U(1) = 4), decreasing afterwards
        return np.where(t <= 1.0, u, 8.0 - u)

    def _derivative(self, x):
        out = np.full_like(x, np.inf)
        m = x > 0
        out[m] = -np.log(x[m]) / np.sqrt(x[m])
        return out


class PowerDriver(Driver):
    """U(t) = a t^alpha with alpha > 1/2: a monotone Hölder driver satisfying (C2)."""

    family = "power"

    def __init__(self, a: float = 1.0, alpha: float = 0.75, horizon: float = 1.0):
        super().__init__(horizon)
        if not alpha > 0.5:
            raise DomainError(f"power driver needs alpha > 1/2, got {alpha}")
        self.a = float(a)
        self.alpha = float(alpha)

    @property
    def params(self):
        return {"a": self.a, "alpha": self.alpha}

    @property
    def singular_times(self):
        return (0.0,) if (self.alpha < 1 and self.a != 0) else ()

    def _value(self, t):
        return self.a * np.power(t, self.alpha)

    def _variation(self, t):
        return abs(self.a) * np.power(t, self.alpha)

    def _derivative(self, x):
        with np.errstate(divide="ignore"):
            return self.a * self.alpha * np.power(x, self.alpha - 1.0)

    def _rev_value(self, t, s):
        x = np.maximum(t - s, 0.0)
        # t^a - x^a = x^a expm1(a log(t/x)) keeps relative accuracy for s << t
        with np.errstate(divide="ignore", invalid="ignore"):
            rel = np.expm1(self.alpha * np.log1p(np.where(x > 0, (t - x) / np.where(x > 0, x, 1.0), 0.0)))
            out = np.where(x > 0, np.power(x, self.alpha) * rel, np.power(t, self.alpha))
        return self.a * out

    def _rev_variation(self, t, s):
        return np.abs(self._rev_value(t, s))


def _li_sqrt(d):
    """int_0^d dr / (sqrt(r) log r) = li(sqrt d) = Ei(log(d)/2), for 0 <= d < 1."""
    d = _arr(d)
    out = np.zeros_like(d)
    m = d > 0
    out[m] = expi(0.5 * np.log(d[m]))
    return out


class SpiralDriver(Driver):
    """Driver whose trace winds infinitely often as t -> 1.

    Constant after time 1, linear on [0, 1/2], and
    ``U(1) - U(1 - s) = int_0^s dr / (sqrt(r) log r)`` for s <= 1/2.
    Satisfies (C1) but not (C2) at t = 1.
    """

    family = "spiral"
    _k = 1.0 / (math.sqrt(0.5) * math.log(0.5))  # slope matching at x = 1/2

    def __init__(self, horizon: float = 1.0):
        super().__init__(horizon)
        self._u_half = self._k * 0.5
        self._u_one = self._u_half + float(_li_sqrt(0.5))

    @property
    def breakpoints(self):
        b = [0.5]
        if self.horizon > 1.0:
            b.append(1.0)
        return tuple(x for x in b if x < self.horizon)

    @property
    def singular_times(self):
        return (1.0,) if self.horizon >= 1.0 else ()

    def _from_dist(self, x, dist):
        # U as a function of x, with dist = 1 - x supplied separately for accuracy
        out = np.where(x <= 0.5, self._k * np.clip(x, 0.0, 0.5), 0.0)
        mid = (x > 0.5) & (dist > 0)
        out = np.where(mid, self._u_one - _li_sqrt(np.clip(dist, 0.0, 0.5)), out)
        return np.where(dist <= 0, self._u_one, out)

    def _value(self, t):
        return self._from_dist(t, 1.0 - t)

    def _variation(self, t):
        return -self._value(t)

    def _derivative(self, x):
        return self._deriv_dist(x, 1.0 - x)

    def _deriv_dist(self, x, dist):
        with np.errstate(divide="ignore", invalid="ignore"):
            dd = np.clip(dist, 1e-300, 0.5)
            mid = 1.0 / (np.sqrt(dd) * np.log(dd))
        out = np.where(x <= 0.5, self._k, mid)
        out = np.where(dist <= 0, 0.0, out)
        return np.where(dist == 0, -np.inf, out)

    def _rev_value(self, t, s):
        x = np.maximum(t - s, 0.0)
        dist_x = (1.0 - t) + s
        return self._from_dist(t, 1.0 - t) - self._from_dist(x, dist_x)

    def _rev_variation(self, t, s):
        return np.abs(self._rev_value(t, s))

    def _rev_speed(self, t, s):
        x = np.maximum(t - s, 0.0)
        return np.abs(self._deriv_dist(x, (1.0 - t) + s))


class PiecewiseLinearDriver(Driver):
    """Linear interpolation of knots (t_k, u_k) with t_0 = 0, u_0 = 0."""

    kind = "samples"
    family = "samples"

    def __init__(self, knots, *, family: str = "samples", params: dict | None = None,
                 exact: bool = False, horizon: float | None = None):
        k = np.asarray(knots, dtype=float)
        if k.ndim != 2 or k.shape[1] != 2 or len(k) < 2:
            raise DomainError("knots must be an (N+1, 2) array with N >= 1")
        if k[0, 0] != 0.0 or k[0, 1] != 0.0:
            raise DomainError("knots must start at [0, 0]")
        if np.any(np.diff(k[:, 0]) <= 0):
            raise DomainError("knot times must be strictly increasing")
        if not np.all(np.isfinite(k)):
            raise DomainError("knots must be finite")
        T = float(k[-1, 0])
        if horizon is not None and horizon > T:
            k = np.vstack([k, [horizon, k[-1, 1]]])
            T = float(horizon)
        super().__init__(T)
        self.knots = k
        self.family = family
        self._params = dict(params or {})
        self.exact = exact
        self._t = k[:, 0]
        self._u = k[:, 1]
        self._slopes = np.diff(self._u) / np.diff(self._t)
        self._V = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(self._u)))])

    @property
    def params(self):
        return dict(self._params)

    @property
    def breakpoints(self):
        return tuple(float(x) for x in self._t[1:-1])

    @property
    def resolution(self):
        if self.exact:
            return None
        return float(np.min(np.diff(self._t)))

    def local_spacing(self, t: float) -> float:
        """Length of the knot interval ending at (or containing) t."""
        j = int(np.searchsorted(self._t, t, side="left"))
        j = min(max(j, 1), len(self._t) - 1)
        return float(self._t[j] - self._t[j - 1])

    def to_dict(self):
        if self.family != "samples":
            return {"horizon": self.horizon, "kind": "analytic", "family": self.family,
                    "params": self.params}
        return {"horizon": self.horizon, "kind": "samples", "knots": self.knots.tolist()}

    def _value(self, t):
        return np.interp(t, self._t, self._u)

    def _variation(self, t):
        return np.interp(t, self._t, self._V)

    def _derivative(self, x):
        j = np.clip(np.searchsorted(self._t, x, side="right") - 1, 0, len(self._slopes) - 1)
        return self._slopes[j]

    def _rev_speed(self, t, s):
        # density of d|beta^t| at s is the slope left of t - s
        x = np.maximum(t - s, 0.0)
        j = np.clip(np.searchsorted(self._t, x, side="left") - 1, 0, len(self._slopes) - 1)
        return np.abs(self._slopes[j])


class _NumericVariation:
    """Cumulative variation by Gauss–Legendre quadrature of |U'| on a graded table."""

    def __init__(self, driver: Driver, cells_per_piece: int = 64):
        T = driver.horizon
        cuts = sorted({0.0, T, *[b for b in driver.breakpoints if 0 < b < T],
                       *[b for b in driver.singular_times if 0 < b < T]})
        sing = set(driver.singular_times)
        u = np.arange(cells_per_piece + 1) / cells_per_piece
        nodes = [0.0]
        for a, b in zip(cuts[:-1], cuts[1:]):
            # steeper grading next to an integrable singularity of |U'|
            p = 6.0 if (a in sing or b in sing) else 2.0
            sig = u ** p / (u ** p + (1 - u) ** p)
            nodes.extend((a + (b - a) * sig[1:]).tolist())
        self.x = np.array(nodes)
        self.driver = driver
        cell = self._cell_integrals(self.x[:-1], self.x[1:])
        self.cum = np.concatenate([[0.0], np.cumsum(cell)])

    def _cell_integrals(self, a, b):
        a = _arr(a)
        b = _arr(b)
        mid = 0.5 * (a + b)
        half = 0.5 * (b - a)
        xs = mid[..., None] + half[..., None] * _GL_NODES
        with np.errstate(invalid="ignore"):
            speed = np.abs(self.driver._derivative(xs))
            out = half * np.sum(_GL_WEIGHTS * speed, axis=-1)
        return np.where(half > 0, out, 0.0)

    def __call__(self, t):
        t = _arr(t)
        j = np.clip(np.searchsorted(self.x, t, side="right") - 1, 0, len(self.x) - 2)
        return self.cum[j] + self._cell_integrals(self.x[j], t)


class SumDriver(Driver):
    """Pointwise sum of drivers; variation by quadrature of |sum of derivatives|."""

    family = "sum"

    def __init__(self, parts: Sequence[Driver]):
        parts = list(parts)
        if not parts:
            raise DomainError("SumDriver needs at least one part")
        T = min(p.horizon for p in parts)
        super().__init__(T)
        self.parts = parts
        self._nv = None

    @property
    def params(self):
        return {"parts": [p.to_dict() for p in self.parts]}

    def to_dict(self):
        return {"horizon": self.horizon, "kind": "analytic", "family": "sum", "params": self.params}

    @property
    def breakpoints(self):
        return tuple(sorted({b for p in self.parts for b in p.breakpoints if 0 < b < self.horizon}))

    @property
    def singular_times(self):
        return tuple(sorted({b for p in self.parts for b in p.singular_times}))

    @property
    def resolution(self):
        rs = [p.resolution for p in self.parts if p.resolution is not None]
        return min(rs) if rs else None

    def _value(self, t):
        return sum(p._value(t) for p in self.parts)

    def _derivative(self, x):
        with np.errstate(invalid="ignore"):
            return sum(p._derivative(x) for p in self.parts)

    def _variation(self, t):
        if self._nv is None:
            self._nv = _NumericVariation(self)
        return self._nv(t)

    def _rev_value(self, t, s):
        return sum(p._rev_value(t, s) for p in self.parts)


class BumpDriver(Driver):
    """Smooth bump (h/2)(1 - cos(2 pi (t - a)/w)) on [a, a + w]; total variation 2h."""

    family = "bump"

    def __init__(self, height: float, start: float, width: float, horizon: float = 1.0):
        super().__init__(horizon)
        if not (width > 0 and start >= 0):
            raise DomainError("bump needs width > 0 and start >= 0")
        self.height = float(height)
        self.start = float(start)
        self.width = float(width)

    @property
    def params(self):
        return {"height": self.height, "start": self.start, "width": self.width}

    @property
    def breakpoints(self):
        return tuple(b for b in (self.start, self.start + self.width) if 0 < b < self.horizon)

    def _phase(self, t):
        return np.clip((t - self.start) / self.width, 0.0, 1.0)

    def _value(self, t):
        return 0.5 * self.height * (1.0 - np.cos(2 * np.pi * self._phase(t)))

    def _derivative(self, x):
        inside = (x > self.start) & (x < self.start + self.width)
        return np.where(inside, np.pi * self.height / self.width * np.sin(2 * np.pi * self._phase(x)), 0.0)

    def _variation(self, t):
        p = self._phase(t)
        h = abs(self.height)
        # up on [0, 1/2], down on [1/2, 1]
        return np.where(p <= 0.5, 0.5 * h * (1 - np.cos(2 * np.pi * p)), h + 0.5 * h * (1 + np.cos(2 * np.pi * p)))


class DelayMixDriver(Driver):
    """Causal discrete mollification: sum_j w_j U(t - y_j) with U = 0 before time 0."""

    family = "mollified"

    def __init__(self, base: Driver, width: float, n_nodes: int = 8):
        super().__init__(base.horizon)
        if not width > 0:
            raise DomainError("mollification width must be positive")
        self.base = base
        self.width = float(width)
        x, w = np.polynomial.legendre.leggauss(n_nodes)
        y = 0.5 * width * (x + 1.0)
        # smooth bump weights on [0, width], normalized to sum 1
        wt = w * np.sin(np.pi * y / width) ** 2
        self.delays = y
        self.weights = wt / wt.sum()
        self._nv = None

    @property
    def params(self):
        return {"base": self.base.to_dict(), "width": self.width, "n_nodes": len(self.delays)}

    @property
    def breakpoints(self):
        pts = set()
        for y in self.delays:
            for b in (0.0, *self.base.breakpoints, *self.base.singular_times):
                if 0 < b + y < self.horizon:
                    pts.add(float(b + y))
        return tuple(sorted(pts))

    @property
    def singular_times(self):
        # U is 0 before time 0, so an infinite slope of the base at 0 reappears at every delay
        pts = {float(b + y) for y in self.delays for b in self.base.singular_times
               if b + y <= self.horizon}
        return tuple(sorted(pts))

    def _value(self, t):
        out = np.zeros_like(t)
        for y, w in zip(self.delays, self.weights):
            out = out + w * np.where(t > y, self.base._value(np.clip(t - y, 0.0, None)), 0.0)
        return out

    def _derivative(self, x):
        out = np.zeros_like(x)
        for y, w in zip(self.delays, self.weights):
            with np.errstate(invalid="ignore"):
                d = self.base._derivative(np.clip(x - y, 0.0, None))
            out = out + w * np.where(x > y, d, 0.0)
        return out

    def _variation(self, t):
        if self._nv is None:
            self._nv = _NumericVariation(self)
        return self._nv(t)


# ---------------------------------------------------------------------------
# Monotone BV_LR construction with infinite 1/2-Hölder norm


def monotone_bvlr_construction(c=0.5, alpha=0.75, eps=0.1, amplitude=1.0, n_max=8, theta=0.5):
    """Knot sequences (s_n, t_n, x_n) of the monotone BV_LR example.

    s_n = 1 - c^n, x_n = amplitude (1 - c^(n alpha)) so that x - x_n <= c^(n alpha),
    and t_n - s_n = min((s_{n+1}-s_n)/2, (theta (x_{n+1}-x_n))^(1/(1/2-eps))), which
    makes (t_n - s_n)^(1/2-eps) = increment at t_n strictly below x_{n+1} - x_n.
    """
    if not 0 < c < 1:
        raise DomainError("monotone_bvlr needs c in (0, 1)")
    if not alpha > 0.5:
        raise DomainError("monotone_bvlr needs alpha > 1/2")
    if not 0 < eps < 0.5:
        raise DomainError("monotone_bvlr needs eps in (0, 1/2)")
    if not 0 < amplitude <= 1:
        raise DomainError("monotone_bvlr needs amplitude in (0, 1]")
    if int(n_max) < 1:
        raise DomainError("monotone_bvlr needs n_max >= 1")
    if not 0 < theta < 1:
        raise DomainError("monotone_bvlr needs theta in (0, 1)")
    n = np.arange(int(n_max) + 2)
    s = 1.0 - c ** n
    x = amplitude * (1.0 - c ** (n * alpha))
    gap_s = np.diff(s)[:-1]
    gap_x = np.diff(x)[:-1]
    d = np.minimum(0.5 * gap_s, (theta * gap_x) ** (1.0 / (0.5 - eps)))
    sn = s[:-1]
    xn = x[:-1]
    tn = sn[:-1] + d
    return {"s": sn[:-1], "t": tn, "x": xn[:-1], "x_next": xn[1:], "jump": d ** (0.5 - eps),
            "limit": amplitude}


def _monotone_bvlr(c=0.5, alpha=0.75, eps=0.1, amplitude=1.0, n_max=8, theta=0.5, horizon=1.0):
    if horizon < 1.0:
        raise DomainError("monotone_bvlr needs horizon >= 1")
    con = monotone_bvlr_construction(c, alpha, eps, amplitude, n_max, theta)
    pts = [(0.0, 0.0)]
    for sn, tn, xn, jn in zip(con["s"], con["t"], con["x"], con["jump"]):
        if sn > 0:
            pts.append((sn, xn))
        pts.append((tn, xn + jn))
    pts.append((1.0, con["limit"]))
    params = {"c": c, "alpha": alpha, "eps": eps, "amplitude": amplitude, "n_max": int(n_max),
              "theta": theta}
    return PiecewiseLinearDriver(pts, family="monotone_bvlr", params=params, exact=True,
                                 horizon=horizon if horizon > 1.0 else None)


def _sqrt(c=1.0, horizon=1.0):
    if c == 0:
        return ZeroDriver(horizon)
    return SqrtDriver(c, horizon)


GALLERY: dict[str, Callable[..., Driver]] = {
    "zero": lambda horizon=1.0: ZeroDriver(horizon),
    "sqrt": _sqrt,
    "logsqrt": lambda horizon=1.0: LogSqrtDriver(horizon),
    "power": lambda a=1.0, alpha=0.75, horizon=1.0: PowerDriver(a, alpha, horizon),
    "monotone_bvlr": _monotone_bvlr,
    "spiral": lambda horizon=1.0: SpiralDriver(horizon),
}

# gallery members in BV_LR (finite variation and (C1)) at default parameters
BVLR_GALLERY = ("zero", "sqrt", "logsqrt", "power", "monotone_bvlr", "spiral")
# members that also satisfy (C2) uniformly at default parameters
C2_GALLERY = ("zero", "power")


def make_example(name: str, **params) -> Driver:
    """Construct a gallery driver by name."""
    if name not in GALLERY:
        raise DomainError(f"unknown gallery driver {name!r}; choose from {sorted(GALLERY)}")
    try:
        return GALLERY[name](**params)
    except TypeError as exc:
        raise DomainError(f"bad parameters for {name!r}: {exc}") from None


# ---------------------------------------------------------------------------


def total_variation(d: Driver, a: float, b: float) -> float:
    """|U|_TV on [a, b] = V(b) - V(a)."""
    if not (0 <= a <= b <= d.horizon * (1 + 1e-12)):
        raise DomainError(f"interval [{a}, {b}] not inside [0, {d.horizon}]")
    return float(d.variation(b) - d.variation(a))


@dataclass(frozen=True)
class ReversedIncrement:
    """beta_s = U(t) - U(t - s) on s in [0, t], viewed as a Stieltjes integrator."""

    base: Driver
    anchor: float
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def value(self, s):
        s = self._check(s)
        return _ret(self.base.rev_value(self.anchor, s), s)

    def variation(self, s):
        s = self._check(s)
        return _ret(self.base.rev_variation(self.anchor, s), s)

    def speed(self, s):
        s = self._check(s)
        return _ret(self.base.rev_speed(self.anchor, s), s)

    def breakpoints(self, s_end: float | None = None) -> np.ndarray:
        """Offsets s in (0, s_end) where the integrator is not smooth."""
        s_end = self.anchor if s_end is None else s_end
        pts = {self.anchor - b for b in (*self.base.breakpoints, *self.base.singular_times)}
        return np.array(sorted(p for p in pts if 0 < p < s_end))

    def singular_offsets(self, s_end: float | None = None) -> np.ndarray:
        s_end = self.anchor if s_end is None else s_end
        return np.array(sorted(self.anchor - b for b in self.base.singular_times
                               if 0 <= self.anchor - b <= s_end))

    def _check(self, s):
        a = _arr(s)
        if np.any(a < -1e-14) or np.any(a > self.anchor * (1 + 1e-12)):
            raise DomainError(f"offset outside [0, {self.anchor:g}]")
        return np.clip(a, 0.0, self.anchor) if np.ndim(s) else float(np.clip(a, 0.0, self.anchor))


def reversed_increment(d: Driver, t: float) -> ReversedIncrement:
    if not (0 < t <= d.horizon * (1 + 1e-12)):
        raise DomainError(f"anchor t={t} outside (0, {d.horizon}]")
    return ReversedIncrement(d, float(min(t, d.horizon)))


# ---------------------------------------------------------------------------
# File format


def driver_from_dict(obj: dict) -> Driver:
    if not isinstance(obj, dict):
        raise DomainError("driver description must be an object")
    kind = obj.get("kind", "analytic")
    if kind == "samples":
        knots = obj.get("knots")
        if knots is None:
            raise DomainError("samples driver needs 'knots'")
        return PiecewiseLinearDriver(knots, horizon=obj.get("horizon"))
    if kind != "analytic":
        raise DomainError(f"unknown driver kind {kind!r}")
    family = obj.get("family")
    params = dict(obj.get("params", {}))
    if "horizon" in obj:
        params["horizon"] = float(obj["horizon"])
    if family == "sum":
        parts = [driver_from_dict(p) for p in params.get("parts", [])]
        return SumDriver(parts)
    if family == "bump":
        return BumpDriver(**params)
    if family == "mollified":
        base = driver_from_dict(params.pop("base"))
        params.pop("horizon", None)
        return DelayMixDriver(base, **params)
    return make_example(family, **params)


_KNOT_RE = re.compile(r"\[\s*([^\[\],]+?)\s*,\s*([^\[\],]+?)\s*\]")


def _line_col(text: str, pos: int) -> tuple[int, int]:
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, col


def parse_driver(text: str) -> Driver:
    """Parse the JSON driver format, reporting errors with line/column/offset."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DriverParseError(f"invalid JSON: {exc.msg}", exc.lineno, exc.colno, exc.pos) from None
    if isinstance(obj, dict) and obj.get("kind") == "samples":
        knots = obj.get("knots")
        start = text.find('"knots"')
        spans = [m.start() for m in _KNOT_RE.finditer(text, max(start, 0))] if start >= 0 else []
        bad = _first_bad_knot(knots)
        if bad is not None:
            idx, why = bad
            pos = spans[idx] if idx < len(spans) else max(start, 0)
            line, col = _line_col(text, pos)
            raise DriverParseError(f"knot {idx}: {why}", line, col, pos)
    try:
        return driver_from_dict(obj)
    except DomainError as exc:
        raise DriverParseError(str(exc), 1, 1, 0) from None


def _first_bad_knot(knots):
    if not isinstance(knots, list) or len(knots) < 2:
        return 0, "need at least two [t, u] knots"
    prev = None
    for i, k in enumerate(knots):
        if not (isinstance(k, list) and len(k) == 2 and all(isinstance(v, (int, float)) for v in k)):
            return i, "knot must be a pair of numbers"
        if i == 0 and (k[0] != 0 or k[1] != 0):
            return 0, "knots must start at [0, 0]"
        if prev is not None and not k[0] > prev:
            return i, "knot times must be strictly increasing"
        prev = k[0]
    return None


def load_driver(path) -> Driver:
    with open(path, encoding="utf-8") as fh:
        return parse_driver(fh.read())
