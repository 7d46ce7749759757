"""Artifact writers: JSON reports, run manifests and the SVG trace plot.

Everything here is deterministic for fixed input (no timestamps, fixed float
formatting), so repeated runs produce byte-identical files.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from . import __version__

__all__ = ["write_json", "write_manifest", "trace_svg", "write_svg", "validation_json"]


def _clean(x):
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        v = float(x)
        return v if math.isfinite(v) else str(v)
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, Path):
        return str(x)
    return x


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def write_manifest(outdir, subcommand: str, config: dict, artifacts=()) -> Path:
    """Config echo plus library version, next to the run's artifacts."""
    outdir = Path(outdir)
    man = {"library": "bvloewner", "version": __version__, "subcommand": subcommand,
           "config": config, "artifacts": sorted(Path(a).name for a in artifacts)}
    return write_json(outdir / "manifest.json", man)


def validation_json(checks) -> list:
    """Checks as a list of {name, value, tolerance, verdict}."""
    return [{"name": c.name, "value": c.value, "tolerance": c.tolerance,
             "verdict": "pass" if c.passed else "fail"} for c in checks]


def _fmt(v: float) -> str:
    return f"{v:.3f}"


def trace_svg(gamma, t, driver_values=None, width: int = 640, height: int = 480,
              title: str = "") -> str:
    """SVG of the trace polyline in an axis box, with the driver drawn as an inset."""
    z = np.asarray(gamma)
    x, y = z.real, z.imag
    pad = 40
    xmin, xmax = float(x.min()), float(x.max())
    ymin, ymax = 0.0, float(max(y.max(), 1e-12))
    span = max(xmax - xmin, ymax - ymin, 1e-12)
    cx = 0.5 * (xmin + xmax)
    xmin, xmax = cx - 0.55 * span, cx + 0.55 * span
    ymax = ymin + 1.1 * span
    sx = (width - 2 * pad) / (xmax - xmin)
    sy = (height - 2 * pad) / (ymax - ymin)
    sc = min(sx, sy)
    X = lambda v: pad + (v - xmin) * sc
    Y = lambda v: height - pad - (v - ymin) * sc
    pts = " ".join(f"{_fmt(X(a))},{_fmt(Y(b))}" for a, b in zip(x, y))
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{pad}" y="{pad}" width="{width - 2 * pad}" height="{height - 2 * pad}" '
        'fill="none" stroke="black" stroke-width="1"/>',
        f'<line x1="{pad}" y1="{_fmt(Y(0))}" x2="{width - pad}" y2="{_fmt(Y(0))}" stroke="#888" '
        'stroke-width="0.5"/>',
        f'<polyline points="{pts}" fill="none" stroke="#1f4e9c" stroke-width="1.2"/>',
        f'<text x="{pad}" y="{height - 12}" font-family="monospace" font-size="11">'
        f'Re [{xmin:.3g}, {xmax:.3g}]  Im [0, {ymax:.3g}]</text>',
    ]
    if title:
        out.append(f'<text x="{pad}" y="{pad - 12}" font-family="monospace" font-size="12">{title}</text>')
    if driver_values is not None:
        u = np.asarray(driver_values, dtype=float)
        tt = np.asarray(t, dtype=float)
        iw, ih = 0.3 * width, 0.22 * height
        ix, iy = width - pad - iw - 6, pad + 6
        umin, umax = float(u.min()), float(u.max())
        du = max(umax - umin, 1e-12)
        dt = max(float(tt[-1] - tt[0]), 1e-12)
        ipts = " ".join(f"{_fmt(ix + (a - tt[0]) / dt * iw)},{_fmt(iy + ih - (b - umin) / du * ih)}"
                        for a, b in zip(tt, u))
        out += [
            f'<rect x="{_fmt(ix)}" y="{_fmt(iy)}" width="{_fmt(iw)}" height="{_fmt(ih)}" '
            'fill="#f7f7f7" stroke="black" stroke-width="0.8"/>',
            f'<polyline points="{ipts}" fill="none" stroke="#b03a2e" stroke-width="1"/>',
            f'<text x="{_fmt(ix + 4)}" y="{_fmt(iy + 12)}" font-family="monospace" font-size="10">'
            f'driver U(t), [{umin:.3g}, {umax:.3g}]</text>',
        ]
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path, trace, driver, title: str = "") -> Path:
    path = Path(path)
    path.write_text(trace_svg(trace.gamma, trace.t, driver.value(trace.t), title=title), encoding="utf-8")
    return path
