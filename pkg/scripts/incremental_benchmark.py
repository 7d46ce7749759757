"""Per-anchor vs incremental trace: agreement and wall-time scaling in N.

    python3 scripts/incremental_benchmark.py --driver sqrt --sizes 128 256 512 1024 --repeats 2
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from bvloewner.drivers import make_example
from bvloewner.trace import trace_incremental, trace_per_anchor, uniform_grid


def _best(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--driver", default="sqrt")
    ap.add_argument("--sizes", type=int, nargs="+", default=[128, 256, 512, 1024])
    ap.add_argument("--repeats", type=int, default=2)
    args = ap.parse_args()
    d = make_example(args.driver)
    rows = []
    print(f"{'N':>6s} {'per-anchor s':>13s} {'incremental s':>14s} {'max |diff|':>11s}")
    for n in args.sizes:
        g = uniform_grid(d.horizon, n)
        ta, a = _best(lambda: trace_per_anchor(d, g), args.repeats)
        ti, b = _best(lambda: trace_incremental(d, g), args.repeats)
        diff = float(np.max(np.abs(a.gamma - b.gamma)))
        rows.append((n, ta, ti))
        print(f"{n:6d} {ta:13.3f} {ti:14.3f} {diff:11.2e}")
    n, ta, ti = map(np.array, zip(*rows))
    if len(n) > 1:
        print(f"fitted exponents: per-anchor {np.polyfit(np.log(n), np.log(ta), 1)[0]:.2f}, "
              f"incremental {np.polyfit(np.log(n), np.log(ti), 1)[0]:.2f}")


if __name__ == "__main__":
    main()
