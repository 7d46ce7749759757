"""Compute every gallery trace, write CSV + SVG, and print a one-line summary each.

    python3 scripts/gallery_traces.py --n 256 --out runs/gallery
"""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from bvloewner.drivers import GALLERY, make_example
from bvloewner.export import write_manifest, write_svg
from bvloewner.forward import roundtrip_residual
from bvloewner.trace import simpleness_check, trace_per_anchor, uniform_grid


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=256)
    ap.add_argument("--out", default="runs/gallery")
    ap.add_argument("--roundtrip", type=int, default=8, help="forward checks per trace (0: skip)")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    arts = []
    for name in sorted(GALLERY):
        d = make_example(name)
        p = trace_per_anchor(d, uniform_grid(d.horizon, args.n))
        p.to_csv(out / f"{name}.csv")
        write_svg(out / f"{name}.svg", p, d, title=f"{name}, N={args.n}")
        arts += [out / f"{name}.csv", out / f"{name}.svg"]
        simple = simpleness_check(p)
        rt = roundtrip_residual(d, p, sample=args.roundtrip).max_residual if args.roundtrip else float("nan")
        print(f"{name:<14s} tip={complex(p.gamma[-1]):.6f}  max_err={np.max(p.err):.1e}  "
              f"simple_ratio={simple.min_ratio:.3f}  roundtrip={rt:.1e}  {p.meta['seconds']:.2f}s")
    write_manifest(out, "scripts/gallery_traces", vars(args), arts)


if __name__ == "__main__":
    main()
