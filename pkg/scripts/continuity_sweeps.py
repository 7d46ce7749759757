"""All three perturbation families around sqrt(1); one CSV per family.

    python3 scripts/continuity_sweeps.py --out runs/sweeps
"""

from __future__ import annotations

import argparse
from pathlib import Path

from bvloewner.continuity import PerturbationExperiment, run_perturbation_sweep
from bvloewner.drivers import make_example
from bvloewner.export import write_manifest


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="runs/sweeps")
    ap.add_argument("--n", type=int, default=128)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    base = make_example("sqrt", c=1.0)
    arts = []
    for fam in ("bump", "jitter", "mollify"):
        rep = run_perturbation_sweep(PerturbationExperiment(base, fam, grid_n=args.n, seed=args.seed))
        rep.to_csv(out / f"sweep_{fam}.csv")
        arts.append(out / f"sweep_{fam}.csv")
        dists = ", ".join(f"{r.trace_dist:.2e}" for r in rep.rows)
        print(f"{fam:<8s} ({rep.mode}) trace distances: {dists}  decreasing={rep.decreasing}")
    write_manifest(out, "scripts/continuity_sweeps", vars(args), arts)


if __name__ == "__main__":
    main()
