"""Command-line entry point: ``bvloewner <subcommand> ...``.

Exit codes: 0 ok, 1 input error, 2 solver nonconvergence, 3 check failed,
4 inconclusive. Every subcommand writes manifest.json into its output directory.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .acceptance import check_names, run_acceptance
from .conditions import FAIL, INCONCLUSIVE, PASS, check_conditions
from .continuity import PerturbationExperiment, run_perturbation_sweep
from .drivers import BVLR_GALLERY, C2_GALLERY, GALLERY, load_driver, make_example
from .errors import (ConditionError, DivergentIntegralError, DomainError, DriftError,
                     DriverParseError, NonConvergenceError, NumericalFailure, SolverFailure)
from .export import validation_json, write_json, write_manifest, write_svg
from .regularity import derivative_report
from .reverse import SolverConfig
from .trace import trace_incremental, trace_per_anchor, uniform_grid

EXIT_OK, EXIT_INPUT, EXIT_NONCONV, EXIT_FAIL, EXIT_INCONCLUSIVE = 0, 1, 2, 3, 4
FORMATS = ("csv", "json", "svg")


def _threads():
    raw = os.environ.get("LOEWNER_THREADS")
    if raw is None:
        return None
    try:
        n = int(raw)
    except ValueError:
        raise DomainError(f"LOEWNER_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise DomainError(f"LOEWNER_THREADS must be a positive integer, got {raw!r}")
    return n


@contextlib.contextmanager
def _thread_cap(n):
    # the solvers are vectorized numpy; the only parallelism is in the BLAS/OpenMP pools
    if n is None:
        yield
        return
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:
        yield
        return
    with threadpool_limits(limits=n):
        yield


def _driver(args):
    if args.driver and args.gallery:
        raise DomainError("give exactly one of --driver and --gallery")
    if args.driver:
        if args.c is not None:
            raise DomainError("--c only applies to gallery drivers")
        d = load_driver(args.driver)
        if args.horizon is not None and abs(args.horizon - d.horizon) > 1e-12:
            raise DomainError("--horizon conflicts with the horizon of the driver file")
        return d
    if not args.gallery:
        raise DomainError("give exactly one of --driver and --gallery")
    params = dict(_kv(p) for p in args.param or ())
    if args.c is not None:
        if args.gallery not in ("sqrt",):
            raise DomainError("--c only applies to the sqrt gallery driver")
        params["c"] = args.c
    if args.horizon is not None:
        params["horizon"] = args.horizon
    return make_example(args.gallery, **params)


def _kv(text):
    if "=" not in text:
        raise DomainError(f"--param expects key=value, got {text!r}")
    k, v = text.split("=", 1)
    try:
        return k, float(v) if any(ch in v for ch in ".eE") else int(v)
    except ValueError:
        raise DomainError(f"--param value for {k!r} must be numeric") from None


def _cfg(args) -> SolverConfig:
    return SolverConfig(base_step=args.base_step) if getattr(args, "base_step", None) else SolverConfig()


def _formats(text):
    fm = tuple(f.strip() for f in text.split(",") if f.strip())
    bad = [f for f in fm if f not in FORMATS]
    if bad or not fm:
        raise DomainError(f"--formats must be a comma list drawn from {FORMATS}")
    return fm


def _outdir(args) -> Path:
    out = Path(args.out or f"runs/{args.cmd}")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _echo(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func",)}


def _exit_for(verdict: str) -> int:
    return {PASS: EXIT_OK, FAIL: EXIT_FAIL}.get(verdict, EXIT_INCONCLUSIVE)


# ---------------------------------------------------------------------------
# subcommands


def cmd_trace(args) -> int:
    if args.n < 2:
        raise DomainError("--n must be at least 2")
    fm = _formats(args.formats)
    d = _driver(args)
    out = _outdir(args)
    grid = uniform_grid(d.horizon, args.n)
    fn = trace_incremental if args.method == "incremental" else trace_per_anchor
    p = fn(d, grid, _cfg(args))
    arts = []
    if "csv" in fm:
        p.to_csv(out / "trace.csv", sqrt_time=args.sqrt_time)
        arts.append(out / "trace.csv")
    if "json" in fm:
        meta = {k: v for k, v in p.meta.items() if k != "seconds"}
        arts.append(write_json(out / "trace.json", {
            "t": p.t, "re_gamma": p.gamma.real, "im_gamma": p.gamma.imag, "err_estimate": p.err,
            "method": p.method, "driver": p.driver, "meta": meta}))
    if "svg" in fm:
        arts.append(write_svg(out / "trace.svg", p, d, title=f"{d.family} trace, N={args.n}"))
    write_manifest(out, "trace", _echo(args), arts)
    print(f"trace: {len(p.t)} points, max error estimate {float(np.max(p.err)):.2e} -> {out}")
    return EXIT_OK


def cmd_check(args) -> int:
    d = _driver(args)
    out = _outdir(args)
    rep = check_conditions(d)
    path = write_json(out / "check.json", {"driver": d.to_dict(), "verdict": rep.verdict, **rep.to_dict()})
    write_manifest(out, "check", _echo(args), [path])
    print(f"(C1) {rep.c1_verdict}  (C2) {rep.c2_verdict}"
          + (f" ({rep.c2_detail.get('reason')})" if rep.c2_detail.get("reason") else ""))
    if rep.witness:
        print("witness:", json.dumps(rep.witness, sort_keys=True, default=float))
    return _exit_for(rep.verdict)


def cmd_derivative(args) -> int:
    d = _driver(args)
    out = _outdir(args)
    t0s = [float(x) for x in args.t0.split(",")]
    try:
        rep = derivative_report(d, t0s, h=args.h, cfg=_cfg(args), force=args.force)
    except DivergentIntegralError as exc:
        path = write_json(out / "derivative.json", {"error": "divergent", "t0": exc.t0, "detail": str(exc)})
        write_manifest(out, "derivative", _echo(args), [path])
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except ConditionError as exc:
        path = write_json(out / "derivative.json", {"error": "condition", "detail": str(exc)})
        write_manifest(out, "derivative", _echo(args), [path])
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    rep.to_csv(out / "derivative.csv")
    write_manifest(out, "derivative", _echo(args), [out / "derivative.csv"])
    for t, a, r in zip(rep.t0, rep.analytic, rep.rel_err):
        print(f"t0={t:g}  theta'={a.real:.10g}{a.imag:+.10g}i  rel_err_fd={r:.2e}")
    return EXIT_OK


def cmd_validate(args) -> int:
    out = _outdir(args)
    only = [x.strip() for x in args.only.split(",")] if args.only else None
    if only:
        bad = [x for x in only if x not in check_names()]
        if bad:
            raise DomainError(f"unknown checks {bad}; choose from {list(check_names())}")
    checks = run_acceptance(only=only, base_step=args.base_step, enforce_budget=not args.no_budget,
                            log=print)
    path = write_json(out / "validation.json", validation_json(checks))
    write_manifest(out, "validate", _echo(args), [path])
    n_ok = sum(c.passed for c in checks)
    print(f"{n_ok}/{len(checks)} checks passed")
    return EXIT_OK if n_ok == len(checks) else EXIT_FAIL


def cmd_sweep(args) -> int:
    d = _driver(args)
    out = _outdir(args)
    mags = tuple(float(x) for x in args.magnitudes.split(","))
    exp = PerturbationExperiment(d, args.family, mags, grid_n=args.n, seed=args.seed)
    rep = run_perturbation_sweep(exp, _cfg(args))
    path = out / f"sweep_{args.family}.csv"
    rep.to_csv(path)
    write_manifest(out, "sweep", _echo(args), [path])
    for r in rep.rows:
        print(f"magnitude={r.magnitude:.1e}  tv={r.tv_dist:.3e}  sup={r.sup_dist:.3e}  "
              f"trace={r.trace_dist:.3e}" + (f"  skipped ({r.skipped})" if r.skipped else ""))
    return EXIT_OK if rep.passed(args.final_tol) else EXIT_FAIL


def cmd_gallery_list(args) -> int:
    rows = []
    for name in sorted(GALLERY):
        d = make_example(name)
        rows.append({"name": name, "family": d.family, "params": d.params, "horizon": d.horizon,
                     "bvlr": name in BVLR_GALLERY, "c2": name in C2_GALLERY})
        tags = ",".join(t for t, ok in (("BV_LR", name in BVLR_GALLERY), ("C2", name in C2_GALLERY)) if ok)
        print(f"{name:<14s} {tags:<10s} {json.dumps(d.params, sort_keys=True, default=float)}")
    out = _outdir(args)
    path = write_json(out / "gallery.json", rows)
    write_manifest(out, "gallery-list", _echo(args), [path])
    return EXIT_OK


# ---------------------------------------------------------------------------


def _driver_flags(p):
    p.add_argument("--gallery", choices=sorted(GALLERY), help="gallery driver name")
    p.add_argument("--driver", help="JSON driver file")
    p.add_argument("--c", type=float, help="coefficient of the sqrt gallery driver")
    p.add_argument("--horizon", type=float)
    p.add_argument("--param", action="append", metavar="KEY=VALUE", help="extra gallery parameter")


def _common(p, base_step=True):
    p.add_argument("--out", help="output directory (default runs/<subcommand>)")
    p.add_argument("--seed", type=int, default=0)
    if base_step:
        p.add_argument("--base-step", type=float, dest="base_step",
                       help="fixed reverse-solver step instead of the graded mesh")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bvloewner", description="Loewner traces for BV drivers")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("trace", help="compute a trace on a uniform grid")
    _driver_flags(p)
    _common(p)
    p.add_argument("--n", type=int, default=256, help="number of grid steps")
    p.add_argument("--method", choices=("per-anchor", "incremental"), default="per-anchor")
    p.add_argument("--formats", default="csv,svg")
    p.add_argument("--sqrt-time", action="store_true", dest="sqrt_time")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("check", help="test conditions (C1) and (C2)")
    _driver_flags(p)
    _common(p, base_step=False)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("derivative", help="analytic vs finite-difference theta'")
    _driver_flags(p)
    _common(p)
    p.add_argument("--t0", default="0.25,0.5,1")
    p.add_argument("--h", type=float, default=1e-3)
    p.add_argument("--force", action="store_true", help="skip the (C2) gate (divergence still errors)")
    p.set_defaults(func=cmd_derivative)

    p = sub.add_parser("validate", help="run the acceptance suite")
    _common(p)
    p.add_argument("--only", help=f"comma list from {','.join(check_names())}")
    p.add_argument("--no-budget", action="store_true", dest="no_budget",
                   help="do not fail checks that exceed their wall-time budget")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("sweep", help="perturbation sweep of the driver-to-trace map")
    _driver_flags(p)
    _common(p)
    p.add_argument("--family", choices=("bump", "jitter", "mollify"), default="bump")
    p.add_argument("--magnitudes", default="1e-1,1e-2,1e-3,1e-4")
    p.add_argument("--n", type=int, default=128)
    p.add_argument("--final-tol", type=float, default=1e-3, dest="final_tol")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gallery-list", help="list the gallery drivers")
    _common(p, base_step=False)
    p.set_defaults(func=cmd_gallery_list)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    try:
        with _thread_cap(_threads()):
            return args.func(args)
    except DriverParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NonConvergenceError, SolverFailure, DriftError, NumericalFailure) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NONCONV
    except (DomainError, FileNotFoundError, IsADirectoryError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
