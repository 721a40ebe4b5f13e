"""Command-line front end: densities, samples and the verification suite.

Exit codes: 0 success (and all selected checks passed), 1 a verification
check failed, 2 invalid arguments or parameters.
"""

import argparse
import io
import json
import os
import platform
import sys
import tempfile
from datetime import datetime, timezone

import numpy as np

from . import sampling, spectral, verify
from .gslaw import GammaParams, StableParams

LAWS = ("gs", "stable", "gamma", "gs-subordinator", "first-passage", "isotropic-gs")


class UsageError(Exception):
    """Invalid invocation; reported with exit code 2."""


def write_atomic(path, text):
    """Write ``text`` to ``path`` through a temporary file in the same directory and a rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _stable_params(args):
    if args.law == "gs-subordinator":
        if args.beta not in (None, 1.0):
            raise UsageError("gs-subordinator fixes beta = 1")
        if not args.alpha < 1.0:
            raise UsageError(f"gs-subordinator needs alpha < 1, got {args.alpha}")
        return StableParams(args.alpha, 1.0, args.sigma)
    if args.law == "first-passage":
        return StableParams(0.5, 1.0, 1.0)
    return StableParams(args.alpha, 0.0 if args.beta is None else args.beta, args.sigma)


def _grid(args):
    return spectral.Grid1D(args.xmin, args.xmax, args.n)


def _field_json(field):
    return json.dumps({"x": field.grid.x.tolist(), "density": field.values.tolist(), "t": field.t,
                       "provenance": field.provenance, "grid": field.grid.to_dict()}, sort_keys=True)


def cmd_density(args):
    if args.t < 0:
        raise UsageError("t must be nonnegative")
    if args.law == "isotropic-gs" and args.dim == 2:
        if args.t == 0:
            raise UsageError("the 2-D density needs t > 0")
        x, _, values, _ = verify.invert_charfn_2d(lambda r: (1 + r ** args.alpha) ** (-args.t),
                                                   args.xmax - args.xmin, args.n)
        x = x + (args.xmin + args.xmax) / 2
        if args.format == "json":
            text = json.dumps({"x": x.tolist(), "y": x.tolist(), "density": values.tolist(), "t": args.t,
                               "provenance": "fft_inversion"}, sort_keys=True)
        else:
            buf = io.StringIO()
            buf.write("x,y,density,t,provenance\n")
            for i, xv in enumerate(x):
                for j, yv in enumerate(x):
                    buf.write(f"{xv:.17g},{yv:.17g},{values[i, j]:.17g},{args.t:.17g},fft_inversion\n")
            text = buf.getvalue()
        write_atomic(args.out, text)
        return 0
    grid = _grid(args)
    if args.law == "gamma":
        if args.t <= 0:
            raise UsageError("the Gamma density needs t > 0")
        field = spectral.gamma_density_field(GammaParams(args.b), grid, args.t)
    elif args.law == "isotropic-gs":
        if args.dim != 1:
            raise UsageError("isotropic-gs densities are available for dim 1 and 2")
        field = spectral.gs_density(StableParams(args.alpha, 0.0, 1.0), grid, args.t)
    elif args.law == "stable":
        if args.t <= 0:
            raise UsageError("the stable density needs t > 0")
        field = spectral.stable_density(_stable_params(args), grid, args.t)
    else:
        field = spectral.gs_density(_stable_params(args), grid, args.t)
    if args.format == "json":
        write_atomic(args.out, _field_json(field))
    else:
        buf = io.StringIO()
        field.to_csv(buf)
        write_atomic(args.out, buf.getvalue())
    return 0


def _sidecar_path(path):
    root, ext = os.path.splitext(path)
    return root + ".json" if ext.lower() != ".json" else root + ".sidecar.json"


def cmd_sample(args):
    if args.count < 0:
        raise UsageError("count must be nonnegative")
    if args.seed is None:
        raise UsageError("sampling needs --seed")
    if args.law == "gamma":
        batch = sampling.sample_gamma(GammaParams(args.b), args.t, args.count, args.seed, args.jobs)
    elif args.law == "stable":
        batch = sampling.sample_stable(_stable_params(args), args.t, args.count, args.seed, args.jobs)
    elif args.law == "first-passage":
        batch = sampling.sample_first_passage_gamma_barrier(args.t, args.count, args.seed, args.jobs)
    elif args.law == "isotropic-gs":
        batch = sampling.sample_isotropic_gs(args.alpha, args.dim, args.t, args.count, args.seed, args.jobs)
    else:
        batch = sampling.sample_gs(_stable_params(args), args.t, args.count, args.seed, args.jobs)
    if args.format == "json":
        doc = dict(batch.sidecar(), values=batch.values.tolist())
        write_atomic(args.out, json.dumps(doc, sort_keys=True))
    else:
        buf = io.StringIO()
        batch.to_csv(buf)
        write_atomic(args.out, buf.getvalue())
        write_atomic(_sidecar_path(args.out), batch.sidecar_json())
    return 0


def _selected(eq):
    if eq == "all":
        return list(verify.EQUATION_IDS)
    chosen = [e.strip() for e in eq.split(",") if e.strip()]
    bad = [e for e in chosen if e not in verify.EQUATION_IDS]
    if bad or not chosen:
        raise UsageError(f"unknown equation id(s) {bad or [eq]}; choose 'all' or from "
                         + ", ".join(verify.EQUATION_IDS))
    return chosen


def cmd_verify(args):
    chosen = _selected(args.eq)
    grid = _grid(args)
    reports = verify.run_suite(chosen, grid, jobs=args.jobs)
    out = args.out
    for eq, rep in reports.items():
        write_atomic(os.path.join(out, f"{eq}.json"), rep.to_json())
        print(f"{eq}: {'PASS' if rep.passed else 'FAIL'} linf={rep.linf:.3e} tol={rep.tolerance:.3e}")
    meta = {"created": datetime.now(timezone.utc).isoformat(), "python": platform.python_version(),
            "numpy": np.__version__, "grid": grid.to_dict(), "selector": args.eq}
    doc = verify.summary(reports, meta)
    write_atomic(os.path.join(out, "verification_summary.json"),
                 json.dumps(verify._jsonable(doc), indent=2, sort_keys=True))
    return 0 if doc["pass"] else 1


def build_parser():
    parser = argparse.ArgumentParser(prog="gstable", description="Geometric stable laws: densities, "
                                     "samples and equation verification.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output file (density, sample) or directory (verify)")
    common.add_argument("--seed", type=int, default=None, help="master seed (required for sample)")
    common.add_argument("--jobs", type=int, default=1, help="worker threads (default 1)")
    common.add_argument("--format", choices=("csv", "json"), default="csv", help="data file format (default csv)")
    common.add_argument("--xmin", type=float, default=-40.0, help="grid left end (default -40)")
    common.add_argument("--xmax", type=float, default=40.0, help="grid right end (default 40)")
    common.add_argument("--n", type=int, default=2 ** 14, help="grid points, a power of two (default 16384)")
    laws = argparse.ArgumentParser(add_help=False)
    laws.add_argument("--law", choices=LAWS, default="gs", help="distribution (default gs)")
    laws.add_argument("--alpha", type=float, default=2.0, help="stability index in (0, 2] (default 2)")
    laws.add_argument("--beta", type=float, default=None, help="asymmetry in [-1, 1] (default 0)")
    laws.add_argument("--sigma", type=float, default=1.0, help="scale (default 1)")
    laws.add_argument("--t", type=float, default=1.0, help="time (default 1)")
    laws.add_argument("--b", type=float, default=1.0, help="Gamma rate (default 1)")
    laws.add_argument("--dim", type=int, default=1, help="dimension for isotropic-gs (default 1)")
    sub = parser.add_subparsers(dest="command", required=True)
    d = sub.add_parser("density", parents=[common, laws], help="density on a grid")
    d.set_defaults(func=cmd_density, default_out="density.csv")
    s = sub.add_parser("sample", parents=[common, laws], help="Monte Carlo variates")
    s.add_argument("--count", type=int, default=10 ** 5, help="number of variates (default 100000)")
    s.set_defaults(func=cmd_sample, default_out="samples.csv")
    v = sub.add_parser("verify", parents=[common], help="run equation checks")
    v.add_argument("--eq", default="all", help="'all', an equation id, or a comma-separated list")
    v.set_defaults(func=cmd_verify, default_out="reports")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.out is None:
        args.out = args.default_out
    if args.jobs < 1:
        print("error: --jobs must be at least 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
