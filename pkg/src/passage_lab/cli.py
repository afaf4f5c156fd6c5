"""Command-line interface: ``passage-lab {density,figure,verify,reduce}``.

Exit codes: 0 success, 1 failed verification, 2 bad usage or parameters
outside a model's domain, 3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import logging
import math
import subprocess
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .checks import run_suite
from .figures import figure_table
from .linear import PassageProblem, first_passage_density, last_passage_density
from .numerics import ConvergenceError
from .successive import GridResolutionError, nth_passage_law, t2_density, tau2_density
from .transforms import pushforward_law, reduce_conjugated, reduce_gbm, reduce_ou

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

log = logging.getLogger("passage_lab")


class UsageError(ValueError):
    pass


def describe_version() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def manifest_lines(command: str, params: dict, seed: int = 0) -> list[str]:
    stamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return [
        f"# command: {command}",
        f"# parameters: {json.dumps(params, sort_keys=True)}",
        f"# version: {describe_version()}",
        f"# seed: {seed}",
        f"# timestamp: {stamp}",
    ]


def write_csv(stream, header: list[str], rows: np.ndarray, manifest: list[str]):
    for line in manifest:
        stream.write(line + "\n")
    stream.write(",".join(header) + "\n")
    for row in np.atleast_2d(rows):
        stream.write(",".join("%.12g" % v for v in row) + "\n")


def _emit(args, header, rows, manifest):
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            write_csv(fh, header, rows, manifest)
    else:
        write_csv(sys.stdout, header, rows, manifest)


def _grid(args) -> np.ndarray:
    if args.points < 2:
        raise UsageError("--points must be >= 2")
    if not 0 < args.tmin < args.tmax:
        raise UsageError("need 0 < --tmin < --tmax")
    if args.spacing == "log":
        return np.geomspace(args.tmin, args.tmax, args.points)
    return np.linspace(args.tmin, args.tmax, args.points)


def _params(args, *names) -> dict:
    return {k: getattr(args, k) for k in names if getattr(args, k, None) is not None}


def cmd_density(args) -> int:
    kind = args.kind
    if kind == "psi":
        if not (args.t > 0 and math.isfinite(args.t)):
            raise UsageError("--t must be positive")
        if args.points < 1:
            raise UsageError("--points must be >= 1")
        u = args.t * np.arange(1, args.points + 1) / (args.points + 1)
        rows = np.column_stack([u, [last_passage_density(args.b, args.t, ui) for ui in u]])
        params = _params(args, "kind", "b", "t", "points")
    else:
        p = PassageProblem(args.x, args.a, args.b)
        grid = _grid(args)
        if kind == "tau1":
            vals = [first_passage_density(p, t) for t in grid]
        elif kind == "t2":
            vals = [t2_density(p, t) for t in grid]
        elif kind == "tau2":
            vals = [tau2_density(p, t) for t in grid]
        else:
            if args.n < 1:
                raise UsageError("--n must be >= 1")
            law = nth_passage_law(p, args.n, grid)
            vals = law.density.values
            log.info("tau_%d atom at infinity: %.6g", args.n, law.atom_at_infinity)
        rows = np.column_stack([grid, vals])
        params = _params(args, "kind", "x", "a", "b", "tmin", "tmax", "points", "spacing")
        if kind == "taun":
            params["n"] = args.n
    _emit(args, ["t", "density"], rows, manifest_lines("density", params))
    return EXIT_OK


def cmd_figure(args) -> int:
    grid = None
    if args.n != 1:
        grid = _grid(args)
    header, rows = figure_table(args.n, grid)
    params = {"n": args.n}
    if grid is not None:
        params.update(_params(args, "tmin", "tmax", "points", "spacing"))
    _emit(args, header, rows, manifest_lines("figure", params))
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.paths < 1:
        raise UsageError("--paths must be >= 1")
    checks = run_suite(args.suite, seed=args.seed, paths=args.paths)
    width = max(len(c.name) for c in checks)
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name:<{width}}  {c.detail}  [{c.seconds:.1f}s]")
    failed = [c.name for c in checks if not c.passed]
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    if failed:
        print("failed: " + "; ".join(failed), file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def _reduced(args):
    proc = args.process
    if proc in ("cir", "wf"):
        if args.barrier is None:
            raise UsageError(f"--barrier is required for {proc}")
        return reduce_conjugated(proc, args.z, args.barrier)
    if proc == "gbm":
        missing = [f for f in ("r", "sigma", "s0", "muprime") if getattr(args, f) is None]
        if missing:
            raise UsageError("gbm needs " + ", ".join("--" + m for m in missing))
        return reduce_gbm(args.z, args.r, args.sigma, args.s0, args.muprime)
    missing = [f for f in ("mu", "sigma", "s0") if getattr(args, f) is None]
    if missing:
        raise UsageError("ou needs " + ", ".join("--" + m for m in missing))
    return reduce_ou(args.z, args.mu, args.sigma, args.s0)


def cmd_reduce(args) -> int:
    red = _reduced(args)
    bm = red.bm_problem
    summary = [
        f"x' = {bm.x:.12g}",
        f"a' = {bm.a:.12g}",
        f"b' = {bm.b:.12g}",
        f"time change: {red.time_map.name}",
        f"reduction: {red.description}",
    ]
    if not args.emit_density:
        print("\n".join(summary))
        return EXIT_OK
    grid = _grid(args)
    law = pushforward_law(red, args.n, grid)
    params = _params(args, "process", "z", "barrier", "r", "sigma", "s0", "muprime", "mu", "n", "tmin", "tmax", "points", "spacing")
    manifest = manifest_lines("reduce", params) + [f"# {line}" for line in summary]
    manifest.append(f"# atom at infinity: {law.atom_at_infinity:.12g}")
    _emit(args, ["t", "density"], np.column_stack([grid, law.density.values]), manifest)
    return EXIT_OK


def _add_grid(p, tmin=1e-4, tmax=1e8, points=1000, spacing="log"):
    p.add_argument("--tmin", type=float, default=tmin)
    p.add_argument("--tmax", type=float, default=tmax)
    p.add_argument("--points", type=int, default=points)
    p.add_argument("--spacing", choices=("log", "linear"), default=spacing)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="passage-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    d = sub.add_parser("density", help="tabulate a passage-time density")
    d.add_argument("--kind", choices=("tau1", "psi", "t2", "tau2", "taun"), required=True)
    d.add_argument("--x", type=float, default=0.0)
    d.add_argument("--a", type=float, default=1.0)
    d.add_argument("--b", type=float, default=0.0)
    d.add_argument("--t", type=float, default=1.0, help="horizon for --kind psi")
    d.add_argument("--n", type=int, default=2, help="passage index for --kind taun")
    _add_grid(d)
    d.add_argument("--out")
    d.set_defaults(func=cmd_density)

    f = sub.add_parser("figure", help="emit the data behind a figure")
    f.add_argument("--n", type=int, choices=(1, 2, 3, 4), required=True)
    _add_grid(f, tmin=0.02, tmax=5.0, points=250, spacing="linear")
    f.add_argument("--out")
    f.set_defaults(func=cmd_figure)

    v = sub.add_parser("verify", help="run verification suites")
    v.add_argument("--suite", choices=("analytic", "mc", "all"), default="all")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--paths", type=int, default=100_000)
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("reduce", help="reduce a diffusion passage problem to Brownian motion")
    r.add_argument("--process", choices=("cir", "wf", "gbm", "ou"), required=True)
    r.add_argument("--z", type=float, required=True)
    r.add_argument("--barrier", type=float)
    r.add_argument("--r", type=float)
    r.add_argument("--sigma", type=float)
    r.add_argument("--s0", type=float)
    r.add_argument("--muprime", type=float)
    r.add_argument("--mu", type=float)
    r.add_argument("--emit-density", action="store_true")
    r.add_argument("--n", type=int, default=1)
    _add_grid(r, tmin=0.01, tmax=10.0, points=200, spacing="linear")
    r.add_argument("--out")
    r.set_defaults(func=cmd_reduce)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConvergenceError, GridResolutionError) as exc:
        print(f"error: numerical non-convergence: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
