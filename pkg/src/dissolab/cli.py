"""Command-line driver: ``dissolab {analytic,scan,dissociate,threshold,twobody}``.

Exit codes: 0 success, 1 solver failure, 2 input or domain error.

Any long option can also come from a ``key = value`` file passed with
``--config``; options given on the command line win.
"""
from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
import tempfile

from . import analytic1d
from .descent import ConvergenceError, GridTooSmallError, SolverConfig
from .model import LineGrid, RadialGrid
from .plot import write_svg
from .solver1d import (
    MOLECULE_SPACING,
    ATOM_SPACING,
    default_atom_grid,
    default_molecule_grid,
    dissociation_curve_1d,
    splitting_scan_1d,
    two_particle_ground,
    default_twobody_grid,
)
from .solver3d import UEG_CXC, hls_threshold_bound, splitting_scan_3d, symmetry_threshold

EXIT_OK, EXIT_SOLVER, EXIT_INPUT = 0, 1, 2

log = logging.getLogger("dissolab")


class InputError(ValueError):
    pass


def fmt(x) -> str:
    return f"{float(x):.17g}"


def write_csv(path, header, rows):
    """Write atomically: a failed write leaves no partial file behind."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".csv")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([fmt(v) if isinstance(v, float) else v for v in row])
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_csv(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [row for row in reader]


def read_config(path) -> dict:
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InputError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            values[key.replace("-", "_")] = value
    return values


def _solver_config(args) -> SolverConfig:
    return SolverConfig(grad_tol=args.grad_tol, max_iter=args.max_iter, seed=args.seed)


def _positive(name, value):
    if not value > 0:
        raise InputError(f"--{name} must be positive, got {value}")


# ---------------------------------------------------------------------------
# commands

def cmd_analytic(args) -> int:
    alpha, c = args.alpha, args.cxc
    energy = analytic1d.atom_energy_exact(alpha, c)
    print(f"alpha={alpha:g} c_xc={c:g}")
    if alpha > 0 and c > 0.5:
        sol = analytic1d.sech_params(alpha, c)
        print(f"a={sol.a:.10g} b={sol.b:.10g} x0={sol.x0:.10g}")
    else:
        print(f"b={analytic1d.decay_rate(alpha, c):.10g} (no sech profile)")
    print(f"energy={energy:.7f}")
    if 0 <= alpha <= 2:
        print(f"splitting_sum={analytic1d.splitting_sum_exact(alpha, c):.7f}")
    return EXIT_OK


def cmd_scan(args) -> int:
    _positive("n", args.n)
    _positive("step", args.step)
    cfg = _solver_config(args)
    if args.model == "1d":
        grid = default_atom_grid(args.spacing or ATOM_SPACING)
        scan = splitting_scan_1d(args.n, args.cxc, args.step, cfg, grid)
    else:
        grid = RadialGrid.for_charge(args.n, args.grid_points)
        scan = splitting_scan_3d(args.n, args.cxc, args.step, cfg, grid, jobs=args.jobs)
    write_csv(args.out, ["alpha", "I_alpha", "I_complement", "sum"], scan.samples)
    best = min(s[3] for s in scan.samples)
    print(f"argmin={scan.argmin_alpha:.4f} min_sum={best:.7f} symmetric={scan.symmetric}")
    if scan.unbound:
        print(f"unbound masses (nonnegative Fermi level): {', '.join(f'{m:g}' for m in scan.unbound)}")
    if args.plot:
        write_svg(
            args.plot,
            [s[0] for s in scan.samples],
            [s[3] for s in scan.samples],
            title=f"{args.model} splitting, c_xc={args.cxc:g}",
            xlabel="alpha",
            ylabel="I_alpha + I_complement",
            marker_x=scan.argmin_alpha,
        )
    return EXIT_OK


def cmd_dissociate(args) -> int:
    if args.r_max < 0:
        raise InputError("--r-max must be >= 0")
    _positive("r-step", args.r_step)
    R_values, k = [], 0
    while k * args.r_step <= args.r_max * (1 + 1e-12):
        R_values.append(k * args.r_step)
        k += 1
    h = args.spacing or MOLECULE_SPACING
    grid = LineGrid.around([0.0, R_values[-1]], 40.0, h)
    points = dissociation_curve_1d(args.lam, args.cxc, R_values, _solver_config(args), grid, jobs=args.jobs)
    rows = [(p.R, p.energy, "" if p.gap is None else p.gap) for p in points]
    write_csv(args.out, ["R", "energy", "gap_to_asymptote"], rows)
    last = points[-1]
    gap = "n/a" if last.gap is None else f"{last.gap:.3e}"
    print(f"R={last.R:g} energy={last.energy:.7f} gap_to_asymptote={gap}")
    if args.plot:
        write_svg(args.plot, [p.R for p in points], [p.energy for p in points],
                  title=f"1D dissociation, lambda={args.lam:g}, c_xc={args.cxc:g}", xlabel="R", ylabel="energy")
    return EXIT_OK


def cmd_threshold(args) -> int:
    if args.bound_only:
        print(f"{hls_threshold_bound(args.n):.4f}")
        return EXIT_OK
    cfg = _solver_config(args)
    grid = RadialGrid.for_charge(args.n, args.grid_points)
    bracket = symmetry_threshold(args.n, args.c_lo, args.c_hi, args.tol, cfg, grid, args.step, jobs=args.jobs)
    write_csv(args.out, ["c_xc", "argmin_alpha", "symmetric"],
              [(c, a, str(bool(s)).lower()) for c, a, s in bracket.probes])
    print(f"N={args.n:g} c_low={bracket.c_low:.6f} c_high={bracket.c_high:.6f} "
          f"hls_bound={hls_threshold_bound(args.n):.4f}")
    return EXIT_OK


def cmd_twobody(args) -> int:
    h = args.spacing
    R_all = [args.r] + ([args.compare] if args.compare is not None else [])
    grid = default_twobody_grid(max(R_all), h, args.margin)
    for R in R_all:
        res = two_particle_ground(R, grid, args.tol)
        print(f"R={R:g} energy={res.energy:.10f} lattice_limit={res.lattice_limit:.10f} "
              f"discretization_error={res.discretization_error:.3e} iterations={res.iterations}")
    return EXIT_OK


# ---------------------------------------------------------------------------

def _solver_options(p):
    p.add_argument("--grad-tol", type=float, default=1e-7, help="projected-gradient tolerance (default 1e-7)")
    p.add_argument("--max-iter", type=int, default=5000, help="iteration cap per solve (default 5000)")
    p.add_argument("--seed", type=int, default=None, help="adds one seeded random start to each multi-start solve")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for scan points (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dissolab", description=__doc__.split("\n")[0])
    parser.add_argument("--config", help="key = value file with option defaults")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analytic", help="closed-form 1D atom (c_xc >= 1/2)")
    p.add_argument("--alpha", type=float, required=True, help="electron mass")
    p.add_argument("--cxc", type=float, required=True, help="exchange strength")
    p.set_defaults(func=cmd_analytic)

    p = sub.add_parser("scan", help="splitting scan alpha -> I_alpha + I_{2N-alpha}")
    p.add_argument("--model", choices=["1d", "3d"], default="3d")
    p.add_argument("--n", type=float, default=1.0, help="electrons per atom N (default 1)")
    p.add_argument("--cxc", type=float, default=UEG_CXC, help=f"exchange strength (default {UEG_CXC:.4f})")
    p.add_argument("--step", type=float, default=0.05, help="alpha step, must divide N (default 0.05)")
    p.add_argument("--out", default="scan.csv", help="CSV output (default scan.csv)")
    p.add_argument("--plot", help="SVG output path")
    p.add_argument("--grid-points", type=int, default=600, help="3D radial grid size (default 600)")
    p.add_argument("--spacing", type=float, default=None, help=f"1D grid spacing (default {ATOM_SPACING})")
    _solver_options(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("dissociate", help="1D molecule energy versus R")
    p.add_argument("--lambda", dest="lam", type=float, default=2.0, help="total mass (default 2)")
    p.add_argument("--cxc", type=float, required=True)
    p.add_argument("--r-max", type=float, default=30.0, help="largest R (default 30)")
    p.add_argument("--r-step", type=float, default=2.0, help="R step (default 2)")
    p.add_argument("--spacing", type=float, default=None, help=f"grid spacing (default {MOLECULE_SPACING})")
    p.add_argument("--out", default="dissociation.csv", help="CSV output (default dissociation.csv)")
    p.add_argument("--plot", help="SVG output path")
    _solver_options(p)
    p.set_defaults(func=cmd_dissociate)

    p = sub.add_parser("threshold", help="bisect c_xc for the symmetry-breaking onset (3D)")
    p.add_argument("--n", type=float, default=1.0)
    p.add_argument("--c-lo", type=float, default=UEG_CXC)
    p.add_argument("--c-hi", type=float, default=5.0)
    p.add_argument("--tol", type=float, default=0.1, help="final bracket width (default 0.1)")
    p.add_argument("--step", type=float, default=0.05, help="alpha step of each probe scan")
    p.add_argument("--grid-points", type=int, default=600)
    p.add_argument("--out", default="threshold.csv", help="CSV of probes (default threshold.csv)")
    p.add_argument("--bound-only", action="store_true", help="print the analytic sufficient bound and exit")
    _solver_options(p)
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("twobody", help="two-electron 1D molecule by inverse iteration")
    p.add_argument("--r", type=float, default=30.0)
    p.add_argument("--compare", type=float, default=None, help="second R solved on the same grid")
    p.add_argument("--spacing", type=float, default=0.2)
    p.add_argument("--margin", type=float, default=10.0)
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_twobody)
    return parser


def _apply_config(parser, path):
    values = read_config(path)
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    known = set()
    for sp in subparsers.choices.values():
        actions = {a.dest: a for a in sp._actions}
        defaults = {}
        for key, value in values.items():
            if key not in actions:
                continue
            if isinstance(actions[key], argparse._StoreTrueAction):
                if value.lower() not in ("true", "false", "1", "0", "yes", "no"):
                    raise InputError(f"{key}: expected a boolean, got {value!r}")
                value = value.lower() in ("true", "1", "yes")
            defaults[key] = value
        sp.set_defaults(**defaults)
        known |= set(actions)
    unknown = sorted(set(values) - known)
    if unknown:
        raise InputError(f"unknown config keys: {', '.join(unknown)}")


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    try:
        known, _ = pre.parse_known_args(argv)
        if known.config:
            _apply_config(parser, known.config)
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (ConvergenceError, GridTooSmallError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
