"""Command-line interface.

Subcommands mirror the library layers: `zeta` and `lj` evaluate single
structures, `minimize` runs the multistart optimizer, and the three `scan-*`
commands regenerate the difference-curve and phase-diagram data as CSV or
JSON (optionally rendered to a PNG with --plot).

Exit codes: 0 success, 2 domain error (pole, invalid argument values),
3 non-convergence, 64 usage error (unknown structure, flag or subcommand).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import lattice as lat
from . import scan as scan_mod
from .energy import LJExponents, lj_energy, riesz_energy
from .optimize import (
    MinimizeConfig,
    NonConvergenceError,
    lj_fixed_volume_objective,
    minimize_fixed_volume,
    minimize_global,
    riesz_objective,
)
from .zeta import zeta_of

EX_OK = 0
EX_DOMAIN = 2
EX_NOCONV = 3
EX_USAGE = 64

_STRUCTURES = ("sc", "fcc", "bcc", "sh", "hcp")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


class _UsageError(Exception):
    pass


def _label_from_args(args) -> lat.StructureLabel:
    name = args.structure.lower()
    if name == "sh":
        if args.delta is None:
            raise _UsageError("structure 'sh' requires --delta")
        return lat.SH(args.delta)
    return getattr(lat, name.upper())


def _add_output_flags(p):
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--plot", nargs="?", const="", default=None,
                   metavar="PNG", help="also render a figure (default: "
                   "output path with .png suffix)")


def build_parser() -> _Parser:
    p = _Parser(prog="latsum",
                description="Epstein zeta functions and lattice energy "
                            "minimization in three dimensions")
    sub = p.add_subparsers(dest="command", required=True)

    pz = sub.add_parser("zeta", parents=[], help="evaluate one zeta value")
    pz.add_argument("--structure", required=True, choices=_STRUCTURES)
    pz.add_argument("--s", required=True, type=float)
    pz.add_argument("--delta", type=float, default=None)
    pz.add_argument("--volume", type=float, default=1.0)
    pz.add_argument("--out", default=None)

    pl = sub.add_parser("lj", help="evaluate one Lennard-Jones energy")
    pl.add_argument("--structure", required=True, choices=_STRUCTURES)
    pl.add_argument("--n", required=True, type=float)
    pl.add_argument("--m", required=True, type=float)
    pl.add_argument("--volume", type=float, default=1.0)
    pl.add_argument("--delta", type=float, default=None)
    pl.add_argument("--out", default=None)

    pm = sub.add_parser("minimize", help="multistart energy minimization")
    grp = pm.add_mutually_exclusive_group(required=True)
    grp.add_argument("--riesz", type=float, metavar="S")
    grp.add_argument("--lj", nargs=2, type=float, metavar=("N", "M"))
    vgrp = pm.add_mutually_exclusive_group(required=True)
    vgrp.add_argument("--volume", type=float)
    vgrp.add_argument("--global", dest="global_", action="store_true")
    pm.add_argument("--include-hcp", action="store_true")
    pm.add_argument("--starts", type=int, default=8)
    pm.add_argument("--hops", type=int, default=5)
    pm.add_argument("--max-iters", type=int, default=500)
    pm.add_argument("--seed", type=int, default=0)
    pm.add_argument("--out", default=None)

    pr = sub.add_parser("scan-riesz", help="difference curves over s")
    pr.add_argument("--preset", choices=tuple(scan_mod.RIESZ_GRIDS), default=None)
    pr.add_argument("--s-min", type=float, default=0.0)
    pr.add_argument("--s-max", type=float, default=3.0)
    pr.add_argument("--step", type=float, default=0.01)
    _add_output_flags(pr)

    pp = sub.add_parser("scan-phase", help="LJ phase diagram cells")
    pp.add_argument("--m", required=True, type=float)
    pp.add_argument("--n", type=float, default=None)
    pp.add_argument("--n-min", type=float, default=None)
    pp.add_argument("--n-max", type=float, default=None)
    pp.add_argument("--n-steps", type=int, default=1)
    pp.add_argument("--v-min", required=True, type=float)
    pp.add_argument("--v-max", required=True, type=float)
    pp.add_argument("--steps", required=True, type=int)
    pp.add_argument("--include-hcp", dest="include_hcp", action="store_true",
                    default=True)
    pp.add_argument("--no-include-hcp", dest="include_hcp",
                    action="store_false")
    pp.add_argument("--cross-check", dest="cross_check", action="store_true",
                    default=True)
    pp.add_argument("--no-cross-check", dest="cross_check",
                    action="store_false")
    _add_output_flags(pp)

    pd = sub.add_parser("scan-delta", help="optimal SH ratio over volume")
    pd.add_argument("--n", required=True, type=float)
    pd.add_argument("--m", required=True, type=float)
    pd.add_argument("--v-min", required=True, type=float)
    pd.add_argument("--v-max", required=True, type=float)
    pd.add_argument("--steps", required=True, type=int)
    _add_output_flags(pd)
    return p


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _plot_path(args) -> str | None:
    if args.plot is None:
        return None
    if args.plot:
        return args.plot
    if args.out:
        base = args.out.rsplit(".", 1)[0]
        return base + ".png"
    return "latsum-scan.png"


def _cmd_zeta(args) -> int:
    label = _label_from_args(args)
    res = zeta_of(label, args.s)
    value = riesz_energy(label, args.s, args.volume)
    payload = {"structure": str(label), "s": args.s, "V": args.volume,
               "value": value, "est_error": res.est_error, "route": res.route}
    _emit(json.dumps(payload, indent=1) + "\n", args.out)
    return EX_OK


def _cmd_lj(args) -> int:
    label = _label_from_args(args)
    e = LJExponents(args.n, args.m,
                    mode="summable" if args.m > 3 else "continued")
    ev = lj_energy(label, e, args.volume)
    payload = {"structure": str(label), "n": args.n, "m": args.m,
               "V": args.volume}
    payload.update(ev.to_dict())
    _emit(json.dumps(payload, indent=1) + "\n", args.out)
    return EX_OK


def _cmd_minimize(args) -> int:
    cfg = MinimizeConfig(starts=args.starts, hops=args.hops,
                         max_iters=args.max_iters, seed=args.seed)
    if args.riesz is not None:
        if args.global_:
            raise ValueError("the Riesz energy has no free-volume minimum; "
                             "use --volume")
        rep = minimize_fixed_volume(riesz_objective(args.riesz),
                                    args.volume, cfg)
    else:
        n, m = args.lj
        e = LJExponents(n, m, mode="summable" if m > 3 else "continued")
        if args.global_:
            rep = minimize_global(e, cfg, include_hcp=args.include_hcp)
        else:
            rep = minimize_fixed_volume(lj_fixed_volume_objective(e),
                                        args.volume, cfg)
    _emit(json.dumps(rep.to_dict(), indent=1) + "\n", args.out)
    return EX_OK if rep.converged else EX_NOCONV


def _cmd_scan_riesz(args) -> int:
    if args.preset:
        lo, hi, step = scan_mod.RIESZ_GRIDS[args.preset]
    else:
        lo, hi, step = args.s_min, args.s_max, args.step
    grid = scan_mod.make_grid(lo, hi, step)
    records = scan_mod.scan_riesz_difference(grid, threads=args.threads)
    text = (scan_mod.records_to_csv(records) if args.format == "csv"
            else scan_mod.to_json_text(records))
    _emit(text, args.out)
    path = _plot_path(args)
    if path:
        from .plotting import plot_riesz_scan
        plot_riesz_scan(records, path)
    return EX_OK


def _cmd_scan_phase(args) -> int:
    if args.n is not None:
        n_grid = [args.n]
    elif args.n_min is not None and args.n_max is not None:
        n_grid = list(np.linspace(args.n_min, args.n_max, args.n_steps))
    else:
        raise _UsageError("scan-phase needs --n or --n-min/--n-max")
    V_grid = list(np.linspace(args.v_min, args.v_max, args.steps))
    cfg = MinimizeConfig(starts=2, hops=2, seed=args.seed)
    cells = scan_mod.scan_lj_phase(args.m, n_grid, V_grid,
                                   include_hcp=args.include_hcp,
                                   cross_check=args.cross_check, cfg=cfg,
                                   threads=args.threads)
    text = (scan_mod.cells_to_csv(cells) if args.format == "csv"
            else scan_mod.to_json_text(cells))
    _emit(text, args.out)
    path = _plot_path(args)
    if path:
        from .plotting import plot_phase_cells
        plot_phase_cells(cells, path)
    return EX_OK


def _cmd_scan_delta(args) -> int:
    e = LJExponents(args.n, args.m,
                    mode="summable" if args.m > 3 else "continued")
    V_grid = list(np.linspace(args.v_min, args.v_max, args.steps))
    records = scan_mod.scan_delta_curve(e, V_grid, threads=args.threads)
    text = (scan_mod.records_to_csv(records) if args.format == "csv"
            else scan_mod.to_json_text(records))
    _emit(text, args.out)
    path = _plot_path(args)
    if path:
        from .plotting import plot_delta_curve
        plot_delta_curve(records, path)
    return EX_OK


_DISPATCH = {
    "zeta": _cmd_zeta,
    "lj": _cmd_lj,
    "minimize": _cmd_minimize,
    "scan-riesz": _cmd_scan_riesz,
    "scan-phase": _cmd_scan_phase,
    "scan-delta": _cmd_scan_delta,
}


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _DISPATCH[args.command](args)
    except SystemExit as exc:  # argparse --help
        return int(exc.code or 0)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EX_USAGE
    except NonConvergenceError as exc:
        print(f"latsum: non-convergence: {exc}", file=sys.stderr)
        return EX_NOCONV
    except ValueError as exc:
        print(f"latsum: domain error: {exc}", file=sys.stderr)
        return EX_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
