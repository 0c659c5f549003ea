"""Command-line entry point: figure sweeps, single-point evaluation and optimization.

Exit codes: 0 all points succeeded, 1 some points failed, 2 configuration or
usage error.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys

from . import __version__
from .config import ConfigError, design_config, parse_config, sweep_values, without_phonons
from .svg import plot_csv
from .sweeps import FIG_COLUMNS, optimize, run_points, taper_point, write_csv

EXIT_OK, EXIT_PARTIAL, EXIT_CONFIG = 0, 1, 2

PLOTS = {
    "fig2": ("R_top_nm", ("gamma_L", "gamma_L_T")),
    "fig3": ("theta_deg", ("T11",)),
    "fig4": ("n_top", ("beta",)),
    "fig5": ("n_top", ("eps", "eta", "eps_eta")),
}
SWEPT = {"fig2": "r_top_nm", "fig3": "theta_deg", "fig4": "n_top", "fig5": "n_top"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hourglass-sps", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "fig2": "collection efficiency versus top radius",
        "fig3": "taper transmission versus sidewall angle",
        "fig4": "beta, F_p, Q and V_n versus top mirror pairs",
        "fig5": "efficiency and indistinguishability versus top mirror pairs",
        "evaluate": "figure of merit of the configured design point",
        "optimize": "golden-section search of eps*eta over one parameter",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", metavar="PATH", help="YAML config (default: built-in design with the phonon preset)")
        p.add_argument("--out", metavar="DIR", default=".", help="output directory (default: current)")
        p.add_argument("--jobs", type=int, default=1, metavar="N", help="worker processes (default: 1)")
        p.add_argument("--no-phonons", action="store_true", help="disable the phonon bath")
        p.add_argument("--svg", action="store_true", help="also write an SVG plot")
        p.add_argument("-v", "--verbose", action="store_true")
        if name == "optimize":
            p.add_argument("--parameter", choices=("n_top", "r_top_nm", "theta_deg"))
            p.add_argument("--lower", type=float)
            p.add_argument("--upper", type=float)
    return parser


def _load(args):
    cfg = design_config() if args.config is None else parse_config(args.config)
    if args.no_phonons:
        cfg = without_phonons(cfg)
    if args.jobs < 1:
        raise ConfigError("--jobs: must be at least 1")
    return cfg


def _finish(args, command, columns, rows, cfg, x_col=None, y_cols=None):
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, f"{command}.csv")
    write_csv(path, command, columns, rows, cfg)
    print(f"wrote {path}")
    if args.svg and x_col:
        svg_path = os.path.join(args.out, f"{command}.svg")
        try:
            plot_csv(path, svg_path, x_col, y_cols, title=command)
            print(f"wrote {svg_path}")
        except ValueError as exc:
            print(f"no plot: {exc}", file=sys.stderr)
    failed = [r for r in rows if r.get("status") != "ok"]
    for r in failed:
        print(f"failed point: {r}", file=sys.stderr)
    return EXIT_PARTIAL if failed else EXIT_OK


def _best(rows, key):
    ok = [r for r in rows if r.get("status") == "ok" and not math.isnan(r.get(key, math.nan))]
    return max(ok, key=lambda r: r[key]) if ok else None


def run(args) -> int:
    cfg = _load(args)
    cmd = args.command
    if cmd in SWEPT:
        values = sweep_values(cfg, cmd, SWEPT[cmd])
        extra = taper_point(cfg, cfg["geometry"]["theta_deg"])["T11"] if cmd == "fig5" else None
        rows = run_points(cmd, cfg, values, jobs=args.jobs, extra=extra)
        x_col, y_cols = PLOTS[cmd]
        code = _finish(args, cmd, FIG_COLUMNS[cmd], rows, cfg, x_col, y_cols)
        if cmd == "fig2" and (b := _best(rows, "gamma_L")):
            print(f"gamma_L peak {b['gamma_L']:.6f} at R_top = {b['R_top_nm']:.1f} nm")
        if cmd == "fig5" and (b := _best(rows, "eps_eta")):
            e = _best(rows, "eta")
            print(f"eps*eta maximum {b['eps_eta']:.6f} at n_top = {b['n_top']}; eta maximum {e['eta']:.6f} at n_top = {e['n_top']}")
        return code
    if cmd == "evaluate":
        rows = run_points("evaluate", cfg, [int(cfg["geometry"]["n_top"])], jobs=1)
        return _finish(args, cmd, FIG_COLUMNS["evaluate"], rows, cfg)
    # optimize
    opt = cfg["sweep"].get("optimize", {})
    parameter = args.parameter or opt.get("parameter", "n_top")
    lower = args.lower if args.lower is not None else opt.get("lower")
    upper = args.upper if args.upper is not None else opt.get("upper")
    if lower is None or upper is None:
        raise ConfigError("sweep.optimize: lower and upper bounds are required")
    best, row, rows = optimize(cfg, parameter, lower, upper, jobs=args.jobs)
    cols = (parameter,) + tuple(c for c in FIG_COLUMNS["evaluate"] if c != parameter)
    code = _finish(args, cmd, cols, rows, cfg)
    print(f"best {parameter} = {best:g}: eps*eta = {row.get('eps_eta', math.nan):.6f}")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
