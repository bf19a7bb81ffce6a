"""Command-line entry point.

Exit codes: 0 on success, 2 for invalid input, 3 when a solver fails.
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, oracle
from .figures import FIGURES, Table, build_figure, spectrum_table
from .floquet import FloquetError
from .kernels import BACKEND, SingularSystemError
from .model import (
    DriveConfig,
    PhysParams,
    Scheme,
    UnmatchableError,
    exp_minus_2r,
    kappa_tilde,
    matched_drives,
    squeeze_parameter,
)
from .scenario import ConfigError, Evaluation, Scenario, evaluate, load_scenario
from .search import BracketError, threshold_cooperativity

log = logging.getLogger("optosqueeze")

EXIT_OK, EXIT_INVALID, EXIT_SOLVER = 0, 2, 3


class InvariantError(RuntimeError):
    pass


# -- output --------------------------------------------------------------------


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, str):
        return value
    return format(float(value), ".17g")


def render_csv(table: Table) -> str:
    buf = io.StringIO()
    for line in table.comments:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([format_cell(v) for v in row])
    return buf.getvalue()


def write_atomic(path: Path, text: str):
    """Write ``text`` so that ``path`` either appears complete or not at all."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def check_rows(ev: Evaluation):
    for i in range(len(ev.spectra)):
        bad = ev.spectra.point(i).violations()
        if bad:
            raise InvariantError(f"row {i} (omega={ev.spectra.omega[i]!r}): {', '.join(bad)}")


# -- commands --------------------------------------------------------------------


def _apply_solver_flags(scenario: Scenario, args) -> Scenario:
    changes = {}
    if args.solver is not None:
        changes["solver"] = args.solver
    if args.harmonics is not None:
        changes["n_harm"] = args.harmonics
    return replace(scenario, **changes) if changes else scenario


def _evaluate_chunked(scenario: Scenario, jobs: int) -> Evaluation:
    """Split the grid across workers; row order is the grid order."""
    w = scenario.grid.values()
    if jobs <= 1 or w.size < 2 * jobs:
        return evaluate(scenario, w)
    chunks = np.array_split(w, jobs)
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        parts = list(pool.map(lambda c: evaluate(scenario, c), chunks))
    sp = parts[0].spectra
    fields = ("omega", "s_u1", "s_u2", "s_u12", "s_opt", "phi_opt", "n_eff")
    merged = type(sp)(*(np.concatenate([getattr(p.spectra, f) for p in parts]) for f in fields))
    flags = np.concatenate([p.converged for p in parts])
    return Evaluation(merged, parts[0].solver, flags)


def cmd_spectrum(args) -> int:
    scenario = _apply_solver_flags(load_scenario(args.config), args)
    ev = _evaluate_chunked(scenario, args.jobs)
    check_rows(ev)
    p, d = scenario.params, scenario.drives
    comments = [
        f"scheme = {d.scheme.value}, solver = {ev.solver}",
        f"omega_m = {p.omega_m!r}, kappa_out = {p.kappa_out!r}, kappa_int = {p.kappa_int!r}, "
        f"gamma_m = {p.gamma_m!r}, n_th = {p.n_th!r}, g0 = {p.g0!r}, gamma_l = {p.gamma_l!r}",
        f"g_minus = {d.g_minus!r}, g_plus = {d.g_plus!r}, g_zero = {d.g_zero!r}, a_zero = {d.a_zero!r}",
        "omega is measured from the cavity resonance; spectra in units where shot noise is 0.5",
    ]
    write_atomic(Path(args.out), render_csv(spectrum_table("spectrum", ev, comments)))
    return EXIT_OK


def cmd_fig(args) -> int:
    options = {"jobs": args.jobs}
    if args.points is not None:
        options["points"] = args.points
    if args.harmonics is not None:
        options["n_harm"] = args.harmonics
    tables = build_figure(args.name, **options)
    texts = [(t.name, render_csv(t)) for t in tables]
    out = Path(args.out)
    for name, text in texts:
        write_atomic(out / f"{name}.csv", text)
        print(out / f"{name}.csv")
    return EXIT_OK


def _params_from_args(args) -> PhysParams:
    return PhysParams(
        omega_m=args.omega_m, kappa_out=args.kappa, kappa_int=args.kappa_int,
        gamma_m=args.gamma_m, n_th=args.n_th,
    )


def cmd_match(args) -> int:
    p = _params_from_args(args)
    d = matched_drives(p, args.c)
    ratio = oracle.s_u1_resonance(p.kappa_total, kappa_tilde(p, d), p.n_th, squeeze_parameter(d.g_plus, d.g_minus))
    lines = [
        ("c", args.c),
        ("g_minus", d.g_minus),
        ("g_plus", d.g_plus),
        ("r", squeeze_parameter(d.g_plus, d.g_minus)),
        ("exp_minus_2r", exp_minus_2r(d.g_plus, d.g_minus)),
        ("kappa_tilde_over_kappa", kappa_tilde(p, d) / p.kappa_total),
        ("s_u1_zero_over_shot_noise", ratio),
    ]
    for key, value in lines:
        print(f"{key} = {format_cell(value)}")
    return EXIT_OK


def cmd_threshold(args) -> int:
    if args.ratio is not None:
        target = args.ratio
    else:
        target = 10 ** (-args.target / 10)
    p = _params_from_args(args)
    if args.scheme == "ponderomotive":
        scenario = Scenario(p, DriveConfig(g_minus=0.0, scheme=Scheme.PONDEROMOTIVE))
        if args.sideband:
            half = args.half_width * p.gamma_m
            window = (p.omega_m - half, p.omega_m + half)
        else:
            window = None
    else:
        scheme = Scheme.DISSIPATIVE_LOSSY if p.kappa_int > 0 else Scheme.DISSIPATIVE
        scenario = Scenario(p, matched_drives(p, 1.0, scheme))
        window = None
    res = threshold_cooperativity(scenario, target, window=window, bracket=(1.0, args.c_max))
    print(f"target_ratio = {format_cell(target)}")
    print(f"c_min = {format_cell(res.c_min)}")
    print(f"ratio = {format_cell(res.ratio)}")
    if args.scheme == "dissipative" and args.kappa_int == 0:
        print(f"c_min_closed_form = {format_cell(oracle.threshold_cooperativity_exact(p.n_th, target))}")
    return EXIT_OK


# -- parser ----------------------------------------------------------------------


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _add_param_flags(sub, n_th=10.0):
    sub.add_argument("--kappa", type=float, default=1.0, help="output-port decay rate (default 1)")
    sub.add_argument("--kappa-int", type=float, default=0.0, help="internal loss rate")
    sub.add_argument("--gamma-m", type=float, default=2e-5, help="mechanical damping rate")
    sub.add_argument("--omega-m", type=float, default=10.0, help="mechanical frequency")
    sub.add_argument("--n-th", type=float, default=n_th, help="thermal occupancy")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="optosqueeze",
        description="Squeezed output light of a two-tone driven optomechanical cavity.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--solver", choices=("rwa", "floquet"), default=None,
                        help="override the solver named in the config")
    parser.add_argument("--harmonics", type=_positive_int, default=None, metavar="N",
                        help="initial sideband truncation for the floquet solver")
    parser.add_argument("--jobs", type=_positive_int, default=min(4, os.cpu_count() or 1),
                        help="worker threads for sweeps")
    parser.add_argument("-v", "--verbose", action="store_true")
    subs = parser.add_subparsers(dest="command", required=True)

    sp = subs.add_parser("spectrum", help="evaluate a scenario config on its frequency grid")
    sp.add_argument("--config", required=True, help="key=value or JSON scenario file")
    sp.add_argument("--out", required=True, help="CSV file to write")
    sp.set_defaults(func=cmd_spectrum)

    fp = subs.add_parser("fig", help="write the data series of one figure")
    fp.add_argument("name", choices=sorted(FIGURES))
    fp.add_argument("--out", required=True, help="output directory")
    fp.add_argument("--points", type=_positive_int, default=None, help="points per axis")
    fp.set_defaults(func=cmd_fig)

    mp = subs.add_parser("match", help="impedance-matched drives at cooperativity C")
    mp.add_argument("--c", type=float, required=True)
    _add_param_flags(mp)
    mp.set_defaults(func=cmd_match)

    tp = subs.add_parser("threshold", help="cooperativity needed for a squeezing target")
    group = tp.add_mutually_exclusive_group(required=True)
    group.add_argument("--target", type=float, metavar="DB", help="squeezing in dB below shot noise")
    group.add_argument("--ratio", type=float, help="target noise over shot noise, in (0, 1)")
    tp.add_argument("--scheme", choices=("dissipative", "ponderomotive"), default="dissipative")
    tp.add_argument("--sideband", action="store_true",
                    help="ponderomotive: search the band near the mechanical sideband")
    tp.add_argument("--half-width", type=float, default=20.0,
                    help="sideband window half width in units of gamma_m")
    tp.add_argument("--c-max", type=float, default=1e12, help="upper end of the search bracket")
    _add_param_flags(tp)
    tp.set_defaults(func=cmd_threshold)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    log.debug("kernel backend: %s", BACKEND)
    try:
        return args.func(args)
    except (ConfigError, UnmatchableError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (SingularSystemError, FloquetError, BracketError, InvariantError, ArithmeticError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
