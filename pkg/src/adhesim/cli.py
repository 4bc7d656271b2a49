"""Command-line entry point: ``adhesim <subcommand> --config FILE [--out DIR] ...``."""

from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

import numpy as np

from . import io
from .acceptance import run_all
from .asymptotics import noflux_expansion
from .bifurcation import bifurcation_table, continue_branch, newton_steady
from .config import RunConfig, parse_config
from .diagnostics import count_peaks, energy, steady_state_checks
from .errors import AdhesimError, ConfigError
from .kernel import _ready, delta_moment, first_moment_coefficient, moment
from .sensing import Periodic
from .solver import initial_condition, integrate, run_to_steady, steady_residual

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_VERIFY = 0, 2, 3, 4
SUBCOMMANDS = ("simulate", "steady", "bifurcate", "branch", "asymptotic", "kernel-info", "verify")


def _initial(cfg: RunConfig):
    ic = cfg.ic
    return initial_condition(cfg.build_grid(), ic.kind, ic.mean, ic.amp, ic.seed, ic.mode_n)


def _trace_rows(kym, cfg: RunConfig, params):
    grid = params.grid
    periodic = isinstance(params.mode, Periodic)
    can_energy = periodic and params.h.is_linear and params.h.coeffs == (0.0, 1.0)
    rows = []
    for t, u in zip(kym.times, kym.u):
        e = energy(u, grid, params.kernel, params.D, params.alpha)[0] if can_energy and u.min() >= 0 else float("nan")
        rows.append((t, grid.mass(u), count_peaks(u, periodic=periodic), e))
    return rows


def cmd_simulate(cfg: RunConfig, out: Path, svg: bool, jobs: int):
    params = cfg.sim_params()
    kym = integrate(_initial(cfg), params, cfg.sim.t_end, outputs=cfg.sim.outputs)
    io.write_profile(out / "profile.csv", kym.x, kym.final)
    io.write_kymograph(out / "kymograph.csv", kym.times, kym.u)
    io.write_csv(out / "trace.csv", ("t", "mass", "peaks", "energy"), _trace_rows(kym, cfg, params))
    if svg:
        io.heatmap(out / "kymograph.svg", kym.times, kym.x, kym.u, title=f"alpha = {params.alpha:g}")
        io.line_plot(out / "profile.svg", [(kym.x, kym.final, f"t = {kym.times[-1]:g}")])
    return EXIT_OK


def cmd_steady(cfg: RunConfig, out: Path, svg: bool, jobs: int):
    params = cfg.sim_params()
    u, t = run_to_steady(_initial(cfg), params, ss_tol=cfg.steady.tol, t_max=cfg.steady.t_max)
    if cfg.steady.method == "newton":
        u = newton_steady(u, params, tol=cfg.steady.newton_tol).u
    res = steady_residual(u, params)
    grid = params.grid
    io.write_profile(out / "profile.csv", grid.x, u)
    report = steady_state_checks(u, grid, params.kernel, params.alpha, params.mode, params.h, params.D,
                                 tol=1e-6, residual=res)
    rows = [(c.name, "PASS" if c.passed else "FAIL", c.value, c.tolerance) for c in report.checks]
    rows.append(("residual", "PASS" if res < cfg.steady.tol * 10 else "FAIL", res, cfg.steady.tol * 10))
    rows.append(("settling_time", "PASS", t, float("nan")))
    io.write_csv(out / "diagnostics.csv", ("check_name", "status", "value", "tolerance"), rows)
    if svg:
        io.line_plot(out / "profile.svg", [(grid.x, u, f"alpha = {params.alpha:g}")])
    return EXIT_OK


def cmd_bifurcate(cfg: RunConfig, out: Path, svg: bool, jobs: int):
    spec = cfg.build_kernel()
    rows = bifurcation_table(spec, cfg.grid.L, cfg.bif.n_max, cfg.ic.mean, cfg.build_adhesion())
    io.write_csv(out / "bifpoints.csv", ("n", "Mn", "alpha_n", "delta_Mn", "alpha_3n", "b_2n1", "criticality"),
                 [(r.n, r.Mn, r.alpha_n, r.delta_Mn, r.alpha_3n, r.b_2n1, r.criticality) for r in rows])
    if svg and rows:
        io.line_plot(out / "bifpoints.svg", [([r.n for r in rows], [r.alpha_n for r in rows], "alpha_n")],
                     xlabel="n", ylabel="alpha_n")
    return EXIT_OK


def cmd_branch(cfg: RunConfig, out: Path, svg: bool, jobs: int):
    b = cfg.branch
    params = cfg.sim_params(alpha=b.alpha_end)
    points = continue_branch(params, b.n, b.alpha_end, d_alpha=b.d_alpha, ubar=cfg.ic.mean, s0=b.s0)
    io.write_csv(out / "branch.csv", ("alpha", "l2_amplitude", "u_max", "u_min", "peaks"),
                 [(p.alpha, p.l2_amplitude, p.u_max, p.u_min, p.peaks) for p in points])
    if points:
        io.write_profile(out / "profile.csv", params.grid.x, points[-1].u)
    if svg and points:
        io.line_plot(out / "branch.svg", [([p.alpha for p in points], [p.u_max for p in points], "max u")],
                     xlabel="alpha", ylabel="max u")
    return EXIT_OK


def cmd_asymptotic(cfg: RunConfig, out: Path, svg: bool, jobs: int):
    grid = cfg.build_grid()
    prof = noflux_expansion(cfg.build_kernel(), grid.L, cfg.ic.mean, cfg.sim.alpha, grid)
    io.write_profile(out / "profile.csv", prof.x, prof.u)
    if svg:
        io.line_plot(out / "profile.svg", [(prof.x, prof.u, f"alpha = {cfg.sim.alpha:g}")])
    return EXIT_OK


def cmd_kernel_info(cfg: RunConfig, out: Path, svg: bool, jobs: int):
    spec = _ready(cfg.build_kernel())
    r = np.linspace(0.0, spec.R, 201)
    io.write_csv(out / "kernel.csv", ("r", "omega", "cumulative"), zip(r, spec.omega(r), spec.cumulative(r)))
    L = cfg.grid.L
    io.write_csv(out / "moments.csv", ("n", "Mn", "delta_Mn"),
                 [(n, moment(spec, n, L), delta_moment(spec, n, L)) for n in range(1, cfg.bif.n_max + 1)])
    summary = [("family", spec.family), ("R", spec.R), ("scale", spec.scale), ("omega_0", spec.omega0),
               ("sup_omega", spec.sup()), ("first_moment_coefficient", first_moment_coefficient(spec))]
    io.write_csv(out / "kernel_info.csv", ("quantity", "value"), summary)
    for name, value in summary:
        print(f"{name},{io.fmt(value)}")
    if svg:
        io.line_plot(out / "kernel.svg", [(r, spec.omega(r), spec.family)], xlabel="r", ylabel="omega")
    return EXIT_OK


def cmd_verify(cfg: RunConfig | None, out: Path, svg: bool, jobs: int):
    results = run_all(jobs)
    print("check_name,status,value,tolerance")
    for res in results:
        print(f"c{res.number}_{res.name},{res.status},{io.fmt(res.value)},{io.fmt(res.tolerance)}")
    for res in results:
        print(res.line(), file=sys.stderr)
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


COMMANDS = {
    "simulate": cmd_simulate,
    "steady": cmd_steady,
    "bifurcate": cmd_bifurcate,
    "branch": cmd_branch,
    "asymptotic": cmd_asymptotic,
    "kernel-info": cmd_kernel_info,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="adhesim", description="Nonlocal adhesion model toolkit")
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", type=Path, help="key = value configuration file (optional for verify)")
    parser.add_argument("--out", type=Path, default=Path("out"), help="output directory (default ./out)")
    parser.add_argument("--seed", type=int, default=None, help="random seed (default: ic.seed, which defaults to 0)")
    parser.add_argument("--svg", action="store_true", help="also write SVG figures")
    parser.add_argument("--jobs", type=int, default=1, help="parallel workers for independent runs")
    return parser


def dispatch(subcommand: str, cfg: RunConfig | None, out: Path, svg: bool = False, jobs: int = 1) -> int:
    out.mkdir(parents=True, exist_ok=True)
    if cfg is not None:
        (out / "resolved_config.txt").write_text("\n".join(cfg.resolved_lines()) + "\n")
    return COMMANDS[subcommand](cfg, out, svg, jobs)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config is None:
            if args.subcommand != "verify":
                raise ConfigError("--config is required for this subcommand")
            cfg = None
        else:
            cfg = parse_config(args.config)
            if args.seed is not None:
                cfg = cfg.with_seed(args.seed)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"adhesim: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return dispatch(args.subcommand, cfg, args.out, args.svg, args.jobs)
    except ConfigError as exc:
        print(f"adhesim: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (AdhesimError, ValueError, np.linalg.LinAlgError, RuntimeError) as exc:
        print(f"adhesim: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
