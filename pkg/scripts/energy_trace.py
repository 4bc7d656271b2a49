"""Entropy-form and quadratic-form energies along a periodic trajectory."""

import argparse
from pathlib import Path

import numpy as np

from adhesim import io
from adhesim.diagnostics import energy
from adhesim.grid import Grid
from adhesim.kernel import Uniform
from adhesim.solver import SimParams, initial_condition, integrate


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path("out/energy"))
    parser.add_argument("--alpha", type=float, default=3.25)
    parser.add_argument("--t-end", type=float, default=40.0)
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    grid = Grid(5.0, 256)
    u0 = initial_condition(grid, "constant+noise", 1.0, 1e-2, seed=1)
    kym = integrate(u0, SimParams(grid, alpha=args.alpha), args.t_end, outputs=400)
    E = np.array([energy(u, grid, Uniform(), 1.0, args.alpha) for u in kym.u])
    io.write_csv(args.out / "energy.csv", ("t", "entropy_form", "quadratic_form"), zip(kym.times, *E.T))
    io.line_plot(args.out / "energy.svg", [(kym.times, E[:, 0], "entropy form"), (kym.times, E[:, 1], "quadratic form")],
                 xlabel="t", ylabel="energy")
    rates = np.diff(E, axis=0) / np.diff(kym.times)[:, None]
    print(f"largest rise rate: entropy form {rates[:, 0].max():.3e}, quadratic form {rates[:, 1].max():.3e}")


if __name__ == "__main__":
    main()
