"""Trace the first bifurcating branch by pseudo-arclength continuation and record its shape."""

import argparse
from pathlib import Path

from adhesim import io
from adhesim.bifurcation import alpha_3n, continue_branch, discrete_alpha_n
from adhesim.grid import Grid
from adhesim.kernel import Uniform
from adhesim.solver import SimParams


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path("out/branch"))
    parser.add_argument("--lengths", type=float, nargs="+", default=[3.0, 5.0])
    parser.add_argument("--N", type=int, default=128)
    parser.add_argument("--alpha-end", type=float, default=4.0)
    parser.add_argument("--d-alpha", type=float, default=0.05)
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    series = []
    for L in args.lengths:
        grid = Grid(L, args.N)
        points = continue_branch(SimParams(grid, alpha=args.alpha_end), 1, args.alpha_end, d_alpha=args.d_alpha)
        io.write_csv(args.out / f"branch_L{L:g}.csv", ("alpha", "l2_amplitude", "u_max", "u_min", "peaks"),
                     [(p.alpha, p.l2_amplitude, p.u_max, p.u_min, p.peaks) for p in points])
        a1 = discrete_alpha_n(grid, Uniform(), 1)
        fold = min(p.alpha for p in points)
        kind = "supercritical" if alpha_3n(Uniform(), 1, L) > 0 else "subcritical"
        print(f"L={L:g}: alpha_1={a1:.6f} ({kind}), smallest alpha on branch {fold:.6f}, "
              f"{len(points)} points, final max u {points[-1].u_max:.4f}")
        series.append(([p.alpha for p in points], [p.l2_amplitude for p in points], f"L = {L:g}"))
    io.line_plot(args.out / "branches.svg", series, xlabel="alpha", ylabel="L2 amplitude")


if __name__ == "__main__":
    main()
