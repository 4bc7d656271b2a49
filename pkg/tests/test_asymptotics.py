import math

import numpy as np
import pytest

from adhesim.asymptotics import (breakpoints, first_order_correction, noflux_expansion, plateau_value,
                                 wall_value)
from adhesim.errors import AsymptoticRangeWarning
from adhesim.grid import Grid
from adhesim.kernel import Exponential, Uniform
from adhesim.sensing import NoFlux
from adhesim.solver import SimParams, run_to_steady


def hand_u1(x, L):
    """First-order correction for the uniform kernel (R = 1, ubar = 1), integrated by hand.

    The reflected window gives the force ``x`` on ``[0, 1/2]``, ``1 - x`` on
    ``[1/2, 1]`` and zero further in; ``u1`` is its antiderivative shifted to
    zero mean over ``[0, L]``.
    """
    def rise(s):
        if s <= 0.5:
            return s * s / 2
        if s <= 1.0:
            return 0.125 + (s - 0.5) - (s * s - 0.25) / 2
        return 0.25

    # integral of rise over [0, 1]: 1/48 + (7/48) for the two pieces
    near = 1 / 48 + (0.125 * 0.5 + 0.125 - (7 / 24 - 0.125) / 2)
    total = 2 * near + (L - 2) * 0.25
    offset = -total / L
    x = np.minimum(x, L - x)
    return np.array([offset + rise(s) for s in np.atleast_1d(x)])


def test_hand_oracle_integral():
    # the second piece integrates 1/8 + (s - 1/2) - (s^2 - 1/4)/2 over [1/2, 1]
    s = np.linspace(0.5, 1.0, 200_001)
    piece = 0.125 + (s - 0.5) - (s * s - 0.25) / 2
    assert np.trapezoid(piece, s) == pytest.approx(0.125 * 0.5 + 0.125 - (7 / 24 - 0.125) / 2, abs=1e-10)


@pytest.mark.parametrize("L", [2.5, 5.0, 8.0])
def test_first_order_correction_matches_hand_integration(L):
    x = np.linspace(0.0, L / 2, 41)
    assert np.allclose(first_order_correction(Uniform(), L, x), hand_u1(x, L), atol=1e-10)


def test_closed_form_plateau_and_wall_values():
    assert plateau_value(Uniform(), 5.0) == pytest.approx(0.05, abs=1e-12)
    assert wall_value(Uniform(), 5.0) == pytest.approx(-0.2, abs=1e-12)
    u1 = first_order_correction(Uniform(), 5.0, np.array([0.0, 2.5]))
    assert u1[0] == pytest.approx(-0.2, abs=1e-8)
    assert u1[1] == pytest.approx(0.05, abs=1e-8)


@pytest.mark.parametrize("spec", [Uniform(), Exponential(xi=0.3)], ids=["uniform", "exponential"])
def test_expansion_has_zero_mean_and_mirror_symmetry(spec):
    grid = Grid(5.0, 128)
    prof = noflux_expansion(spec, 5.0, 1.0, 0.1, grid)
    assert np.mean(prof.u1) == pytest.approx(0.0, abs=1e-4)
    assert np.allclose(prof.u1, prof.u1[::-1], atol=1e-13)
    assert np.mean(prof.u) == pytest.approx(1.0, abs=1e-5)
    assert prof.u1[grid.M // 2] == pytest.approx(prof.plateau, abs=1e-10)


def test_mean_density_enters_quadratically():
    x = np.array([0.0, 0.7, 2.5])
    assert np.allclose(first_order_correction(Uniform(), 5.0, x, ubar=2.0),
                       4 * first_order_correction(Uniform(), 5.0, x), atol=1e-12)


def test_expansion_tracks_small_adhesion_steady_state():
    L = 5.0
    grid = Grid(L, 128)
    errs = []
    for alpha in (0.02, 0.04):
        u, _ = run_to_steady(np.ones(grid.M), SimParams(grid, mode=NoFlux(), alpha=alpha), ss_tol=1e-10)
        errs.append(np.max(np.abs(u - noflux_expansion(Uniform(), L, 1.0, alpha, grid).u)))
    assert errs[0] < 2e-3
    assert math.log2(errs[1] / errs[0]) > 1.8


def test_large_adhesion_warns():
    with pytest.warns(AsymptoticRangeWarning):
        noflux_expansion(Uniform(), 5.0, 1.0, 1.0, N=32)


def test_invalid_domain_rejected():
    with pytest.raises(ValueError):
        first_order_correction(Uniform(), 2.0, [0.5])
    with pytest.raises(ValueError):
        noflux_expansion(Uniform(), 5.0, 1.0, 0.01, Grid(6.0, 8))


def test_breakpoints():
    assert breakpoints(Uniform(), 5.0) == (0.5, 1.0, 4.0, 4.5)
