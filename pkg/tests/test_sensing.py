import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from adhesim.errors import GridMismatch, KernelBoundaryWarning, OutOfDomain
from adhesim.grid import Grid
from adhesim.kernel import Exponential, Uniform, moment, normalize
from adhesim.sensing import (Adhesion, Naive, Neutral, NoFlux, Periodic, WeightedBoundary, apply_K, apply_K_prime,
                             build_operator, evaluate_K, sensing_limits, wall_betas)


def window_oracle(x, L, R, mode):
    """Sensing window written out case by case."""
    if mode == "naive":
        return max(-R, -x), min(R, L - x)
    lo = R - 2 * x if x < R else -R
    hi = 2 * L - R - 2 * x if x > L - R else R
    return lo, hi


def brute_K(u, grid, omega, x, lo, hi, periodic, h=lambda v: v):
    """``integral_lo^hi h(u(x + r)) Omega(r) dr`` for cell-wise constant ``u`` by adaptive quadrature."""

    def integrand(r):
        y = x + r
        if periodic:
            y = y % grid.L
        i = min(int(y / grid.dx), grid.M - 1)
        return h(u[i]) * math.copysign(omega(abs(r)), r) if r != 0 else 0.0

    breaks = [k * grid.dx - x for k in range(-grid.M, 2 * grid.M) if lo < k * grid.dx - x < hi]
    if lo < 0 < hi:
        breaks.append(0.0)
    val, _ = quad(integrand, lo, hi, points=sorted(breaks)[:200] or None, limit=500)
    return val


@pytest.mark.parametrize("mode_name", ["naive", "noflux"])
def test_window_limits_match_case_analysis(mode_name):
    mode = Naive() if mode_name == "naive" else NoFlux()
    L, R = 5.0, 1.0
    x = np.linspace(0.0, L, 101)
    f1, f2 = sensing_limits(x, mode, R, L)
    expected = np.array([window_oracle(xi, L, R, mode_name) for xi in x])
    assert np.allclose(f1, expected[:, 0]) and np.allclose(f2, expected[:, 1])


def test_noflux_window_is_empty_at_the_walls():
    f1, f2 = sensing_limits(np.array([0.0, 5.0]), NoFlux(), 1.0, 5.0)
    assert np.allclose(f1, f2)


@pytest.mark.parametrize("mode,periodic", [(Periodic(), True), (Naive(), False), (NoFlux(), False)],
                         ids=["periodic", "naive", "noflux"])
@pytest.mark.parametrize("spec", [Uniform(), Exponential(xi=0.3)], ids=["uniform", "exponential"])
def test_discrete_K_matches_brute_force_quadrature(mode, periodic, spec):
    grid = Grid(3.0, 16)
    u = 1.0 + 0.5 * np.random.default_rng(3).random(grid.M)
    spec_n = normalize(spec)
    omega = lambda r: float(spec_n.omega(r))  # noqa: E731
    K = apply_K(u, grid, spec, mode)
    for i in (0, 3, 10, 24, 40, grid.M - 1):
        x = grid.x[i]
        lo, hi = (-1.0, 1.0) if periodic else window_oracle(x, grid.L, 1.0, "naive" if isinstance(mode, Naive)
                                                              else "noflux")
        assert K[i] == pytest.approx(brute_K(u, grid, omega, x, lo, hi, periodic), abs=1e-10)


def test_nonlinear_adhesion_enters_inside_the_integral():
    grid = Grid(3.0, 16)
    u = 1.0 + 0.5 * np.random.default_rng(4).random(grid.M)
    h = Adhesion((0.0, 1.0, -0.3))
    K = apply_K(u, grid, Uniform(), Periodic(), h)
    for i in (0, 17, 40):
        ref = brute_K(u, grid, lambda r: 0.5, grid.x[i], -1.0, 1.0, True, h=lambda v: v - 0.3 * v * v)
        assert K[i] == pytest.approx(ref, abs=1e-12)


def test_evaluate_K_agrees_with_cell_centre_operator():
    grid = Grid(5.0, 32)
    u = 1.0 + np.sin(2 * np.pi * grid.x / 5.0)
    for mode in (Periodic(), Naive(), NoFlux(), Neutral(), WeightedBoundary(Naive(), 0.3, -0.2)):
        assert np.allclose(evaluate_K(u, grid.x, grid, Uniform(), mode), apply_K(u, grid, Uniform(), mode),
                           atol=1e-12)


@pytest.mark.parametrize("spec", [Uniform(), Exponential(xi=0.25)], ids=["uniform", "exponential"])
def test_cosine_is_mapped_to_sine(spec):
    L = 5.0
    grid = Grid(L, 256)
    for n in range(1, 6):
        q = 2 * math.pi * n / L
        K = apply_K(np.cos(q * grid.x), grid, spec)
        assert np.max(np.abs(K + 2 * moment(spec, n, L) * np.sin(q * grid.x))) < 5e-5
        Kp = apply_K_prime(np.cos(q * grid.x), grid, spec)
        assert np.max(np.abs(Kp + 2 * q * moment(spec, n, L) * np.cos(q * grid.x))) < 5e-4


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10_000), N=st.sampled_from([8, 16, 32, 50]),
       xi=st.floats(0.05, 3.0))
def test_periodic_operator_is_skew_and_mean_free(seed, N, xi):
    grid = Grid(5.0, N)
    op = build_operator(grid, normalize(Exponential(xi=xi)), Periodic())
    rng = np.random.default_rng(seed)
    u, v = rng.normal(size=grid.M), rng.normal(size=grid.M)
    Ku, Kv = op.apply_linear(u), op.apply_linear(v)
    scale = np.linalg.norm(u) * np.linalg.norm(v)
    assert abs(v @ Ku + u @ Kv) <= 1e-13 * scale
    assert abs(Ku.sum()) <= 1e-13 * np.abs(u).sum()


def test_periodic_dense_matrix_is_antisymmetric():
    A = build_operator(Grid(3.0, 8), Uniform(), Periodic()).dense()
    assert np.allclose(A, -A.T, atol=1e-15)


@settings(max_examples=30, deadline=None)
@given(c=st.floats(0.1, 10.0), base=st.sampled_from(["naive", "noflux"]))
def test_neutral_mode_leaves_uniform_state_unforced(c, base):
    grid = Grid(4.0, 16)
    mode = Neutral(base=Naive() if base == "naive" else NoFlux())
    assert np.max(np.abs(apply_K(np.full(grid.M, c), grid, Uniform(), mode))) < 1e-13 * c


def test_naive_mode_pulls_away_from_the_walls_on_a_uniform_state():
    grid = Grid(4.0, 16)
    K = apply_K(np.ones(grid.M), grid, Uniform(), Naive())
    assert K[0] > 0 > K[-1]
    assert np.allclose(K[grid.M // 2 - 8 : grid.M // 2 + 8], 0.0, atol=1e-14)


def test_wall_betas_cancel_the_force_at_both_walls():
    grid = Grid(5.0, 32)
    u = 1.0 + 0.3 * np.cos(np.pi * grid.x / 5.0)
    b0, bL = wall_betas(u, grid, Uniform())
    k0, kL = evaluate_K(u, [0.0, 5.0], grid, Uniform(), WeightedBoundary(Naive(), b0, bL))
    assert abs(k0) < 1e-13 and abs(kL) < 1e-13


def test_wall_beta_for_a_constant_state_equals_the_constant():
    grid = Grid(5.0, 32)
    b0, bL = wall_betas(np.full(grid.M, 0.7), grid, Uniform())
    assert b0 == pytest.approx(0.7, abs=1e-13) and bL == pytest.approx(0.7, abs=1e-13)


@pytest.mark.parametrize("mode", [Naive(), NoFlux()], ids=["naive", "noflux"])
def test_bounded_K_prime_matches_finite_differences(mode):
    spec = Exponential(xi=0.2)
    grid = Grid(4.0, 64)
    u = 1.0 + 0.4 * np.cos(1.3 * grid.x) + 0.1 * grid.x
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", KernelBoundaryWarning)
        Kp = apply_K_prime(u, grid, spec, mode)
    # the derivative is checked away from the kinks of the window limits
    x = np.array([0.37, 0.8, 1.9, 2.6, 3.45])
    eps = 1e-4
    fd = (evaluate_K(u, x + eps, grid, spec, mode) - evaluate_K(u, x - eps, grid, spec, mode)) / (2 * eps)
    cell = np.interp(x, grid.x, Kp)
    assert np.max(np.abs(cell - fd)) < 0.05 * np.max(np.abs(fd))


def test_kernel_with_edge_mass_warns_on_bounded_derivative():
    grid = Grid(4.0, 32)
    with pytest.warns(KernelBoundaryWarning):
        apply_K_prime(np.ones(grid.M), grid, Uniform(), Naive())


def test_points_outside_domain_rejected():
    with pytest.raises(OutOfDomain):
        sensing_limits(np.array([-0.1]), Naive(), 1.0, 5.0)


def test_domain_shorter_than_diameter_rejected():
    with pytest.raises(GridMismatch):
        apply_K(np.ones(16), Grid(2.0, 8), Uniform())


def test_wrong_field_length_rejected():
    with pytest.raises(GridMismatch):
        apply_K(np.ones(7), Grid(5.0, 8), Uniform())
