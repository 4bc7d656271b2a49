import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adhesim.bifurcation import (SteadyStateSystem, alpha_3n, alpha_n, b_2n, bif_type, bifurcation_table,
                                 continue_branch, discrete_alpha_n, growth_rate, linearized_spectrum,
                                 local_branch, newton_steady, stability)
from adhesim.diagnostics import count_peaks
from adhesim.errors import DegenerateMode, UnsupportedAdhesion
from adhesim.grid import Grid
from adhesim.kernel import Exponential, TwoPoint, Uniform
from adhesim.sensing import Adhesion
from adhesim.solver import SimParams, rhs

from oracles import branch_curvature, branch_state, normalised, uniform_moment

UNIFORM = lambda r: 0.5  # noqa: E731
EXP = normalised(lambda r: math.exp(-r / 0.25))

# Branch curvatures from the pseudo-spectral oracle in tests/oracles.py
# (Richardson extrapolation of (alpha - alpha_1) / s^2 at amplitudes 0.01, 0.02).
FROZEN_CURVATURE = {
    ("uniform", 2.0): (math.pi / 2) ** 6,
    ("uniform", 3.0): 2.08399493264,
    ("uniform", 5.0): -1.33448006920,
    ("uniform", 10.0): -9.35401297667,
    ("exponential", 5.0): -50.1681416613,
}


def test_reference_bifurcation_values():
    s5 = math.sqrt(5.0)
    exact = (16 * math.pi**2 / (25 * (5 - s5)), 64 * math.pi**2 / (25 * (5 + s5)),
             144 * math.pi**2 / (25 * (5 + s5)))
    for n, value in zip((1, 2, 3), exact):
        assert alpha_n(Uniform(), n, 5.0) == pytest.approx(value, abs=1e-10)


@settings(max_examples=50, deadline=None)
@given(L=st.floats(2.2, 20.0), n=st.integers(1, 30), ubar=st.floats(0.1, 10.0))
def test_bifurcation_value_formula(L, n, ubar):
    m = uniform_moment(n, L)
    if abs(m) < 1e-6:
        return
    assert alpha_n(Uniform(), n, L, ubar) == pytest.approx(n * math.pi / (ubar * L * m), rel=1e-9)


def test_growth_rate_changes_sign_at_the_bifurcation_value():
    a1 = alpha_n(Uniform(), 1, 5.0)
    assert growth_rate(Uniform(), 1, 5.0, a1) == pytest.approx(0.0, abs=1e-12)
    assert growth_rate(Uniform(), 1, 5.0, 0.99 * a1) < 0 < growth_rate(Uniform(), 1, 5.0, 1.01 * a1)


@pytest.mark.parametrize("key", sorted(FROZEN_CURVATURE))
def test_curvature_matches_frozen_oracle(key):
    family, L = key
    spec = Uniform() if family == "uniform" else Exponential(xi=0.25)
    assert alpha_3n(spec, 1, L) == pytest.approx(FROZEN_CURVATURE[key], rel=1e-9, abs=1e-10)


@pytest.mark.parametrize("omega,spec,L", [(UNIFORM, Uniform(), 3.0), (UNIFORM, Uniform(), 5.0),
                                          (EXP, Exponential(xi=0.25), 3.0)],
                         ids=["uniform-3", "uniform-5", "exponential-3"])
def test_curvature_matches_live_spectral_oracle(omega, spec, L):
    assert alpha_3n(spec, 1, L) == pytest.approx(branch_curvature(omega, L), rel=1e-4)


def test_second_harmonic_matches_spectral_oracle():
    L, M = 3.0, 128
    x = np.arange(M) * L / M
    est = []
    for a in (0.01, 0.02):
        alpha, a_n, u = branch_state(UNIFORM, L, a, M=M)
        est.append(2 / M * (u @ np.cos(4 * math.pi * x / L)) / (a / a_n) ** 2)
    assert b_2n(Uniform(), 1, L) == pytest.approx((4 * est[0] - est[1]) / 3, rel=1e-6)


def test_reduced_curvature_form():
    L, n = 5.0, 1
    m1, m2 = uniform_moment(n, L), uniform_moment(2 * n, L)
    reduced = (math.pi * n / L) ** 3 / (4 * m1**2 * (2 * m1 - m2))
    assert alpha_3n(Uniform(), n, L, mode_coupling=False) == pytest.approx(reduced, rel=1e-12)
    assert alpha_3n(Uniform(), n, L) == pytest.approx(reduced * (m1 - m2) / m1, rel=1e-12)


def test_two_forms_agree_when_second_harmonic_moment_vanishes():
    assert alpha_3n(Uniform(), 1, 2.0) == pytest.approx(alpha_3n(Uniform(), 1, 2.0, mode_coupling=False),
                                                        rel=1e-12)
    assert alpha_3n(Uniform(), 1, 2.0) == pytest.approx((math.pi / 2) ** 6, abs=1e-10)


@settings(max_examples=30, deadline=None)
@given(ubar=st.floats(0.2, 5.0), c=st.floats(0.2, 5.0))
def test_scaling_with_mean_density_and_adhesion_slope(ubar, c):
    h = Adhesion((0.0, c))
    base = bif_type(Uniform(), 1, 5.0)
    scaled = bif_type(Uniform(), 1, 5.0, ubar, h)
    assert scaled.alpha_n == pytest.approx(base.alpha_n / (ubar * c), rel=1e-10)
    assert scaled.alpha_3n == pytest.approx(base.alpha_3n / (ubar**5 * c**3), rel=1e-10)
    assert scaled.b_2n1 == pytest.approx(base.b_2n1 / (ubar**3 * c**2), rel=1e-10)


def test_subcritical_two_bump_kernel_example():
    spec = TwoPoint(a1=8 / 18, a2=1 / 18, r1=0.05, r2=0.8, sigma=0.02)
    rows = bifurcation_table(spec, 3.0, 50)
    assert any(r.Mn > 0 and r.alpha_3n < 0 for r in rows)


def test_degenerate_mode_and_nonlinear_adhesion_rejected():
    with pytest.raises(DegenerateMode):
        alpha_n(Uniform(), 2, 2.0)
    with pytest.raises(UnsupportedAdhesion):
        bif_type(Uniform(), 1, 5.0, h=Adhesion((0.0, 1.0, 0.5)))
    assert [r.n for r in bifurcation_table(Uniform(), 2.0, 4)] == [1, 3]


def test_linearised_spectrum_and_stability():
    lam = linearized_spectrum(Uniform(), 1, 2.0, k_max=20)
    assert lam[0] == 0.0 and np.all(lam[1:] < 0)
    assert stability(Uniform(), 1, 2.0).stable
    st5 = stability(Uniform(), 1, 5.0)
    assert not st5.stable and st5.kind == "saddle"


def test_discrete_bifurcation_value_converges_to_continuum():
    exact = alpha_n(Uniform(), 1, 5.0)
    errs = [abs(discrete_alpha_n(Grid(5.0, N), Uniform(), 1) - exact) for N in (32, 64, 128)]
    assert errs[-1] < 1e-3
    assert math.log2(errs[0] / errs[1]) > 1.9 and math.log2(errs[1] / errs[2]) > 1.9


def test_local_branch_residual_is_third_order():
    grid = Grid(3.0, 64)
    res = []
    for s in (0.01, 0.02, 0.04):
        alpha, u = local_branch(grid, Uniform(), 1, s, discrete=True)
        res.append(np.max(np.abs(rhs(u, SimParams(grid, alpha=alpha)))))
    slopes = np.diff(np.log(res)) / math.log(2.0)
    assert np.all(slopes > 2.7)


def test_newton_from_local_branch_on_supercritical_domain():
    grid = Grid(3.0, 64)
    alpha, u0 = local_branch(grid, Uniform(), 1, 0.1, discrete=True)
    params = SimParams(grid, alpha=alpha)
    result = newton_steady(u0, params, tol=1e-11)
    assert result.residual < 1e-11
    assert np.mean(result.u) == pytest.approx(1.0, abs=1e-13)
    assert np.max(np.abs(result.u - u0)) < 0.05 * np.max(np.abs(u0 - 1.0))
    # a steady state up to a (tiny) translation speed
    assert abs(result.drift) < 1e-8


def test_system_packs_and_unpacks():
    grid = Grid(5.0, 16)
    system = SteadyStateSystem(SimParams(grid, alpha=2.0), 1.0)
    u = 1 + 0.1 * np.cos(2 * np.pi * grid.x / 5.0)
    back, drift, alpha = system.unpack(system.pack(u, 0.25))
    assert np.array_equal(back, u) and drift == 0.25 and alpha == 2.0


def test_continuation_passes_the_fold_of_a_subcritical_branch():
    grid = Grid(5.0, 32)
    points = continue_branch(SimParams(grid, alpha=3.0), 1, 3.0, d_alpha=0.1)
    alphas = np.array([p.alpha for p in points])
    a1 = discrete_alpha_n(grid, Uniform(), 1)
    assert alphas[-1] == pytest.approx(3.0, abs=1e-12)
    # the branch first bends back below the bifurcation value
    assert alphas.min() < a1 - 0.02
    assert points[-1].peaks == 1
    amps = [p.l2_amplitude for p in points]
    assert np.all(np.diff(amps) > 0)
    final = points[-1].u
    assert np.mean(final) == pytest.approx(1.0, abs=1e-12)
    assert count_peaks(final) == 1
