import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from adhesim.errors import NonNormalizable
from adhesim.kernel import (Exponential, Peak, Tabulated, TwoPoint, Uniform, adhesion_potential, delta_moment,
                            first_moment_coefficient, is_degenerate, moment, moment_table, normalize,
                            offset_weights, raw_moment)

from oracles import normalised, sine_moment, uniform_moment

FAMILIES = [
    Uniform(),
    Exponential(xi=0.25),
    Peak(xi=0.25),
    TwoPoint(a1=8 / 18, a2=1 / 18, r1=0.05, r2=0.8, sigma=0.02),
    Tabulated(samples=((0.0, 1.0), (0.5, 2.0), (1.0, 0.0))),
]
RAW_PROFILES = [
    lambda r: 1.0,
    lambda r: math.exp(-r / 0.25),
    lambda r: (r / 0.25) * math.exp(-0.5 * (r / 0.25) ** 2),
    None,
    lambda r: float(np.interp(r, [0.0, 0.5, 1.0], [1.0, 2.0, 0.0])),
]


@pytest.mark.parametrize("spec", FAMILIES, ids=lambda s: s.family)
def test_normalised_kernel_has_half_mass(spec):
    spec = normalize(spec)
    val, _ = quad(lambda r: float(spec.omega(r)), 0.0, spec.R, points=[0.05, 0.5, 0.8], limit=400)
    assert val == pytest.approx(0.5, abs=1e-9)
    assert spec.cumulative(spec.R) == pytest.approx(0.5, abs=1e-9)


@pytest.mark.parametrize("spec,profile", [(s, p) for s, p in zip(FAMILIES, RAW_PROFILES) if p is not None],
                         ids=lambda v: getattr(v, "family", ""))
def test_moments_match_quadrature_of_raw_profile(spec, profile):
    omega = normalised(profile)
    for L in (3.0, 5.0, 10.0):
        for n in (1, 2, 3, 7):
            assert moment(spec, n, L) == pytest.approx(sine_moment(omega, n, L), abs=1e-10)


def test_uniform_moment_closed_form():
    for L in (2.5, 5.0, 10.0):
        for n in range(1, 20):
            assert moment(Uniform(), n, L) == pytest.approx(uniform_moment(n, L), abs=1e-14)


def test_exponential_scale_closed_form():
    xi = 0.25
    expected = 1.0 / (2.0 * xi * (1.0 - math.exp(-1.0 / xi)))
    assert normalize(Exponential(xi=xi)).scale == pytest.approx(expected, rel=1e-12)


def test_moment_values_for_the_reference_domain():
    # M_1 and 2 M_1 - M_2 for the uniform kernel on L = 5, from the hand formula
    assert moment(Uniform(), 1, 5.0) == pytest.approx(0.27493340234, abs=1e-10)
    assert delta_moment(Uniform(), 1, 5.0) == pytest.approx(0.18997430870, abs=1e-10)


def test_degenerate_mode_detected():
    # sin(pi n r) integrates to zero on [0, 1] for even n when L = 2
    assert is_degenerate(Uniform(), 2, 2.0)
    assert not is_degenerate(Uniform(), 1, 2.0)


def test_moment_table_rows():
    table = moment_table(Uniform(), 5.0, 4)
    assert table.shape == (4, 3)
    assert np.allclose(table[:, 0], [1, 2, 3, 4])
    assert np.allclose(table[:, 2], 2 * table[:, 1] - [moment(Uniform(), 2 * n, 5.0) for n in range(1, 5)])


def test_even_raw_moments_vanish_and_first_moment():
    assert raw_moment(Uniform(), 2) == 0.0
    # integral_{-1}^{1} r Omega(r) dr = 2 * integral_0^1 r / 2 dr = 1/2
    assert raw_moment(Uniform(), 1) == pytest.approx(0.5, abs=1e-12)
    assert first_moment_coefficient(Uniform()) == pytest.approx(0.25, abs=1e-12)


def test_zero_profile_cannot_be_normalised():
    with pytest.raises(NonNormalizable):
        normalize(Tabulated(samples=((0.0, 0.0), (1.0, 0.0))))


@pytest.mark.parametrize("bad", [dict(R=0.0), dict(R=-1.0)])
def test_invalid_radius_rejected(bad):
    with pytest.raises(ValueError):
        Uniform(**bad)


def test_invalid_tabulated_samples_rejected():
    with pytest.raises(ValueError):
        Tabulated(samples=((0.1, 1.0), (1.0, 1.0)))
    with pytest.raises(ValueError):
        Tabulated(samples=((0.0, 1.0), (0.5, 1.0)))


def test_potential_vanishes_outside_support():
    r = np.array([0.0, 0.5, 1.0, 1.5])
    assert np.allclose(adhesion_potential(Uniform(), r), [0.5, 0.25, 0.0, 0.0])


@settings(max_examples=40, deadline=None)
@given(xi=st.floats(0.05, 2.0), s=st.lists(st.floats(0.0, 1.0), min_size=2, max_size=20))
def test_cumulative_is_monotone_and_saturates(xi, s):
    spec = normalize(Exponential(xi=xi))
    s = np.sort(np.asarray(s))
    c = spec.cumulative(s)
    assert np.all(np.diff(c) >= -1e-15)
    assert spec.cumulative(2.0) == pytest.approx(0.5, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(N=st.sampled_from([16, 32, 64, 100, 128, 256]), xi=st.floats(0.05, 2.0))
def test_offset_weights_partition_the_half_mass(N, xi):
    spec = normalize(Exponential(xi=xi))
    w = offset_weights(spec, 1.0 / N)
    # together with the half cell around r = 0 the weights cover [0, R]
    assert w.sum() + spec.cumulative(0.5 / N) == pytest.approx(0.5, abs=1e-12)
    assert np.all(w >= 0)
