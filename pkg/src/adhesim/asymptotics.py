"""First-order small-adhesion steady state under no-flux sensing.

At leading order the density is the constant ``ubar``.  The first correction
``u1`` carries no flux, so ``u1' = ubar K[ubar] = ubar^2 * integral of Omega
over the sensing window``.  It is flat (``u1 = A``) more than one sensing
radius from the walls and dips towards them.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .bifurcation import alpha_n
from .errors import AsymptoticRangeWarning, UnsupportedKernel
from .grid import Grid
from .kernel import Kernel, Uniform, _ready
from .sensing import NoFlux, sensing_limits


@dataclass(frozen=True)
class AsymptoticProfile:
    ubar: float
    alpha: float
    x: np.ndarray
    u1: np.ndarray
    plateau: float
    wall_value: float

    @property
    def u(self) -> np.ndarray:
        return self.ubar + self.alpha * self.u1


def first_moment(spec: Kernel) -> float:
    """``integral_0^R r omega(r) dr``."""
    spec = _ready(spec)
    if isinstance(spec, Uniform):
        return float(spec.scale) * spec.R**2 / 2.0
    val, _ = quad(lambda r: r * float(spec.omega(r)), 0.0, spec.R, limit=200, epsabs=1e-14, epsrel=1e-13)
    return val


def plateau_value(spec: Kernel, L: float, ubar: float = 1.0) -> float:
    """``A = ubar^2 / L * integral_0^R r omega``."""
    return ubar**2 / L * first_moment(spec)


def wall_value(spec: Kernel, L: float, ubar: float = 1.0) -> float:
    """``u1(0) = u1(L) = ubar^2 (R - L) / L * integral_0^R r omega`` (``R = 1`` units)."""
    spec = _ready(spec)
    return ubar**2 * (spec.R - L) / L * first_moment(spec)


def _window_force(s, spec: Kernel, L: float) -> float:
    f1, f2 = sensing_limits(np.array([s]), NoFlux(), spec.R, L)
    return float(spec.signed_integral(f1[0], f2[0]))


def _rise(x, spec: Kernel, L: float) -> float:
    """``integral_0^x`` of the window force, split at the kinks of the window."""
    R = spec.R
    knots = [k for k in (0.5 * R, R, L - R, L - 0.5 * R) if 0.0 < k < x]
    edges = [0.0, *knots, x]
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        if a < R or b > L - R:
            val, _ = quad(_window_force, a, b, args=(spec, L), limit=200, epsabs=1e-14, epsrel=1e-13)
            total += val
    return total


def _wall_offset(spec: Kernel, L: float) -> float:
    """Constant making the mean of ``u1`` vanish (per unit ``ubar^2``)."""
    R = spec.R
    near, _ = quad(_rise, 0.0, 0.5 * R, args=(spec, L), limit=200, epsabs=1e-14, epsrel=1e-13)
    far, _ = quad(_rise, 0.5 * R, R, args=(spec, L), limit=200, epsabs=1e-14, epsrel=1e-13)
    return -(2.0 * (near + far) + (L - 2.0 * R) * _rise(R, spec, L)) / L


def first_order_correction(spec: Kernel, L: float, x, ubar: float = 1.0) -> np.ndarray:
    """``u1`` at points ``x`` of the left half ``[0, L/2]``, normalised to zero mean over ``[0, L]``."""
    spec = _ready(spec)
    if not np.isfinite(spec.omega0):
        raise UnsupportedKernel("kernel is not integrable near the origin")
    if L <= 2 * spec.R:
        raise ValueError("domain must be longer than one sensing diameter")
    x = np.asarray(x, dtype=float)
    base = _wall_offset(spec, L)
    return ubar**2 * np.array([base + _rise(xi, spec, L) for xi in np.ravel(x)]).reshape(x.shape)


def noflux_expansion(spec: Kernel, L: float, ubar: float, alpha: float, grid: Grid | None = None,
                     N: int = 256) -> AsymptoticProfile:
    """``ubar + alpha u1`` at the cell centres of ``grid`` (default ``Grid(L, N)``)."""
    spec = _ready(spec)
    grid = Grid(L, N) if grid is None else grid
    if grid.L != L:
        raise ValueError("grid length differs from L")
    alpha_1 = alpha_n(spec, 1, L, ubar)
    if abs(alpha) > 0.25 * abs(alpha_1):
        warnings.warn(f"alpha={alpha:g} exceeds a quarter of the first bifurcation value "
                      f"{alpha_1:.4g}; the expansion may be inaccurate", AsymptoticRangeWarning, stacklevel=2)
    x = grid.x
    # u1 is symmetric about L/2: evaluate the left half and mirror
    half = x <= L / 2
    left = first_order_correction(spec, L, x[half], ubar)
    u1 = np.empty_like(x)
    u1[half] = left
    u1[~half] = first_order_correction(spec, L, L - x[~half], ubar)
    return AsymptoticProfile(ubar, alpha, x.copy(), u1, plateau_value(spec, L, ubar), wall_value(spec, L, ubar))


def breakpoints(spec: Kernel, L: float) -> tuple[float, ...]:
    """Positions where ``u1`` changes formula."""
    R = _ready(spec).R
    return (0.5 * R, R, L - R, L - 0.5 * R)


__all__ = [
    "AsymptoticProfile",
    "breakpoints",
    "first_moment",
    "first_order_correction",
    "noflux_expansion",
    "plateau_value",
    "wall_value",
]
