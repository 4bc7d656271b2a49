"""Nonlocal adhesion operator ``K[u]`` under the different sensing-domain rules.

On a bounded domain a cell at ``x`` only samples the part of its sensing
radius that fits inside ``[0, L]``; the rules differ in how that window is
chosen near the walls.  Fields are cell averages and are treated as piecewise
constant when integrated against the kernel, which keeps the scheme second
order and makes the periodic operator exactly skew-adjoint.
"""

from __future__ import annotations

import functools
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import correlate

from .errors import GridMismatch, KernelBoundaryWarning, OutOfDomain
from .grid import Grid
from .kernel import Kernel, _ready, offset_weights


# -- adhesion function -----------------------------------------------------------
@dataclass(frozen=True)
class Adhesion:
    """Polynomial adhesion strength ``h(u) = sum_k coeffs[k] u^k``."""

    coeffs: tuple = (0.0, 1.0)

    def __post_init__(self):
        c = tuple(float(v) for v in self.coeffs)
        while len(c) > 1 and c[-1] == 0.0:
            c = c[:-1]
        object.__setattr__(self, "coeffs", c or (0.0,))

    def __call__(self, u):
        return np.polynomial.polynomial.polyval(np.asarray(u, dtype=float), self.coeffs)

    def derivative(self, u):
        d = np.polynomial.polynomial.polyder(self.coeffs)
        return np.polynomial.polynomial.polyval(np.asarray(u, dtype=float), d)

    @property
    def is_linear(self) -> bool:
        return len(self.coeffs) <= 2


LINEAR = Adhesion()


# -- sensing modes ---------------------------------------------------------------
@dataclass(frozen=True)
class Periodic:
    pass


@dataclass(frozen=True)
class Naive:
    """Window truncated at the walls."""


@dataclass(frozen=True)
class NoFlux:
    """Window reflected so that ``K`` vanishes at both walls."""


@dataclass(frozen=True)
class Neutral:
    """``K[u] - K[uref]``: walls exert no net pull on a uniform population.

    ``uref=None`` means the mean of the field being evolved.
    """

    base: Naive | NoFlux = field(default_factory=Naive)
    uref: float | None = None


@dataclass(frozen=True)
class WeightedBoundary:
    """Base window plus adhesion to the walls with strengths ``beta0`` and ``betaL``."""

    base: Naive | NoFlux = field(default_factory=Naive)
    beta0: float = 0.0
    betaL: float = 0.0


MODES = ("periodic", "naive", "noflux", "neutral", "weighted")


def _base_of(mode):
    return mode.base if isinstance(mode, (Neutral, WeightedBoundary)) else mode


def sensing_limits(x, mode, R: float, L: float):
    """Lower and upper offsets ``(f1, f2)`` of the sensing window at ``x``."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(x > L):
        raise OutOfDomain(f"x must lie in [0, {L}]")
    base = _base_of(mode)
    if isinstance(base, Periodic):
        return np.full_like(x, -R), np.full_like(x, R)
    if isinstance(base, Naive):
        f1 = np.where(x <= R, -x, -R)
        f2 = np.where(x <= L - R, R, L - x)
    elif isinstance(base, NoFlux):
        f1 = np.where(x < R, R - 2 * x, -R)
        f2 = np.where(x <= L - R, R, 2 * L - R - 2 * x)
    else:
        raise TypeError(f"unknown sensing mode {mode!r}")
    return f1, f2


def sensing_slopes(x, mode, R: float, L: float):
    """Derivatives ``(f1', f2')`` of the window limits."""
    x = np.asarray(x, dtype=float)
    base = _base_of(mode)
    zero = np.zeros_like(x)
    if isinstance(base, Periodic):
        return zero, zero
    steep = -1.0 if isinstance(base, Naive) else -2.0
    return np.where(x < R, steep, 0.0), np.where(x > L - R, steep, 0.0)


def _wall_profile(x, spec: Kernel, L: float, beta0: float, betaL: float):
    left = np.where(x <= spec.R, spec.cumulative(np.minimum(x, spec.R)) - 0.5, 0.0)
    right = np.where(L - x <= spec.R, 0.5 - spec.cumulative(np.minimum(L - x, spec.R)), 0.0)
    return beta0 * left + betaL * right


# -- discrete operator ------------------------------------------------------------
@dataclass(eq=False)
class DiscreteOperator:
    """Cell-centre discretisation of ``K``.

    Interior rows share the antisymmetric stencil ``weights`` (offsets 1..m).
    On bounded domains the first and last ``m`` rows are stored explicitly in
    ``band_lo`` / ``band_hi`` (columns are offsets ``-m..m``).  ``offset`` is
    added after the weighted sum (neutral and wall-adhesion modes).
    """

    grid: Grid
    kernel: Kernel
    mode: object
    h: Adhesion
    weights: np.ndarray
    band_lo: np.ndarray
    band_hi: np.ndarray
    offset: np.ndarray
    periodic: bool

    @property
    def m(self) -> int:
        return len(self.weights)

    @property
    def uniform(self) -> bool:
        """True when all but the last stencil weight coincide (prefix-sum fast path)."""
        w = self.weights
        return len(w) > 2 and np.allclose(w[:-1], w[0], rtol=1e-13, atol=0.0)

    @property
    def stencil(self) -> np.ndarray:
        return np.concatenate((-self.weights[::-1], [0.0], self.weights))

    def apply_linear(self, v) -> np.ndarray:
        """Weighted sum of ``v`` without ``h`` and without the additive offset."""
        v = np.asarray(v, dtype=float)
        m, M = self.m, len(v)
        if self.periodic:
            padded = np.concatenate((v[-m:], v, v[:m]))
            return correlate(padded, self.stencil, mode="valid")
        out = np.empty(M)
        out[m : M - m] = correlate(v, self.stencil, mode="valid")
        for rows, band in ((range(m), self.band_lo), (range(M - m, M), self.band_hi)):
            for r, i in enumerate(rows):
                lo, hi = max(0, i - m), min(M, i + m + 1)
                out[i] = band[r, lo - (i - m) : hi - (i - m)] @ v[lo:hi]
        return out

    def __call__(self, u) -> np.ndarray:
        u = self.grid.check(u)
        return self.apply_linear(self.h(u)) + self.offset

    def dense(self) -> np.ndarray:
        """Matrix of the linear part (for tests and small grids)."""
        return np.column_stack([self.apply_linear(e) for e in np.eye(self.grid.M)])


def point_weights(x: float, grid: Grid, spec: Kernel, f1: float, f2: float):
    """Cell weights of ``integral_{f1}^{f2} h(u(x+r)) Omega(r) dr`` for piecewise-constant ``u``.

    Returns ``(first_cell, weights)``; cell indices are not wrapped.
    """
    lo = max(f1, -spec.R)
    hi = min(f2, spec.R)
    dx = grid.dx
    first = int(np.floor((x + lo) / dx))
    last = int(np.ceil((x + hi) / dx)) - 1
    cells = np.arange(first, last + 1)
    a = np.maximum(cells * dx - x, lo)
    b = np.minimum((cells + 1) * dx - x, hi)
    b = np.maximum(a, b)
    return first, spec.cumulative(b) - spec.cumulative(a)


def _bounded_rows(rows, grid: Grid, spec: Kernel, mode, m: int) -> np.ndarray:
    band = np.zeros((len(rows), 2 * m + 1))
    x = grid.x[list(rows)]
    f1, f2 = sensing_limits(x, mode, spec.R, grid.L)
    for r, i in enumerate(rows):
        first, w = point_weights(x[r], grid, spec, f1[r], f2[r])
        cells = np.arange(first, first + len(w))
        keep = (cells >= 0) & (cells < grid.M) & (np.abs(cells - i) <= m)
        band[r, cells[keep] - i + m] = w[keep]
    return band


@functools.lru_cache(maxsize=64)
def build_operator(grid: Grid, spec: Kernel, mode=Periodic(), h: Adhesion = LINEAR, uref=None):
    """Assemble the discrete operator; ``uref`` resolves a neutral mode without a reference."""
    spec = _ready(spec)
    if not grid.L > 2 * spec.R:
        raise GridMismatch(f"need L > 2R, got L={grid.L}, R={spec.R}")
    w = offset_weights(spec, grid.dx)
    m = len(w)
    M = grid.M
    periodic = isinstance(mode, Periodic)
    if periodic:
        empty = np.zeros((0, 2 * m + 1))
        return DiscreteOperator(grid, spec, mode, h, w, empty, empty, np.zeros(M), True)
    band_lo = _bounded_rows(range(m), grid, spec, mode, m)
    band_hi = _bounded_rows(range(M - m, M), grid, spec, mode, m)
    op = DiscreteOperator(grid, spec, mode, h, w, band_lo, band_hi, np.zeros(M), False)
    if isinstance(mode, Neutral):
        ref = mode.uref if mode.uref is not None else uref
        if ref is None:
            raise ValueError("neutral sensing needs a reference density")
        op.offset = -op.apply_linear(np.full(M, float(h(ref))))
    elif isinstance(mode, WeightedBoundary):
        op.offset = _wall_profile(grid.x, spec, grid.L, mode.beta0, mode.betaL)
    return op


def apply_K(u, grid: Grid, spec: Kernel, mode=Periodic(), h: Adhesion = LINEAR) -> np.ndarray:
    """``K[u]`` at the cell centres."""
    u = grid.check(u)
    op = build_operator(grid, spec, mode, h, _neutral_ref(mode, u))
    return op(u)


def _neutral_ref(mode, u):
    if isinstance(mode, Neutral) and mode.uref is None:
        return float(np.mean(u))
    return None


def _sample(values, points, grid: Grid, periodic: bool):
    """Linear interpolation of cell-centre ``values`` at arbitrary ``points``."""
    if periodic:
        xp = np.concatenate(([grid.x[-1] - grid.L], grid.x, [grid.x[0] + grid.L]))
        fp = np.concatenate(([values[-1]], values, [values[0]]))
        return np.interp(np.mod(points, grid.L), xp, fp)
    return np.interp(points, grid.x, values)


def evaluate_K(u, x, grid: Grid, spec: Kernel, mode=Periodic(), h: Adhesion = LINEAR):
    """``K[u]`` at arbitrary points ``x`` in ``[0, L]`` (u piecewise constant on cells)."""
    u = grid.check(u)
    spec = _ready(spec)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    f1, f2 = sensing_limits(x, mode, spec.R, grid.L)
    hu = h(u)
    periodic = isinstance(mode, Periodic)
    out = np.empty_like(x)
    for k, (xk, a, b) in enumerate(zip(x, f1, f2)):
        first, w = point_weights(xk, grid, spec, a, b)
        cells = np.arange(first, first + len(w))
        if periodic:
            cells = np.mod(cells, grid.M)
        else:
            keep = (cells >= 0) & (cells < grid.M)
            cells, w = cells[keep], w[keep]
        out[k] = w @ hu[cells]
    if isinstance(mode, Neutral):
        ref = mode.uref if mode.uref is not None else float(np.mean(u))
        out -= evaluate_K(np.full(grid.M, ref), x, grid, spec, mode.base, h)
    elif isinstance(mode, WeightedBoundary):
        out += _wall_profile(x, spec, grid.L, mode.beta0, mode.betaL)
    return out


def apply_K_prime(u, grid: Grid, spec: Kernel, mode=Periodic(), h: Adhesion = LINEAR) -> np.ndarray:
    """Spatial derivative of ``K[u]`` at the cell centres.

    Interior part: the operator applied to the differenced ``h(u)``.  Bounded
    modes add the moving-limit terms ``f2' h(u(x+f2)) Omega(f2) - f1' h(u(x+f1)) Omega(f1)``.
    """
    u = grid.check(u)
    spec = _ready(spec)
    op = build_operator(grid, spec, mode, h, _neutral_ref(mode, u))
    hu = h(u)
    if op.periodic:
        dh = (np.roll(hu, -1) - np.roll(hu, 1)) / (2 * grid.dx)
        return op.apply_linear(dh)
    omega_edge = float(spec.omega(spec.R))
    if omega_edge > 1e-12 * spec.sup():
        warnings.warn(
            f"kernel does not vanish at r=R (omega(R)={omega_edge:.3g}); "
            "dK/dx jumps where the sensing window meets a wall",
            KernelBoundaryWarning,
            stacklevel=2,
        )
    dh = np.gradient(hu, grid.dx, edge_order=2)
    out = op.apply_linear(dh) + _limit_terms(hu, grid, spec, mode)
    if isinstance(mode, Neutral):
        ref = mode.uref if mode.uref is not None else float(np.mean(u))
        out -= _limit_terms(np.full(grid.M, float(h(ref))), grid, spec, mode)
    elif isinstance(mode, WeightedBoundary):
        x = grid.x
        out += mode.beta0 * np.where(x < spec.R, spec.omega(x), 0.0)
        out += mode.betaL * np.where(grid.L - x < spec.R, spec.omega(grid.L - x), 0.0)
    return out


def _limit_terms(hu, grid: Grid, spec: Kernel, mode):
    x = grid.x
    f1, f2 = sensing_limits(x, mode, spec.R, grid.L)
    d1, d2 = sensing_slopes(x, mode, spec.R, grid.L)
    upper = d2 * _sample(hu, x + f2, grid, False) * spec.signed(f2)
    lower = d1 * _sample(hu, x + f1, grid, False) * spec.signed(f1)
    return upper - lower


def wall_betas(u, grid: Grid, spec: Kernel, base=Naive(), h: Adhesion = LINEAR):
    """Wall strengths that make ``K`` vanish at both walls for the field ``u``."""
    spec = _ready(spec)
    k0, kL = evaluate_K(u, [0.0, grid.L], grid, spec, base, h)
    return 2.0 * k0, -2.0 * kL
