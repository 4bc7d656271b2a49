"""Bifurcations from the uniform state on a periodic domain.

Closed-form quantities follow from the kernel sine moments: the critical
adhesion strengths, the cubic coefficient that decides the branch direction,
the second-harmonic amplitude and the spectrum of the linearisation.  Nonlinear
branches are computed by Newton's method on the discrete steady-state
equations and continued in the adhesion strength.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DegenerateMode, NewtonDiverged, SingularJacobian, UnsupportedAdhesion
from .grid import Grid
from .kernel import DEGENERACY_TOL, Kernel, _ready, moment, offset_weights
from .sensing import LINEAR, Adhesion, Periodic
from .solver import RhsEvaluator, SimParams


def _slope(h: Adhesion, ubar: float) -> float:
    if not h.is_linear:
        raise UnsupportedAdhesion("bifurcation formulas need a linear adhesion function")
    slope = float(h.derivative(ubar))
    if slope == 0.0:
        raise UnsupportedAdhesion("adhesion function has zero slope")
    return slope


def _checked_moment(spec: Kernel, n: int, L: float) -> float:
    Mn = moment(spec, n, L)
    if abs(Mn) < DEGENERACY_TOL:
        raise DegenerateMode(f"M_{n} vanishes for L={L}: no bifurcation from mode {n}")
    return Mn


def alpha_n(spec: Kernel, n: int, L: float, ubar: float = 1.0, h: Adhesion = LINEAR) -> float:
    """Critical adhesion strength at which mode ``n`` destabilises the uniform state."""
    Mn = _checked_moment(spec, n, L)
    return n * math.pi / (ubar * L * Mn * float(h.derivative(ubar)))


def alpha_3n(spec: Kernel, n: int, L: float, ubar: float = 1.0, h: Adhesion = LINEAR,
             mode_coupling: bool = True) -> float:
    """Curvature of the branch: ``alpha(s) = alpha_n + s^2 alpha_3n + O(s^3)``.

    The branch is normalised as ``u = ubar + s alpha_n cos(2 pi n x / L) + O(s^2)``.
    Positive values mean a supercritical pitchfork.  The value is
    ``(pi n / L)^3 (M_n - M_2n) / (4 ubar^5 M_n^3 (2 M_n - M_2n))``.  The factor
    ``M_n - M_2n`` comes from the two ways the second harmonic feeds back on
    mode ``n``: through ``cos * K[cos 2]`` and through ``cos 2 * K[cos]``.
    ``mode_coupling=False`` keeps only the second route, which gives
    ``(pi n / L)^3 / (4 ubar^5 M_n^2 (2 M_n - M_2n))``; the two agree when
    ``M_2n = 0``.
    """
    c = _slope(h, ubar)
    Mn = _checked_moment(spec, n, L)
    M2n = moment(spec, 2 * n, L)
    q = math.pi * n / L
    reduced = q**3 / (4.0 * ubar**5 * Mn**2 * (2.0 * Mn - M2n)) / c**3
    if not mode_coupling:
        return reduced
    return reduced * (Mn - M2n) / Mn


def b_2n(spec: Kernel, n: int, L: float, ubar: float = 1.0, h: Adhesion = LINEAR) -> float:
    """Amplitude of the second harmonic ``cos(4 pi n x / L)`` at order ``s^2``."""
    c = _slope(h, ubar)
    Mn = _checked_moment(spec, n, L)
    M2n = moment(spec, 2 * n, L)
    q = math.pi * n / L
    return q**2 / (2.0 * ubar**3 * (2.0 * Mn**2 - Mn * M2n)) / c**2


def growth_rate(spec: Kernel, k: int, L: float, alpha: float, ubar: float = 1.0, D: float = 1.0,
                h: Adhesion = LINEAR) -> float:
    """Linear growth rate of ``cos(2 pi k x / L)`` about the uniform state."""
    q = 2.0 * math.pi * k / L
    return -D * q * q + 2.0 * alpha * ubar * float(h.derivative(ubar)) * q * moment(spec, k, L)


def linearized_spectrum(spec: Kernel, n: int, L: float, k_max: int = 50, ubar: float = 1.0,
                        h: Adhesion = LINEAR) -> np.ndarray:
    """Eigenvalues for modes ``k = 1..k_max`` at ``alpha = alpha_n`` (with ``D = 1``)."""
    Mn = _checked_moment(spec, n, L)
    out = np.empty(k_max)
    for k in range(1, k_max + 1):
        q = 2.0 * math.pi * k / L
        Mk = moment(spec, k, L)
        out[k - 1] = 0.0 if k == n else q * q * ((n / k) * (Mk / Mn) - 1.0)
    return out


@dataclass(frozen=True)
class BifPoint:
    n: int
    Mn: float
    alpha_n: float
    delta_Mn: float
    alpha_3n: float
    b_2n1: float

    @property
    def criticality(self) -> str:
        return "supercritical" if self.alpha_3n > 0 else "subcritical"


def bif_type(spec: Kernel, n: int, L: float, ubar: float = 1.0, h: Adhesion = LINEAR) -> BifPoint:
    """All closed-form branch data for mode ``n``."""
    _slope(h, ubar)
    spec = _ready(spec)
    Mn = _checked_moment(spec, n, L)
    return BifPoint(
        n=n,
        Mn=Mn,
        alpha_n=alpha_n(spec, n, L, ubar, h),
        delta_Mn=2.0 * Mn - moment(spec, 2 * n, L),
        alpha_3n=alpha_3n(spec, n, L, ubar, h),
        b_2n1=b_2n(spec, n, L, ubar, h),
    )


def bifurcation_table(spec: Kernel, L: float, n_max: int, ubar: float = 1.0,
                      h: Adhesion = LINEAR) -> list[BifPoint]:
    """Branch data for every non-degenerate mode up to ``n_max``."""
    rows = []
    for n in range(1, n_max + 1):
        try:
            rows.append(bif_type(spec, n, L, ubar, h))
        except DegenerateMode:
            continue
    return rows


@dataclass(frozen=True)
class Stability:
    stable: bool
    mu_sign: int
    max_other_eigenvalue: float

    @property
    def kind(self) -> str:
        return "stable" if self.stable else "saddle"


def stability(spec: Kernel, n: int, L: float, ubar: float = 1.0, k_max: int = 200,
              h: Adhesion = LINEAR) -> Stability:
    """Stability of the branch bifurcating from mode ``n``.

    Stable iff every other mode is damped at ``alpha_n`` and the branch is
    supercritical.  ``mu_sign`` is the sign of the exchanged eigenvalue along
    the branch.
    """
    a3 = alpha_3n(spec, n, L, ubar, h)
    lam = linearized_spectrum(spec, n, L, k_max, ubar, h)
    others = np.delete(lam, n - 1)
    top = float(others.max()) if others.size else -math.inf
    return Stability(stable=bool(top < 0 and a3 > 0), mu_sign=-int(np.sign(a3)), max_other_eigenvalue=top)


# -- discrete-consistent symbols ------------------------------------------------------
def discrete_moment(grid: Grid, spec: Kernel, n: int) -> float:
    """``M_n`` as seen by the periodic cell-centre operator (exact for grid Fourier modes)."""
    w = offset_weights(_ready(spec), grid.dx)
    j = np.arange(1, len(w) + 1)
    return float(w @ np.sin(2 * math.pi * n * j * grid.dx / grid.L))


def discrete_alpha_n(grid: Grid, spec: Kernel, n: int, ubar: float = 1.0, D: float = 1.0) -> float:
    """Bifurcation value of the semi-discrete scheme (linear ``h(u) = u``)."""
    q = 2 * math.pi * n / grid.L
    dx = grid.dx
    lap = 4.0 * D * math.sin(0.5 * q * dx) ** 2 / dx**2
    adv = 2.0 * ubar * discrete_moment(grid, spec, n) * math.sin(q * dx) / dx
    if abs(adv) < DEGENERACY_TOL:
        raise DegenerateMode(f"mode {n} is degenerate on this grid")
    return lap / adv


def local_branch(grid: Grid, spec: Kernel, n: int, s: float, ubar: float = 1.0,
                 h: Adhesion = LINEAR, discrete: bool = False):
    """Second-order expansion of the branch from mode ``n`` at amplitude parameter ``s``.

    Returns ``(alpha, u)`` with
    ``u = ubar + s alpha_n cos(k x) + s^2 b_2n cos(2 k x)`` and
    ``alpha = alpha_n + s^2 alpha_3n``.  With ``discrete=True`` the critical
    value is taken from the discrete operator so that the residual of the
    discrete equations is free of the O(s dx^2) mismatch.
    """
    a_n = discrete_alpha_n(grid, spec, n, ubar) if discrete else alpha_n(spec, n, grid.L, ubar, h)
    a3 = alpha_3n(spec, n, grid.L, ubar, h)
    b = b_2n(spec, n, grid.L, ubar, h)
    k = 2 * math.pi * n / grid.L
    u = ubar + s * a_n * np.cos(k * grid.x) + s * s * b * np.cos(2 * k * grid.x)
    return a_n + s * s * a3, u


# -- Newton solver --------------------------------------------------------------------
@dataclass
class NewtonResult:
    u: np.ndarray
    alpha: float
    drift: float
    iterations: int
    residual: float


def _central_difference(u, dx):
    return (np.roll(u, -1) - np.roll(u, 1)) / (2 * dx)


class SteadyStateSystem:
    """Square system whose roots are discrete steady states of fixed mass.

    The residual is the per-cell flux imbalance ``dx * rhs``.  One equation is
    redundant (fluxes telescope) and is replaced by the mass constraint.  On a
    periodic domain a drift speed ``c`` joins the unknowns, with
    ``c * u_x`` added to the tendency, and the reflection condition
    ``u[M/4] = u[M-1-M/4]`` removes the translation invariance.

    With ``arclength=(n, a0, alpha0, ta, talpha, ds)`` the adhesion strength
    becomes an unknown too, tied to the cosine amplitude ``a(u)`` of mode
    ``n`` by ``ta (a - a0) + talpha (alpha - alpha0) = ds``.
    """

    def __init__(self, params: SimParams, mass_mean: float, arclength=None):
        self.params = params
        self.grid = params.grid
        self.mean = mass_mean
        self.periodic = isinstance(params.mode, Periodic)
        self.arclength = arclength
        M = self.grid.M
        if arclength is None:
            self.evaluator = RhsEvaluator(params, np.full(M, mass_mean))
        else:
            self.diffusion = RhsEvaluator(params.with_alpha(0.0), np.full(M, mass_mean))
            self.advection = RhsEvaluator(params.with_alpha(1.0), np.full(M, mass_mean))
            self.basis = mode_basis(self.grid, arclength[0])
        self.n_fixed = M + 1 if self.periodic else M
        self.size = self.n_fixed + (arclength is not None)
        self.pair = (M // 4, M - 1 - M // 4)

    def pack(self, u, drift=0.0, alpha=None):
        z = np.concatenate((u, [drift])) if self.periodic else np.array(u, dtype=float)
        return z if self.arclength is None else np.append(z, alpha)

    def unpack(self, z):
        M = self.grid.M
        u, c = (z[:M], z[M]) if self.periodic else (z[:M], 0.0)
        alpha = self.params.alpha if self.arclength is None else z[-1]
        return u, c, alpha

    def __call__(self, z):
        u, c, alpha = self.unpack(z)
        dx = self.grid.dx
        if self.arclength is None:
            r = self.evaluator(u) * dx
        else:
            d = self.diffusion(u)
            r = (d + alpha * (self.advection(u) - d)) * dx
        if self.periodic:
            r += c * _central_difference(u, dx) * dx
        r[-1] = np.mean(u) - self.mean
        if self.periodic:
            r = np.append(r, u[self.pair[0]] - u[self.pair[1]])
        if self.arclength is not None:
            _, a0, alpha0, ta, talpha, ds = self.arclength
            a = float(self.basis @ u)
            r = np.append(r, ta * (a - a0) + talpha * (alpha - alpha0) - ds)
        return r

    def jacobian(self, z, r0=None):
        r0 = self(z) if r0 is None else r0
        J = np.empty((self.size, self.size))
        for j in range(self.size):
            step = 1e-7 * max(1.0, abs(z[j]))
            zj = z.copy()
            zj[j] += step
            J[:, j] = (self(zj) - r0) / step
        return J


def mode_basis(grid: Grid, n: int) -> np.ndarray:
    """Row vector giving the cosine coefficient of mode ``n``: ``a(u) = basis @ u``."""
    return 2.0 / grid.M * np.cos(2 * math.pi * n * grid.x / grid.L)


def _newton(system: SteadyStateSystem, z, tol, max_iter, max_halvings):
    r = system(z)
    norm = np.max(np.abs(r))
    for it in range(max_iter + 1):
        if norm < tol:
            return z, it, norm
        if it == max_iter:
            break
        J = system.jacobian(z, r)
        try:
            lu = scipy.linalg.lu_factor(J, check_finite=True)
        except (ValueError, np.linalg.LinAlgError) as exc:
            raise SingularJacobian(str(exc)) from exc
        if np.any(np.abs(np.diag(lu[0])) < 1e-14 * np.max(np.abs(np.diag(lu[0])))):
            raise SingularJacobian("Jacobian is numerically singular")
        delta = scipy.linalg.lu_solve(lu, -r)
        lam = 1.0
        for _ in range(max_halvings + 1):
            trial = z + lam * delta
            rt = system(trial)
            nt = np.max(np.abs(rt))
            if np.isfinite(nt) and nt < norm:
                break
            lam *= 0.5
        else:
            raise NewtonDiverged(f"no residual decrease after {max_halvings} halvings (|r|={norm:.3g})")
        z, r, norm = trial, rt, nt
    raise NewtonDiverged(f"residual {norm:.3g} after {max_iter} iterations")


def newton_steady(u0, params: SimParams, tol: float = 1e-10, max_iter: int = 40,
                  max_halvings: int = 30) -> NewtonResult:
    """Damped Newton iteration for a steady state with the mass of ``u0``.

    Converged when the max-norm of the residual (flux imbalance per cell, mass
    and phase conditions) falls below ``tol``.
    """
    u0 = params.grid.check(u0)
    system = SteadyStateSystem(params, float(np.mean(u0)))
    z, it, norm = _newton(system, system.pack(u0.copy()), tol, max_iter, max_halvings)
    u, c, _ = system.unpack(z)
    return NewtonResult(u.copy(), params.alpha, c, it, norm)


# -- continuation ---------------------------------------------------------------------
@dataclass
class BranchPoint:
    alpha: float
    u: np.ndarray = field(repr=False)
    l2_amplitude: float
    u_max: float
    u_min: float
    peaks: int


def _branch_point(alpha, u, grid: Grid, ubar: float) -> BranchPoint:
    from .diagnostics import count_peaks

    amp = math.sqrt(np.mean((u - ubar) ** 2) * grid.L)
    return BranchPoint(alpha, u.copy(), amp, float(u.max()), float(u.min()), count_peaks(u, periodic=True))


def continue_branch(params: SimParams, n: int, alpha_end: float, d_alpha: float = 0.05,
                    ubar: float = 1.0, s0: float = 0.05, blowup: float = 1e3,
                    tol: float = 1e-10, max_points: int = 2000) -> list[BranchPoint]:
    """Pseudo-arclength continuation of the mode-``n`` branch towards ``alpha_end``.

    The curve is traced in the plane of (cosine amplitude of mode ``n``,
    ``alpha``), so folds in ``alpha`` are passed.  Steps are sized so that
    ``alpha`` moves by at most ``d_alpha``.  Tracing stops once ``alpha``
    reaches ``alpha_end`` (the last point is solved at exactly that value),
    once ``max u`` exceeds ``blowup * ubar``, or when Newton fails even at a
    tiny step.
    """
    grid = params.grid
    M = grid.M
    basis = mode_basis(grid, n)
    alpha0, guess = local_branch(grid, params.kernel, n, s0, ubar, params.h, discrete=True)
    a_start = float(basis @ guess)

    def solve(z0, constraint):
        system = SteadyStateSystem(params.with_alpha(z0[-1]), ubar, constraint)
        z, _, _ = _newton(system, z0, tol, 40, 30)
        return z

    extra = 1 if isinstance(params.mode, Periodic) else 0
    # first point: fix the amplitude of the local expansion
    z = np.concatenate((guess, [0.0] * extra, [alpha0]))
    try:
        z = solve(z, (n, a_start, 0.0, 1.0, 0.0, 0.0))
    except (NewtonDiverged, SingularJacobian):
        return []
    points = [_branch_point(z[-1], z[:M], grid, ubar)]
    direction = 1.0 if alpha_end >= z[-1] else -1.0
    ds = d_alpha
    prev = None
    while len(points) < max_points:
        if prev is None:
            # leave the first point by growing the amplitude, whichever way alpha turns
            tangent = np.concatenate((basis * M / 2, [0.0] * extra, [0.0]))
            tangent /= float(basis @ tangent[:M])
        else:
            tangent = z - prev
            tangent /= math.hypot(float(basis @ tangent[:M]), tangent[-1])
        ta, tal = float(basis @ tangent[:M]), float(tangent[-1])
        a_here = float(basis @ z[:M])
        while True:
            trial = z + ds * tangent
            try:
                new = solve(trial, (n, a_here, z[-1], ta, tal, ds))
                if abs(new[-1] - z[-1]) <= 2.0 * d_alpha:
                    break
            except (NewtonDiverged, SingularJacobian):
                pass
            ds *= 0.5
            if ds < d_alpha * 1e-4:
                return points
        crossed = direction * (new[-1] - alpha_end) >= 0
        if crossed:
            w = (alpha_end - z[-1]) / (new[-1] - z[-1])
            final = newton_steady((1 - w) * z[:M] + w * new[:M], params.with_alpha(alpha_end), tol=tol)
            points.append(_branch_point(alpha_end, final.u, grid, ubar))
            return points
        prev, z = z, new
        pt = _branch_point(z[-1], z[:M], grid, ubar)
        points.append(pt)
        if pt.u_max > blowup * ubar:
            return points
        moved = abs(z[-1] - prev[-1])
        ds = abs(ds) * min(2.0, d_alpha / max(moved, 1e-12)) if moved > 0 else abs(ds) * 2.0
    return points
