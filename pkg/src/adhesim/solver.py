"""Time integration of ``u_t = D u_xx - alpha (u K[u])_x`` on cell averages.

Diffusion is treated implicitly and the nonlocal advection explicitly inside a
two-stage IMEX scheme.  The default ``ars`` scheme is L-stable, so stiff
diffusive modes are damped even at large steps; ``cn`` pairs Heun with
Crank-Nicolson.  The step size is chosen from an embedded first-order
estimate and capped by the advective CFL number.  Both schemes leave discrete
steady states untouched, so a run that settles reproduces the Newton solution
of the same discrete equations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _core
from .errors import NonFiniteState, NotConverged, StepSizeUnderflow
from .grid import Grid
from .kernel import Kernel, Uniform, _ready
from .sensing import LINEAR, Adhesion, Neutral, Periodic, build_operator

SCHEMES = {"cn": _core.SCHEME_CN, "ars": _core.SCHEME_ARS}


@dataclass(frozen=True)
class SimParams:
    """Everything that defines the discrete evolution equation and its tolerances."""

    grid: Grid
    kernel: Kernel = field(default_factory=Uniform)
    mode: object = field(default_factory=Periodic)
    h: Adhesion = LINEAR
    D: float = 1.0
    alpha: float = 1.0
    rtol: float = 1e-6
    atol: float = 1e-6
    cfl: float = 0.9
    scheme: str = "ars"

    def __post_init__(self):
        if self.D <= 0:
            raise ValueError("diffusion coefficient must be positive")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {sorted(SCHEMES)}")

    def with_alpha(self, alpha: float) -> "SimParams":
        return replace(self, alpha=alpha)

    def operator(self, uref=None):
        return build_operator(self.grid, _ready(self.kernel), self.mode, self.h, uref)

    def _core_args(self, u_for_ref):
        uref = None
        if isinstance(self.mode, Neutral) and self.mode.uref is None:
            uref = float(np.mean(u_for_ref))
        op = self.operator(uref)
        coeffs = np.asarray(self.h.coeffs, dtype=float)
        return (coeffs, op.weights, op.band_lo, op.band_hi, op.offset, op.periodic, op.uniform)

    def max_step(self, ubar: float) -> float:
        """Step cap ``2 cfl / rate`` from the fastest linear rate of the nonlocal term about ``ubar``."""
        rate = abs(self.alpha * ubar * float(self.h.derivative(ubar))) * self.growth_symbol()
        return 2.0 * self.cfl / rate if rate > 0 else np.inf

    def growth_symbol(self) -> float:
        """Largest growth rate per unit ``alpha * u h'(u)`` of the centred-difference nonlocal term.

        For the grid mode ``exp(ikx)`` the rate is
        ``2 sum_j w_j sin(k j dx) * sin(k dx) / dx``; bounded modes use the
        interior stencil.
        """
        w = self.operator(1.0 if isinstance(self.mode, Neutral) else None).weights
        dx = self.grid.dx
        k = 2 * np.pi * np.arange(self.grid.M // 2 + 1) / (self.grid.M * dx)
        j = np.arange(1, w.size + 1)
        rates = 2 * (np.sin(np.outer(k, j) * dx) @ w) * np.sin(k * dx) / dx
        return float(max(rates.max(), 0.0))

    @property
    def periodic(self) -> bool:
        return isinstance(self.mode, Periodic)


class RhsEvaluator:
    """Reusable compiled right-hand side (avoids re-allocating workspaces)."""

    def __init__(self, params: SimParams, uref_field):
        self.params = params
        self.args = params._core_args(uref_field)
        M = params.grid.M
        m = len(self.args[1])
        self.ws = np.zeros((9, M + 2 * m + 4))
        self.prefix = np.zeros(M + 2 * m + 1)

    def __call__(self, u, out=None):
        p = self.params
        out = np.empty(p.grid.M) if out is None else out
        _core.rhs_eval(np.ascontiguousarray(u, dtype=float), *self.args, p.D, p.alpha, p.grid.dx,
                       self.ws, self.prefix, out)
        return out


def rhs(u, params: SimParams) -> np.ndarray:
    """Semi-discrete tendency ``du/dt`` at the cell centres."""
    u = params.grid.check(u)
    return RhsEvaluator(params, u)(u)


def steady_residual(u, params: SimParams) -> float:
    """Relative residual used by ``run_to_steady`` (drift-free on periodic domains)."""
    u = params.grid.check(u)
    f = rhs(u, params)
    return _core.steady_residual(u, f, params.periodic) / np.max(np.abs(u))


@dataclass
class Kymograph:
    """Fields recorded at ``times``; ``u[k]`` is the profile at ``times[k]``."""

    times: np.ndarray
    x: np.ndarray
    u: np.ndarray
    steps: int = 0
    rejected: int = 0

    @property
    def final(self) -> np.ndarray:
        return self.u[-1]

    def masses(self, dx: float) -> np.ndarray:
        return self.u.sum(axis=1) * dx


def _resolve_outputs(outputs, t0, t_end):
    if outputs is None:
        return np.array([t_end])
    if np.isscalar(outputs):
        return np.linspace(t0, t_end, int(outputs) + 1)
    times = np.sort(np.asarray(outputs, dtype=float))
    if times.size and (times[0] < t0 or times[-1] > t_end):
        raise ValueError("output times must lie in [t0, t_end]")
    return times


def _run_core(u0, params: SimParams, t0, t_end, out_times, ss_tol, max_steps, dt0=None):
    grid = params.grid
    u0 = grid.check(u0).copy()
    args = params._core_args(u0)
    snaps = np.zeros((len(out_times), grid.M))
    if dt0 is None:
        dt0 = min(1e-3, max(t_end - t0, 1e-12))
    result = _core.integrate(
        u0, float(t0), float(t_end), out_times, snaps, SCHEMES[params.scheme], *args,
        params.D, params.alpha, grid.dx, params.rtol, params.atol, params.cfl, float(dt0),
        float(ss_tol), int(max_steps), params.max_step(float(np.mean(u0))),
    )
    status, t, u, steps, rejected, written = result
    if status == _core.UNDERFLOW:
        raise StepSizeUnderflow(f"step size underflow at t={t:.6g}")
    if status == _core.NONFINITE:
        raise NonFiniteState(f"non-finite values at t={t:.6g}")
    if status == _core.NEGATIVE:
        raise NonFiniteState(f"density dropped below -10*atol at t={t:.6g} (min {u.min():.3g})")
    return status, t, u, steps, rejected, snaps[:written]


def integrate(u0, params: SimParams, t_end: float, outputs=None, t0: float = 0.0,
              max_steps: int = 50_000_000) -> Kymograph:
    """Integrate from ``t0`` to ``t_end``.

    ``outputs`` is either a count of equally spaced intervals (fields recorded
    at ``count + 1`` times including both ends) or an explicit array of times.
    By default only the final field is stored.
    """
    if t_end < t0:
        raise ValueError("t_end must not precede t0")
    out_times = _resolve_outputs(outputs, t0, t_end)
    status, t, u, steps, rejected, snaps = _run_core(u0, params, t0, t_end, out_times, 0.0, max_steps)
    if status == _core.MAX_STEPS:
        raise NotConverged(f"step budget exhausted at t={t:.6g}")
    return Kymograph(out_times, params.grid.x.copy(), snaps, steps, rejected)


def run_to_steady(u0, params: SimParams, ss_tol: float = 1e-9, t_max: float = 1e5,
                  max_steps: int = 50_000_000):
    """Integrate until ``max|rhs| / max|u| < ss_tol``; returns ``(u, t)``.

    On a periodic domain the residual is taken after removing its projection
    on ``u_x`` (see ``steady_residual``), so patterns that only creep through
    grid pinning count as settled.
    """
    status, t, u, steps, rejected, _ = _run_core(
        u0, params, 0.0, t_max, np.zeros(0), ss_tol, max_steps
    )
    if status != _core.STEADY:
        raise NotConverged(f"no steady state by t={t:.6g} (ss_tol={ss_tol:g})")
    return u, t


def fixed_steps(u0, params: SimParams, dt: float, n_steps: int):
    """Take ``n_steps`` steps of size ``dt`` without error control.

    Returns ``(u, masses)`` where ``masses[k]`` is the mass after ``k`` steps.
    Intended for checking properties of the one-step map itself.
    """
    grid = params.grid
    u = grid.check(u0).copy()
    coeffs, w, band_lo, band_hi, offset, periodic, uniform = params._core_args(u)
    M = grid.M
    m = w.size
    ws = np.zeros((9, M + 2 * m + 4))
    prefix = np.zeros(M + 2 * m + 1)
    fac = np.zeros((4, M))
    scheme = SCHEMES[params.scheme]
    theta = 0.5 if scheme == _core.SCHEME_CN else _core.ARS_GAMMA
    _core.factorize(theta * dt, params.D, params.grid.dx, periodic, fac)
    A0, L0, new, low = (np.empty(M) for _ in range(4))
    masses = np.empty(n_steps + 1)
    masses[0] = grid.mass(u)
    for k in range(1, n_steps + 1):
        _core.adv_op(u, coeffs, w, band_lo, band_hi, offset, periodic, uniform, params.alpha, grid.dx,
                     ws, prefix, A0)
        _core.laplacian(u, params.D, grid.dx, periodic, L0)
        _core.imex_step(u, A0, L0, dt, scheme, fac, coeffs, w, band_lo, band_hi, offset, periodic,
                        uniform, params.D, params.alpha, grid.dx, ws, prefix, new, low)
        if not np.all(np.isfinite(new)):
            raise NonFiniteState(f"non-finite values after {k} fixed steps")
        u, new = new, u
        masses[k] = grid.mass(u)
    return u, masses


# -- initial conditions --------------------------------------------------------------
IC_KINDS = ("constant+noise", "constant+cos", "two-cos", "constant")


def initial_condition(grid: Grid, kind: str = "constant+noise", mean: float = 1.0,
                      amp: float = 1e-2, seed: int = 0, mode_n: int = 1) -> np.ndarray:
    """Initial densities with exact mean ``mean``.

    ``constant+noise``: independent uniform perturbations in ``[-amp, amp]``.
    ``constant+cos``: ``amp * cos(2 pi n x / L)``.
    ``two-cos``: mode ``n`` plus a tenth as much of mode ``n - 1`` (or ``n + 1``
    when ``n = 1``), which breaks the translation symmetry of a pure cosine.
    """
    x = grid.x
    k = 2 * math.pi / grid.L
    if kind == "constant":
        u = np.full(grid.M, mean)
    elif kind == "constant+noise":
        rng = np.random.default_rng(seed)
        u = mean + rng.uniform(-amp, amp, grid.M)
    elif kind == "constant+cos":
        u = mean + amp * np.cos(k * mode_n * x)
    elif kind == "two-cos":
        other = mode_n - 1 if mode_n > 1 else 2
        u = mean + amp * (np.cos(k * mode_n * x) + 0.1 * np.cos(k * other * x))
    else:
        raise ValueError(f"unknown initial condition {kind!r}; expected one of {IC_KINDS}")
    return u - (np.mean(u) - mean)
