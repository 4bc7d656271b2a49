"""Structural checks on computed densities: area function, peaks, symmetry, energy, steady-state properties."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.signal import find_peaks

from .errors import NonPositiveDensity
from .grid import Grid
from .kernel import Kernel, Uniform, _ready
from .sensing import LINEAR, Adhesion, Periodic, apply_K, apply_K_prime

ENTROPY_FLOOR = 1e-14


# -- area function ----------------------------------------------------------------------
def area_function(u, grid: Grid, ubar: float | None = None) -> np.ndarray:
    """``w(x_i) = integral_0^{x_i} u - ubar x_i`` with the midpoint cumulative sum."""
    u = grid.check(u)
    ubar = float(np.mean(u)) if ubar is None else ubar
    cum = np.concatenate(([0.0], np.cumsum(u)[:-1])) * grid.dx
    return cum + 0.5 * grid.dx * u - ubar * grid.x


def periodic_interp(values, points, grid: Grid) -> np.ndarray:
    """Linear interpolation of cell-centre samples of an L-periodic function."""
    xp = np.concatenate(([grid.x[-1] - grid.L], grid.x, [grid.x[0] + grid.L]))
    fp = np.concatenate(([values[-1]], values, [values[0]]))
    return np.interp(np.mod(points, grid.L), xp, fp)


def delta1(w, grid: Grid, R: float = 1.0) -> np.ndarray:
    """``(w(x+R) + w(x-R) - 2 w(x)) / 2`` on a periodic grid."""
    w = np.asarray(w, dtype=float)
    x = grid.x
    return 0.5 * (periodic_interp(w, x + R, grid) + periodic_interp(w, x - R, grid) - 2.0 * w)


def kprime_uniform(u, grid: Grid, R: float = 1.0) -> np.ndarray:
    """``u(x+R) + u(x-R) - 2u(x)``: the derivative of K for the uniform kernel and linear h."""
    u = grid.check(u)
    x = grid.x
    return (periodic_interp(u, x + R, grid) + periodic_interp(u, x - R, grid) - 2.0 * u) / (2.0 * R)


# -- peaks and symmetry -----------------------------------------------------------------
def count_peaks(u, periodic: bool = True, rel_threshold: float = 1e-4, ubar: float | None = None) -> int:
    """Local maxima standing more than ``ubar * rel_threshold`` above the adjacent minima."""
    u = np.asarray(u, dtype=float)
    ubar = float(np.mean(u)) if ubar is None else ubar
    threshold = abs(ubar) * rel_threshold
    if periodic:
        start = int(np.argmin(u))
        r = np.roll(u, -start)
        r = np.append(r, r[0])
    else:
        floor = u.min() - 1.0
        r = np.concatenate(([floor], u, [floor]))
    peaks, _ = find_peaks(r, prominence=threshold if threshold > 0 else None)
    return len(peaks)


def _shift(u, fraction_of_length, grid: Grid):
    return periodic_interp(u, grid.x - fraction_of_length * grid.L, grid)


def symmetry_error(u, n: int, grid: Grid):
    """``(shift_err, reflect_err)`` for the symmetry group of an ``n``-peak pattern.

    ``shift_err = max|u(x) - u(x - L/n)|``; ``reflect_err`` is the smallest
    ``max|u(x) - u(2a - x)|`` over reflection axes ``a`` on the half-cell lattice.
    """
    u = grid.check(u)
    shift_err = float(np.max(np.abs(u - _shift(u, 1.0 / n, grid))))
    rev = u[::-1]
    reflect_err = min(float(np.max(np.abs(u - np.roll(rev, k)))) for k in range(grid.M))
    return shift_err, reflect_err


def half_tile_mass(u, grid: Grid, n: int = 1) -> float:
    """Mass on ``[0, L/(2n)]`` (the reference value is ``ubar L / (2n)``)."""
    u = grid.check(u)
    edge = grid.L / (2 * n)
    full = int(math.floor(edge / grid.dx + 1e-9))
    mass = np.sum(u[:full]) * grid.dx
    if full < grid.M:
        mass += u[full] * (edge - full * grid.dx)
    return float(mass)


# -- energy -----------------------------------------------------------------------------
def potential_weights(spec: Kernel, dx: float) -> np.ndarray:
    """``integral`` of ``W(|r|)`` over cell offsets ``0..m`` (offset 0 covers ``[-dx/2, dx/2]``)."""
    spec = _ready(spec)
    s = np.linspace(0.0, spec.R, 20_001)
    W = 0.5 - spec.cumulative(s)
    Q = cumulative_simpson(W, x=s, initial=0.0)
    m = int(math.ceil(spec.R / dx - 0.5))
    j = np.arange(0, m + 1)
    hi = np.interp(np.minimum((j + 0.5) * dx, spec.R), s, Q)
    lo = np.interp(np.maximum((j - 0.5) * dx, 0.0), s, Q)
    out = hi - lo
    out[0] = 2.0 * np.interp(min(0.5 * dx, spec.R), s, Q)
    return out


def potential_convolution(u, grid: Grid, spec: Kernel) -> np.ndarray:
    """``(W * u)_i = sum_k What_k u_{i+k}`` on a periodic grid."""
    u = grid.check(u)
    w = potential_weights(spec, grid.dx)
    c = np.zeros(grid.M)
    c[0] = w[0]
    for j, wj in enumerate(w[1:], start=1):
        c[j % grid.M] += wj
        c[-j % grid.M] += wj
    return np.real(np.fft.ifft(np.fft.fft(u) * np.fft.fft(c)))


def energy(u, grid: Grid, spec: Kernel, D: float = 1.0, alpha: float = 1.0):
    """``(entropy_energy, quadratic_energy)`` of a periodic density.

    ``entropy_energy = dx sum [D u ln u - alpha/2 u (W*u)]`` decreases along the
    flow; the quadratic variant uses ``D u^2 / 2`` in place of ``D u ln u``.
    """
    u = grid.check(u)
    if np.min(u) < -1e-12 * max(1.0, np.max(np.abs(u))):
        raise NonPositiveDensity("entropy energy needs a non-negative density")
    interaction = 0.5 * alpha * u * potential_convolution(u, grid, spec)
    v = np.maximum(u, ENTROPY_FLOOR)
    entropy = grid.dx * float(np.sum(D * v * np.log(v) - interaction))
    quadratic = grid.dx * float(np.sum(0.5 * D * u * u - interaction))
    return entropy, quadratic


# -- steady-state property checks ----------------------------------------------------------
@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    value: float
    tolerance: float


@dataclass
class DiagnosticsReport:
    checks: list[Check] = field(default_factory=list)
    residual: float = float("nan")

    def add(self, name, value, tolerance, passed):
        self.checks.append(Check(name, bool(passed), float(value), float(tolerance)))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def _sign_changes(v, periodic, floor):
    """Positions (in cell units, between centres) where ``v`` changes sign."""
    v = np.where(np.abs(v) <= floor, 0.0, v)
    nxt = np.roll(v, -1) if periodic else v[1:]
    cur = v if periodic else v[:-1]
    idx = np.nonzero((cur > 0) & (nxt < 0) | (cur < 0) & (nxt > 0))[0]
    # exact zeros count as crossings at the cell itself
    zeros = np.nonzero((v == 0) & (np.roll(v, 1) * np.roll(v, -1) < 0))[0]
    return np.sort(np.concatenate((idx + 0.5, zeros.astype(float))))


def _match_distance(a, b, M, periodic):
    if a.size == 0 and b.size == 0:
        return 0.0
    if a.size == 0 or b.size == 0:
        return math.inf
    d = np.abs(a[:, None] - b[None, :])
    if periodic:
        d = np.minimum(d, M - d)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def steady_state_checks(u, grid: Grid, spec: Kernel = Uniform(), alpha: float = 1.0,
                        mode=Periodic(), h: Adhesion = LINEAR, D: float = 1.0,
                        tol: float = 1e-6, residual: float | None = None) -> DiagnosticsReport:
    """Run the pointwise properties that every steady state must have.

    Values are reported even when a check fails; this never raises.
    """
    u = grid.check(u)
    spec = _ready(spec)
    periodic = isinstance(mode, Periodic)
    report = DiagnosticsReport(residual=float("nan") if residual is None else residual)
    K = apply_K(u, grid, spec, mode, h)
    if periodic:
        du = (np.roll(u, -1) - np.roll(u, 1)) / (2 * grid.dx)
        d2u = (np.roll(u, -1) - 2 * u + np.roll(u, 1)) / grid.dx**2
    else:
        du = np.gradient(u, grid.dx, edge_order=2)
        d2u = np.gradient(du, grid.dx, edge_order=2)
    scale = max(1.0, float(np.max(np.abs(u))))
    floor = 1e-10 * scale

    dist = _match_distance(_sign_changes(du, periodic, floor), _sign_changes(K, periodic, floor),
                           grid.M, periodic)
    report.add("zeros_coincide", dist, 1.0, dist <= 1.0)

    prod = float(np.min(du * K))
    report.add("sign_product", prod, tol, prod >= -tol)

    ubar = float(np.mean(u))
    mu = (ubar + grid.L) * spec.sup()
    lo, hi = ubar * math.exp(-alpha * mu * grid.L), ubar * math.exp(alpha * mu * grid.L)
    margin = float(min(np.min(u) - lo, hi - np.max(u)))
    report.add("apriori_bounds", margin, 0.0, margin >= 0)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        Kp = apply_K_prime(u, grid, spec, mode, h)
    concave = d2u <= 0
    worst = float(np.max(Kp[concave])) if np.any(concave) else -math.inf
    report.add("concave_implies_kprime_nonpositive", worst, tol, worst <= tol)
    rising = Kp >= 0
    worst = float(-np.min(d2u[rising])) if np.any(rising) else -math.inf
    report.add("kprime_nonnegative_implies_convex", worst, tol, worst <= tol)
    return report


def fourier_shift(u, shift_cells: float) -> np.ndarray:
    """Translate a periodic sample vector by a (fractional) number of cells."""
    u = np.asarray(u, dtype=float)
    k = np.fft.rfftfreq(u.size) * u.size
    return np.fft.irfft(np.fft.rfft(u) * np.exp(-2j * math.pi * k * shift_cells / u.size), n=u.size)


def align_periodic(v, reference):
    """Translate ``v`` (sub-cell, spectrally) to best match ``reference``; returns ``(aligned, shift)``."""
    from scipy.optimize import minimize_scalar

    v = np.asarray(v, dtype=float)
    reference = np.asarray(reference, dtype=float)
    corr = np.fft.irfft(np.fft.rfft(reference) * np.conj(np.fft.rfft(v)), n=v.size)
    coarse = int(np.argmax(corr))
    res = minimize_scalar(lambda s: float(np.sum((fourier_shift(v, s) - reference) ** 2)),
                          bounds=(coarse - 1.0, coarse + 1.0), method="bounded",
                          options={"xatol": 1e-10})
    return fourier_shift(v, res.x), float(res.x)
