"""Interaction kernels and the integral quantities derived from them.

A kernel is described by its radial profile ``omega(r)`` on ``[0, R]``; the odd
extension ``Omega(r) = sign(r) * omega(|r|)`` is what enters the nonlocal flux.
Every family carries an optional ``scale`` (the normalisation constant).  An
unnormalised spec has ``scale=None`` and is normalised on demand so that
``integral_0^R omega = 1/2``.
"""

from __future__ import annotations

import dataclasses
import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson
from scipy.special import erf

from .errors import NonNormalizable

QUAD_PANELS = 10_000
DEGENERACY_TOL = 1e-9


def _simpson(fun, a, b, panels=QUAD_PANELS):
    panels += panels % 2
    r = np.linspace(a, b, panels + 1)
    return float(simpson(fun(r), x=r))


@dataclass(frozen=True)
class Kernel:
    """Common behaviour; subclasses provide ``_shape`` and ``_shape_cumulative``."""

    R: float = 1.0
    scale: float | None = None

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError(f"kernel radius must be positive, got {self.R}")

    @property
    def family(self) -> str:
        return type(self).__name__.lower()

    def _shape(self, r):
        raise NotImplementedError

    def _shape_cumulative(self, s):
        # Fallback: adaptive-free composite quadrature per point.
        s = np.atleast_1d(np.asarray(s, dtype=float))
        return np.array([_simpson(self._shape, 0.0, si) if si > 0 else 0.0 for si in s])

    # -- normalised quantities ------------------------------------------------
    @property
    def omega0(self) -> float:
        return self.scale if self.scale is not None else normalize(self).scale

    def omega(self, r):
        """Radial profile at distances ``r`` (symmetric in ``r``, zero beyond R)."""
        r = np.abs(np.asarray(r, dtype=float))
        inside = r <= self.R
        return np.where(inside, self.omega0 * self._shape(np.minimum(r, self.R)), 0.0)

    def signed(self, r):
        """Odd extension ``sign(r) * omega(|r|)``."""
        r = np.asarray(r, dtype=float)
        return np.sign(r) * self.omega(r)

    def cumulative(self, s):
        """``integral_0^|s| omega``, saturating at 1/2 once ``|s| >= R``."""
        s = np.minimum(np.abs(np.asarray(s, dtype=float)), self.R)
        out = self.omega0 * np.asarray(self._shape_cumulative(s), dtype=float)
        return out.reshape(np.shape(s)) if np.ndim(s) else float(out.reshape(-1)[0])

    def signed_integral(self, a, b):
        """``integral_a^b Omega(r) dr`` for ``a <= b`` (elementwise)."""
        return self.cumulative(b) - self.cumulative(a)

    def sup(self) -> float:
        r = np.linspace(0.0, self.R, 20_001)
        return float(np.max(self.omega(r)))


@dataclass(frozen=True)
class Uniform(Kernel):
    def _shape(self, r):
        return np.ones_like(np.asarray(r, dtype=float))

    def _shape_cumulative(self, s):
        return np.asarray(s, dtype=float)


@dataclass(frozen=True)
class Exponential(Kernel):
    xi: float = 0.25

    def __post_init__(self):
        super().__post_init__()
        if not self.xi > 0:
            raise ValueError("xi must be positive")

    def _shape(self, r):
        return np.exp(-np.asarray(r, dtype=float) / self.xi)

    def _shape_cumulative(self, s):
        return self.xi * -np.expm1(-np.asarray(s, dtype=float) / self.xi)


@dataclass(frozen=True)
class Peak(Kernel):
    xi: float = 0.25

    def __post_init__(self):
        super().__post_init__()
        if not self.xi > 0:
            raise ValueError("xi must be positive")

    def _shape(self, r):
        z = np.asarray(r, dtype=float) / self.xi
        return z * np.exp(-0.5 * z * z)

    def _shape_cumulative(self, s):
        z = np.asarray(s, dtype=float) / self.xi
        return self.xi * -np.expm1(-0.5 * z * z)


@dataclass(frozen=True)
class TwoPoint(Kernel):
    """Two narrow Gaussian bumps at ``r1`` and ``r2`` carrying weights ``a1`` and ``a2``.

    Each bump is truncated to ``[0, R]`` and renormalised to unit mass there, so
    with ``a1 + a2 = 1/2`` the kernel is already normalised.
    """

    a1: float = 0.25
    a2: float = 0.25
    r1: float = 0.25
    r2: float = 0.75
    sigma: float | None = None

    def __post_init__(self):
        super().__post_init__()
        if not (0 <= self.r1 < self.r2 <= self.R):
            raise ValueError("need 0 <= r1 < r2 <= R")
        if self.a1 < 0 or self.a2 < 0:
            raise ValueError("bump weights must be non-negative")
        if self.width <= 0:
            raise ValueError("sigma must be positive")

    @property
    def width(self) -> float:
        return 0.02 * self.R if self.sigma is None else self.sigma

    def _bump_cdf(self, s, centre):
        c = self.width * math.sqrt(2.0)
        return 0.5 * (erf((np.asarray(s, dtype=float) - centre) / c) + erf(centre / c))

    def _bump_mass(self, centre):
        return float(self._bump_cdf(self.R, centre))

    def _shape(self, r):
        r = np.asarray(r, dtype=float)
        norm = self.width * math.sqrt(2.0 * math.pi)
        out = np.zeros_like(r)
        for a, c in ((self.a1, self.r1), (self.a2, self.r2)):
            out = out + a * np.exp(-0.5 * ((r - c) / self.width) ** 2) / (norm * self._bump_mass(c))
        return out

    def _shape_cumulative(self, s):
        out = 0.0
        for a, c in ((self.a1, self.r1), (self.a2, self.r2)):
            out = out + a * self._bump_cdf(s, c) / self._bump_mass(c)
        return out


@dataclass(frozen=True)
class Tabulated(Kernel):
    """Piecewise-linear profile through ``(r, omega)`` samples covering ``[0, R]``."""

    samples: tuple = ()

    def __post_init__(self):
        super().__post_init__()
        pts = np.asarray(self.samples, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
            raise ValueError("samples must be a sequence of at least two (r, omega) pairs")
        object.__setattr__(self, "samples", tuple(map(tuple, pts.tolist())))
        r = pts[:, 0]
        if np.any(np.diff(r) <= 0):
            raise ValueError("sample radii must be strictly increasing")
        if r[0] != 0 or r[-1] < self.R:
            raise ValueError("samples must start at r=0 and reach R")

    @property
    def _knots(self):
        pts = np.asarray(self.samples, dtype=float)
        return pts[:, 0], pts[:, 1]

    def _shape(self, r):
        knots, vals = self._knots
        return np.interp(np.asarray(r, dtype=float), knots, vals)

    def _shape_cumulative(self, s):
        knots, vals = self._knots
        s = np.asarray(s, dtype=float)
        seg = np.diff(knots)
        at_knots = np.concatenate(([0.0], np.cumsum(0.5 * seg * (vals[1:] + vals[:-1]))))
        k = np.clip(np.searchsorted(knots, s, side="right") - 1, 0, len(seg) - 1)
        d = s - knots[k]
        slope = (vals[k + 1] - vals[k]) / seg[k]
        return at_knots[k] + vals[k] * d + 0.5 * slope * d * d


FAMILIES = {
    "uniform": Uniform,
    "exponential": Exponential,
    "peak": Peak,
    "twopoint": TwoPoint,
    "tabulated": Tabulated,
}


@functools.lru_cache(maxsize=256)
def normalize(spec: Kernel) -> Kernel:
    """Return a copy whose scale makes ``integral_0^R omega = 1/2``."""
    mass = _simpson(spec._shape, 0.0, spec.R)
    if not np.isfinite(mass) or abs(mass) < 1e-300:
        raise NonNormalizable(f"{spec.family} kernel has zero integral on [0, R]")
    return dataclasses.replace(spec, scale=0.5 / mass)


def _ready(spec: Kernel) -> Kernel:
    return spec if spec.scale is not None else normalize(spec)


def moment(spec: Kernel, n: int, L: float) -> float:
    """Sine moment ``M_n = integral_0^R sin(2 pi n r / L) omega(r) dr``."""
    spec = _ready(spec)
    k = 2.0 * math.pi * n / L
    if isinstance(spec, Uniform):
        return spec.scale * 2.0 * math.sin(0.5 * k * spec.R) ** 2 / k
    return _simpson(lambda r: np.sin(k * r) * spec.omega(r), 0.0, spec.R)


def delta_moment(spec: Kernel, n: int, L: float) -> float:
    """``2 M_n - M_2n``, the combination that fixes branch direction."""
    return 2.0 * moment(spec, n, L) - moment(spec, 2 * n, L)


def is_degenerate(spec: Kernel, n: int, L: float) -> bool:
    return abs(moment(spec, n, L)) < DEGENERACY_TOL


def raw_moment(spec: Kernel, j: int) -> float:
    """``integral_{-R}^{R} r^j Omega(r) dr``: zero for even j."""
    if j % 2 == 0:
        return 0.0
    spec = _ready(spec)
    return 2.0 * _simpson(lambda r: r**j * spec.omega(r), 0.0, spec.R)


def first_moment_coefficient(spec: Kernel) -> float:
    """Dimensionless first moment ``c1 = integral_0^1 s omega_1(s) ds`` of the unit-radius profile."""
    return raw_moment(spec, 1) / (2.0 * spec.R)


def adhesion_potential(spec: Kernel, r):
    """``W(r) = integral_|r|^R omega``; vanishes for ``|r| >= R``."""
    spec = _ready(spec)
    return 0.5 - spec.cumulative(r)


def offset_weights(spec: Kernel, dx: float) -> np.ndarray:
    """Mass of ``omega`` on ``[(j - 1/2) dx, (j + 1/2) dx] & [0, R]`` for offsets ``j = 1..m``.

    Offset ``j`` is the distance to the ``j``-th neighbouring cell centre; with
    piecewise-constant cell data this gives a second-order quadrature.
    """
    spec = _ready(spec)
    m = max(1, math.ceil(spec.R / dx - 0.5))
    j = np.arange(1, m + 1)
    return spec.cumulative(np.minimum((j + 0.5) * dx, spec.R)) - spec.cumulative((j - 0.5) * dx)


def moment_table(spec: Kernel, L: float, n_max: int) -> np.ndarray:
    """Rows ``(n, M_n, 2 M_n - M_2n)`` for ``n = 1..n_max``."""
    rows = [(n, moment(spec, n, L), delta_moment(spec, n, L)) for n in range(1, n_max + 1)]
    return np.array(rows)
