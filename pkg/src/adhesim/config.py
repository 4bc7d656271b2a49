"""Plain ``section.key = value`` run configuration.

Each section is a dataclass whose field names are the accepted keys.  Lines
starting with ``#`` and blank lines are ignored; an inline ``#`` starts a
comment.  Unknown sections or keys, malformed lines, invalid choices and
out-of-range numbers raise the matching ``ConfigError`` subclass.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .errors import ParseError, RangeError, UnknownKey, UnknownValue
from .grid import Grid
from .kernel import Exponential, Kernel, Peak, Tabulated, TwoPoint, Uniform
from .sensing import Adhesion, Naive, Neutral, NoFlux, Periodic, WeightedBoundary
from .solver import IC_KINDS, SCHEMES, SimParams


@dataclass
class GridConfig:
    L: float = 5.0
    N: int = 256


@dataclass
class KernelConfig:
    family: str = "uniform"
    R: float = 1.0
    xi: float = 0.25
    a1: float = 8 / 18
    a2: float = 1 / 18
    r1: float = 0.05
    r2: float = 0.8
    sigma: float = 0.0
    table: str = ""


@dataclass
class BoundaryConfig:
    mode: str = "periodic"
    base: str = "naive"
    uref: float = 0.0
    beta0: float = 0.0
    betaL: float = 0.0


@dataclass
class AdhesionConfig:
    kind: str = "linear"
    coeffs: tuple = (0.0, 1.0)


@dataclass
class SimConfig:
    D: float = 1.0
    alpha: float = 1.0
    t_end: float = 10.0
    rtol: float = 1e-6
    atol: float = 1e-6
    cfl: float = 0.9
    outputs: int = 100
    scheme: str = "ars"


@dataclass
class ICConfig:
    kind: str = "constant+noise"
    mean: float = 1.0
    amp: float = 1e-2
    seed: int = 0
    mode_n: int = 1


@dataclass
class SteadyConfig:
    method: str = "time"
    tol: float = 1e-9
    t_max: float = 1e5
    newton_tol: float = 1e-10


@dataclass
class BifurcationConfig:
    n_max: int = 10


@dataclass
class BranchConfig:
    n: int = 1
    alpha_end: float = 3.25
    d_alpha: float = 0.05
    s0: float = 0.05


CHOICES = {
    ("kernel", "family"): ("uniform", "exponential", "peak", "twopoint", "tabulated"),
    ("bc", "mode"): ("periodic", "naive", "noflux", "neutral", "weighted"),
    ("bc", "base"): ("naive", "noflux"),
    ("h", "kind"): ("linear", "poly"),
    ("ic", "kind"): IC_KINDS,
    ("sim", "scheme"): tuple(SCHEMES),
    ("steady", "method"): ("time", "newton"),
}


@dataclass
class RunConfig:
    grid: GridConfig = field(default_factory=GridConfig)
    kernel: KernelConfig = field(default_factory=KernelConfig)
    bc: BoundaryConfig = field(default_factory=BoundaryConfig)
    h: AdhesionConfig = field(default_factory=AdhesionConfig)
    sim: SimConfig = field(default_factory=SimConfig)
    ic: ICConfig = field(default_factory=ICConfig)
    steady: SteadyConfig = field(default_factory=SteadyConfig)
    bif: BifurcationConfig = field(default_factory=BifurcationConfig)
    branch: BranchConfig = field(default_factory=BranchConfig)
    explicit: frozenset = frozenset()
    base_dir: Path = Path(".")

    # -- builders -------------------------------------------------------------------
    def build_grid(self) -> Grid:
        return Grid(self.grid.L, self.grid.N)

    def build_kernel(self) -> Kernel:
        k = self.kernel
        if k.family == "uniform":
            return Uniform(R=k.R)
        if k.family == "exponential":
            return Exponential(R=k.R, xi=k.xi)
        if k.family == "peak":
            return Peak(R=k.R, xi=k.xi)
        if k.family == "twopoint":
            return TwoPoint(R=k.R, a1=k.a1, a2=k.a2, r1=k.r1, r2=k.r2, sigma=k.sigma or None)
        return Tabulated(R=k.R, samples=read_kernel_table(self.base_dir / k.table))

    def build_mode(self):
        b = self.bc
        if b.mode == "periodic":
            return Periodic()
        if b.mode == "naive":
            return Naive()
        if b.mode == "noflux":
            return NoFlux()
        base = Naive() if b.base == "naive" else NoFlux()
        if b.mode == "neutral":
            return Neutral(base=base, uref=b.uref if "bc.uref" in self.explicit else None)
        return WeightedBoundary(base=base, beta0=b.beta0, betaL=b.betaL)

    def build_adhesion(self) -> Adhesion:
        return Adhesion(tuple(self.h.coeffs)) if self.h.kind == "poly" else Adhesion((0.0, 1.0))

    def sim_params(self, alpha: float | None = None) -> SimParams:
        s = self.sim
        return SimParams(self.build_grid(), self.build_kernel(), self.build_mode(), self.build_adhesion(),
                         D=s.D, alpha=s.alpha if alpha is None else alpha, rtol=s.rtol, atol=s.atol,
                         cfl=s.cfl, scheme=s.scheme)

    def with_seed(self, seed: int) -> "RunConfig":
        return replace(self, ic=replace(self.ic, seed=int(seed)))

    def resolved_lines(self) -> list[str]:
        lines = []
        for section in SECTIONS:
            for f in fields(getattr(self, section)):
                lines.append(f"{section}.{f.name} = {format_value(getattr(getattr(self, section), f.name))}")
        return lines


SECTIONS = ("grid", "kernel", "bc", "h", "sim", "ic", "steady", "bif", "branch")


def format_value(v) -> str:
    if isinstance(v, tuple):
        return ", ".join(format_value(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _convert(section, key, default, text, line):
    try:
        if isinstance(default, bool):
            return text.lower() in ("1", "true", "yes", "on")
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
        if isinstance(default, tuple):
            return tuple(float(t) for t in text.replace(",", " ").split())
    except ValueError as exc:
        raise ParseError(line, f"cannot read {section}.{key} from {text!r}") from exc
    return text


def read_kernel_table(path: Path) -> tuple:
    """Two-column ``r,omega`` CSV with a header row."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 3:
        raise RangeError(f"kernel table {path} needs a header and at least two rows")
    return tuple((float(r), float(w)) for r, w in rows[1:] if r.strip())


def parse_config_text(text: str, base_dir: Path = Path(".")) -> RunConfig:
    cfg = RunConfig(base_dir=base_dir)
    explicit = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(lineno, "expected 'section.key = value'")
        name, value = (part.strip() for part in line.split("=", 1))
        if "." not in name or not value:
            raise ParseError(lineno, "expected 'section.key = value'")
        section, key = name.split(".", 1)
        if section not in SECTIONS:
            raise UnknownKey(name)
        block = getattr(cfg, section)
        known = {f.name: f for f in fields(block)}
        if key not in known:
            raise UnknownKey(name)
        converted = _convert(section, key, getattr(block, key), value, lineno)
        choices = CHOICES.get((section, key))
        if choices is not None and converted not in choices:
            raise UnknownValue(name, converted, choices)
        setattr(block, key, converted)
        explicit.add(name)
    cfg.explicit = frozenset(explicit)
    validate(cfg)
    return cfg


def parse_config(path) -> RunConfig:
    path = Path(path)
    return parse_config_text(path.read_text(), path.parent)


def _require(ok, key, message):
    if not ok:
        raise RangeError(f"{key}: {message}")


def validate(cfg: RunConfig) -> None:
    g, k, s, ic = cfg.grid, cfg.kernel, cfg.sim, cfg.ic
    _require(math.isfinite(k.R) and k.R > 0, "kernel.R", "must be positive")
    _require(g.L > 2 * k.R, "grid.L", f"must exceed one sensing diameter 2R = {2 * k.R:g}")
    _require(g.N > 0, "grid.N", "must be positive")
    _require(abs(g.L * g.N - round(g.L * g.N)) < 1e-9 * g.L * g.N, "grid.N", "L * N must be an integer")
    _require(s.D > 0, "sim.D", "must be positive")
    _require(s.t_end >= 0, "sim.t_end", "must be non-negative")
    _require(s.rtol > 0 and s.atol > 0, "sim.rtol", "tolerances must be positive")
    _require(0 < s.cfl <= 1, "sim.cfl", "must lie in (0, 1]")
    _require(s.outputs >= 1, "sim.outputs", "must be at least 1")
    _require(ic.mean > 0, "ic.mean", "must be positive")
    _require(ic.amp >= 0, "ic.amp", "must be non-negative")
    _require(ic.mode_n >= 1, "ic.mode_n", "must be at least 1")
    _require(k.xi > 0, "kernel.xi", "must be positive")
    _require(k.sigma >= 0, "kernel.sigma", "must be non-negative")
    if k.family == "tabulated":
        _require(bool(k.table), "kernel.table", "required for the tabulated family")
    if cfg.h.kind == "poly":
        _require(len(cfg.h.coeffs) >= 1 and np.all(np.isfinite(cfg.h.coeffs)), "h.coeffs",
                 "needs at least one finite coefficient")
    _require(cfg.steady.tol > 0 and cfg.steady.t_max > 0, "steady.tol", "must be positive")
    _require(cfg.bif.n_max >= 1, "bif.n_max", "must be at least 1")
    _require(cfg.branch.n >= 1, "branch.n", "must be at least 1")
    _require(cfg.branch.d_alpha > 0, "branch.d_alpha", "must be positive")
    try:
        cfg.build_kernel()
        cfg.build_mode()
    except (ValueError, OSError) as exc:
        raise RangeError(f"kernel: {exc}") from exc
