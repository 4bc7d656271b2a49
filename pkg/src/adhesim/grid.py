"""Uniform cell-centred grid on [0, L]."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import GridMismatch


@dataclass(frozen=True)
class Grid:
    """``N`` cells per unit length on ``[0, L]``; ``L * N`` must be an integer."""

    L: float
    N: int = 256

    def __post_init__(self):
        if not self.L > 0 or self.N < 1:
            raise GridMismatch(f"need L > 0 and N >= 1, got L={self.L}, N={self.N}")
        if abs(self.L * self.N - round(self.L * self.N)) > 1e-9:
            raise GridMismatch(f"L * N must be an integer, got {self.L * self.N}")

    @property
    def M(self) -> int:
        return int(round(self.L * self.N))

    @property
    def dx(self) -> float:
        return 1.0 / self.N

    @cached_property
    def x(self) -> np.ndarray:
        return (np.arange(self.M) + 0.5) * self.dx

    @property
    def faces(self) -> np.ndarray:
        return np.arange(self.M + 1) * self.dx

    def check(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape != (self.M,):
            raise GridMismatch(f"field has shape {u.shape}, grid expects ({self.M},)")
        return u

    def mean(self, u) -> float:
        return float(np.mean(self.check(u)))

    def mass(self, u) -> float:
        return float(np.sum(self.check(u)) * self.dx)
