"""
Periodic element lattice shared by every other module.

Element ``j`` occupies ``[x_j - h/2, x_j + h/2)`` with ``x_j = origin + j*h`` and the
local coordinate ``xi = (x - x_j)/h`` ranges over ``[-1/2, 1/2)``.
"""
import math
from dataclasses import dataclass, field
from typing import Tuple, Union

import numpy as np

from holifd.exceptions import ConfigError, DomainError, GridMismatchError

Scalar = Union[int, float]

MIN_ELEMENTS = 4


@dataclass(frozen=True)
class Grid:
    m: int
    h: Scalar = 1.0
    origin: Scalar = 0.0

    def __post_init__(self):
        if int(self.m) != self.m or self.m < MIN_ELEMENTS:
            raise ConfigError(f"Grid needs at least {MIN_ELEMENTS} elements, got m={self.m}")
        if not self.h > 0:
            raise ConfigError(f"Element width must be positive, got h={self.h}")

    @property
    def length(self) -> Scalar:
        return self.m * self.h

    def centre(self, j: int) -> Scalar:
        return self.origin + j * self.h

    def centres(self) -> np.ndarray:
        return self.origin + self.h * np.arange(self.m, dtype=float)

    def wrap(self, j: int) -> int:
        return j % self.m

    def offset(self, j: int, k: int) -> int:
        """Signed minimal-image distance (in elements) from element k to element j"""
        d = (j - k) % self.m
        return d - self.m if d >= self.m / 2 else d

    def locate(self, x: float) -> Tuple[int, float]:
        if not math.isfinite(x):
            raise DomainError(f"Cannot locate non-finite coordinate {x}")
        s = (x - self.origin) / self.h + 0.5
        j = math.floor(s)
        xi = s - j - 0.5
        return self.wrap(j), xi

    def locate_many(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        s = (np.asarray(x, dtype=float) - self.origin) / self.h + 0.5
        j = np.floor(s)
        return (j.astype(int) % self.m), s - j - 0.5

    def check_same(self, other: "Grid"):
        if (self.m, self.h, self.origin) != (other.m, other.h, other.origin):
            raise GridMismatchError(f"Grid mismatch: {self} vs {other}")


@dataclass(frozen=True)
class GridState:
    """The m model amplitudes u_j on a grid"""

    grid: Grid
    u: np.ndarray = field(repr=False)

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        if u.shape != (self.grid.m,):
            raise DomainError(f"State needs exactly {self.grid.m} amplitudes, got shape {u.shape}")
        if not np.all(np.isfinite(u)):
            raise DomainError("State contains non-finite amplitudes")
        u.setflags(write=False)
        object.__setattr__(self, "u", u)

    def __len__(self):
        return self.grid.m

    def __getitem__(self, j: int) -> float:
        return float(self.u[self.grid.wrap(j)])

    def mass(self) -> float:
        return float(self.grid.h * np.sum(self.u))
