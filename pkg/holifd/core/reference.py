"""
Fine-grid method-of-lines solver for u_t = u_xx - a u u_x, used as the ground truth the
holistic model is measured against.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from holifd.core.grid import Grid
from holifd.core.model import rk4_step, step_sizes
from holifd.core.projector import InitialField
from holifd.exceptions import BlowUpError, ConfigError, StabilityError

log = logging.getLogger(__name__)

DEFAULT_FINE_FACTOR = 64
DT_FRACTION = 0.25
STABILITY_FRACTION = 0.5

SAMPLE = "sample"
AVERAGE = "average"
RESTRICT_MODES = (SAMPLE, AVERAGE)


def fine_coordinates(grid: Grid, fine_factor: int) -> np.ndarray:
    """Fine vertices x_i = origin - h/2 + i dx, so element edges are fine vertices"""
    dx = grid.h / fine_factor
    return grid.origin - grid.h / 2 + dx * np.arange(grid.m * fine_factor)


def burgers_rhs(u: np.ndarray, a: float, dx: float) -> np.ndarray:
    """Central diffusion with the conservative form of the advection term"""
    up, um = np.roll(u, -1), np.roll(u, 1)
    rhs = (up - 2 * u + um) / dx ** 2
    if a:
        rhs = rhs - a * (up ** 2 - um ** 2) / (4 * dx)
    return rhs


@dataclass
class FineSolution:
    grid: Grid
    fine_factor: int
    x: np.ndarray
    times: np.ndarray
    states: np.ndarray

    @property
    def dx(self) -> float:
        return self.grid.h / self.fine_factor

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def at(self, t: float) -> np.ndarray:
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 1e-9 * max(1.0, abs(t)):
            raise ConfigError(f"No reference snapshot at t={t}; available {self.times.tolist()}")
        return self.states[i]

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.states.T, columns=[f"t={t:g}" for t in self.times])
        frame.insert(0, "x", self.x)
        return frame


def reference_solve(
    u0: InitialField,
    a: float,
    grid: Grid,
    T: float,
    fine_factor: int = DEFAULT_FINE_FACTOR,
    dt: Optional[float] = None,
    times: Optional[Sequence[float]] = None,
) -> FineSolution:
    """
    RK4 in time on m * fine_factor vertices. Point masses are replaced by their mollified
    form before sampling. Snapshots are kept at ``times`` (default: only 0 and T).
    """
    if fine_factor < 2 or fine_factor % 2:
        raise ConfigError(f"fine_factor must be an even integer >= 2, got {fine_factor}")
    x = fine_coordinates(grid, fine_factor)
    dx = grid.h / fine_factor
    dt = DT_FRACTION * dx ** 2 if dt is None else dt
    if dt > STABILITY_FRACTION * dx ** 2:
        raise StabilityError(f"Reference dt={dt} exceeds {STABILITY_FRACTION} dx^2={STABILITY_FRACTION * dx ** 2}")
    wanted = sorted(set([0.0, float(T)] + [float(t) for t in (times or [])]))
    if wanted[0] < 0 or wanted[-1] > T:
        raise ConfigError(f"Snapshot times must lie in [0, {T}], got {times}")

    u = u0.mollified(grid).sample(x, grid).astype(float)
    log.info(f"Reference solve on {len(x)} points, dx={dx:g}, dt={dt:g}, T={T}")
    rhs = lambda v: burgers_rhs(v, a, dx)  # noqa: E731
    snapshots, t = [u.copy()], 0.0
    for start, stop in zip(wanted[:-1], wanted[1:]):
        for size in step_sizes(dt, stop - start):
            u = rk4_step(rhs, u, size)
        t = stop
        if not np.all(np.isfinite(u)):
            raise BlowUpError(f"Reference solution became non-finite before t={t}", t=t)
        snapshots.append(u.copy())
    return FineSolution(grid, fine_factor, x, np.array(wanted), np.array(snapshots))


def restrict(values: np.ndarray, grid: Grid, fine_factor: int, mode: str = SAMPLE) -> np.ndarray:
    """
    Map a fine-grid field onto the m elements: ``sample`` takes the value at each
    centre x_j; ``average`` is the trapezoidal element average.
    """
    values = np.asarray(values, dtype=float)
    if values.shape != (grid.m * fine_factor,):
        raise ConfigError(f"Expected {grid.m * fine_factor} fine values, got {values.shape}")
    blocks = values.reshape(grid.m, fine_factor)
    if mode == SAMPLE:
        return blocks[:, fine_factor // 2].copy()
    if mode == AVERAGE:
        right = np.roll(blocks[:, 0], -1)
        return (blocks[:, 0] / 2 + blocks[:, 1:].sum(axis=1) + right / 2) / fine_factor
    raise ConfigError(f"Unknown restriction mode {mode!r}; expected one of {RESTRICT_MODES}")
