"""
Holistic finite-difference model for Burgers' equation and its fixed-step RK4 integrator.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np
import pandas as pd

from holifd.core.subgrid import ModelParams
from holifd.exceptions import BlowUpError, ConfigError, StabilityError

log = logging.getLogger(__name__)

Observer = Callable[[float, np.ndarray], None]


def mu_delta(f: np.ndarray) -> np.ndarray:
    return (np.roll(f, -1) - np.roll(f, 1)) / 2


def delta2(f: np.ndarray) -> np.ndarray:
    return np.roll(f, -1) - 2 * f + np.roll(f, 1)


def holistic_rhs(u: np.ndarray, p: ModelParams) -> np.ndarray:
    """du_j/dt = d2 u_j/h^2 - (a/2h) md u_j^2 + (a^2/16)(d2 u_j^3 - u_j^2 d2 u_j)"""
    u = np.asarray(u, dtype=float)
    rhs = delta2(u) / p.h ** 2
    if p.a:
        rhs = rhs - p.a / (2 * p.h) * mu_delta(u ** 2)
        rhs = rhs + p.a ** 2 / 16 * (delta2(u ** 3) - u ** 2 * delta2(u))
    return rhs


@dataclass(frozen=True)
class IntegrationConfig:
    dt: float
    T: float
    stepper: str = "rk4"
    allow_unstable: bool = False
    snapshot_every: int = 1

    def validate(self, h: float):
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if self.T < 0:
            raise ConfigError(f"T must be non-negative, got {self.T}")
        if self.stepper != "rk4":
            raise ConfigError(f"Only the rk4 stepper is available, got {self.stepper!r}")
        cap = stability_cap(h)
        if self.dt > cap:
            if not self.allow_unstable:
                raise StabilityError(f"dt={self.dt} exceeds the stability cap h^2/4={cap}")
            log.warning(f"dt={self.dt} exceeds the stability cap {cap}; continuing on override")


def stability_cap(h: float) -> float:
    return h ** 2 / 4


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def to_frame(self) -> pd.DataFrame:
        columns = [f"u_{j}" for j in range(self.states.shape[1])]
        frame = pd.DataFrame(self.states, columns=columns)
        frame.insert(0, "t", self.times)
        return frame


def rk4_step(f: Callable[[np.ndarray], np.ndarray], u: np.ndarray, dt: float) -> np.ndarray:
    k1 = f(u)
    k2 = f(u + dt / 2 * k1)
    k3 = f(u + dt / 2 * k2)
    k4 = f(u + dt * k3)
    return u + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def step_sizes(dt: float, T: float) -> List[float]:
    """Fixed steps of size dt; the final step is shortened to land on T"""
    n = math.ceil(T / dt - 1e-9)
    sizes = [dt] * n
    if n:
        sizes[-1] = T - dt * (n - 1)
    return sizes


def integrate(
    u0: np.ndarray,
    p: ModelParams,
    cfg: IntegrationConfig,
    observer: Optional[Observer] = None,
) -> Trajectory:
    cfg.validate(p.h)
    u = np.array(u0, dtype=float)
    t = 0.0
    times, states = [t], [u.copy()]
    if observer:
        observer(t, u)
    sizes = step_sizes(cfg.dt, cfg.T)
    log.info(f"Integrating {len(sizes)} RK4 steps of dt={cfg.dt} to T={cfg.T}")
    rhs = lambda v: holistic_rhs(v, p)  # noqa: E731
    for step, dt in enumerate(sizes, start=1):
        u = rk4_step(rhs, u, dt)
        t = min(cfg.dt * step, cfg.T)
        if not np.all(np.isfinite(u)):
            raise BlowUpError(f"Non-finite state at t={t} (step {step}); a*h may be too large", t=t, step=step)
        if observer:
            observer(t, u)
        if step % cfg.snapshot_every == 0 or step == len(sizes):
            times.append(t)
            states.append(u.copy())
    return Trajectory(np.array(times), np.array(states))
