"""
Moments, conservation checks, residual-order estimates and model-vs-reference error
tables.
"""
import logging
from dataclasses import dataclass, field
from math import comb
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from numpy.polynomial.legendre import leggauss

from holifd.core.grid import Grid, GridState
from holifd.core.model import IntegrationConfig, holistic_rhs, integrate
from holifd.core.polyfield import xi_moment
from holifd.core.projector import DEFAULT_QUADRATURE_ORDER, InitialField, PointMasses, element_average, project
from holifd.core.reference import DEFAULT_FINE_FACTOR, FineSolution, reference_solve
from holifd.core.subgrid import DEGREE, ModelParams, evaluate_at, subgrid_coefficients, tangent_coefficients
from holifd.exceptions import ConfigError

log = logging.getLogger(__name__)

ANTIPODE_TOLERANCE = 1e-8
DEFAULT_WINDOW = (0.2, 2.0)

SUP = "sup"
ELEMENT_MEAN = "element_mean"
RESIDUAL_NORMS = (SUP, ELEMENT_MEAN)

NAIVE = "naive"
AVERAGE = "average"
PROJECTION = "projection"
STRATEGIES = (NAIVE, AVERAGE, PROJECTION)

MASS_ERROR = "dm0"
MOMENT_ERRORS = (MASS_ERROR, "dm1", "dm2")
ORDER_QUANTITIES = ("error",) + MOMENT_ERRORS
COMPARE_COLUMNS = ["strategy", "m", "h", "error", "m0", "m1", "m2", *MOMENT_ERRORS]
# moment errors at or below this are round-off
EXACT_MOMENT = 1e-10


def moments(u: GridState, p: ModelParams, k: int = 0, pmax: int = 2) -> np.ndarray:
    """
    m_n = integral of (x - x_k)^n v(u, x) dx for n = 0..pmax, integrated exactly per
    element with periodic images unwrapped to the minimal distance from x_k.
    """
    grid = u.grid
    coeffs = subgrid_coefficients(u.u, p)
    _warn_if_not_localised(u, p, k, coeffs)
    d = np.array([grid.offset(j, k) for j in range(grid.m)], dtype=float)
    # I[n] = integral of xi**n over the element
    integrals = np.array([xi_moment(n) for n in range(pmax + DEGREE + 1)])
    out = np.zeros(pmax + 1)
    for n in range(pmax + 1):
        total = 0.0
        for r in range(n + 1):
            inner = coeffs @ integrals[r : r + DEGREE + 1]
            total += comb(n, r) * np.sum(d ** (n - r) * inner)
        out[n] = grid.h ** (n + 1) * total
    return out


def _warn_if_not_localised(u: GridState, p: ModelParams, k: int, coeffs: np.ndarray):
    grid = u.grid
    peak = float(np.max(np.abs(coeffs).sum(axis=1)))
    antipode = abs(float(evaluate_at(u.u, p, grid, np.array([grid.centre(k) + grid.length / 2]))[0]))
    if peak and antipode > ANTIPODE_TOLERANCE * peak:
        log.warning(
            f"Field is not localised about element {k}: |v| at the antipode is {antipode:.3g} "
            f"against a maximum of {peak:.3g}; moments depend on the periodic unwrapping"
        )


@dataclass
class MomentReport:
    times: np.ndarray
    m0: np.ndarray
    m1: np.ndarray
    m2: np.ndarray
    window: Tuple[float, float]
    slope: float

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"t": self.times, "m0": self.m0, "m1": self.m1, "m2": self.m2})


def fit_slope(times: np.ndarray, values: np.ndarray, window: Tuple[float, float]) -> float:
    start, stop = window
    mask = (times >= start - 1e-12) & (times <= stop + 1e-12)
    if mask.sum() < 2:
        raise ConfigError(f"Fitting window {window} holds fewer than two snapshots")
    slope, _ = np.polyfit(times[mask], values[mask], 1)
    return float(slope)


def moment_evolution(
    u0: GridState,
    p: ModelParams,
    cfg: IntegrationConfig,
    k: int = 0,
    window: Optional[Tuple[float, float]] = None,
) -> MomentReport:
    window = tuple(window or (DEFAULT_WINDOW[0], cfg.T))
    trajectory = integrate(u0.u, p, cfg)
    values = np.array([moments(GridState(u0.grid, state), p, k) for state in trajectory.states])
    slope = fit_slope(trajectory.times, values[:, 2], window)
    log.info(f"Fitted dm2/dt = {slope:.6f} over t in {window}")
    return MomentReport(trajectory.times, values[:, 0], values[:, 1], values[:, 2], window, slope)


def pde_residual(
    u: GridState,
    p: ModelParams,
    samples: int = 32,
    norm: str = SUP,
    elements: Optional[Iterable[int]] = None,
) -> float:
    """
    Residual v_t - v_xx + a v v_x of the reconstructed field, with v_t = sum_i e_i du_i/dt
    from the model. ``sup`` samples element interiors (edges excluded); ``element_mean``
    takes the largest element average, integrated by Gauss-Legendre quadrature.
    """
    if p.gamma != 1:
        raise ConfigError(f"The PDE residual is only meaningful at gamma = 1, got {p.gamma}")
    if norm not in RESIDUAL_NORMS:
        raise ConfigError(f"Unknown residual norm {norm!r}; expected one of {RESIDUAL_NORMS}")
    grid = u.grid
    coeffs = subgrid_coefficients(u.u, p)
    d_left, d_centre, d_right = tangent_coefficients(u.u, p)
    du = holistic_rhs(u.u, p)
    v_t = d_left * np.roll(du, 1)[:, None] + d_centre * du[:, None] + d_right * np.roll(du, -1)[:, None]

    if norm == SUP:
        xi = -0.5 + (np.arange(samples) + 0.5) / samples
        weights = None
    else:
        nodes, w = leggauss(max(samples, DEGREE + 4))
        xi, weights = nodes / 2, w / 2
    powers = xi[None, :] ** np.arange(DEGREE + 1)[:, None]
    n = np.arange(DEGREE + 1)[:, None]
    d1 = n * xi[None, :] ** np.maximum(n - 1, 0)
    d2 = n * (n - 1) * xi[None, :] ** np.maximum(n - 2, 0)

    v = coeffs @ powers
    v_x = coeffs @ d1 / grid.h
    v_xx = coeffs @ d2 / grid.h ** 2
    residual = v_t @ powers - v_xx + p.a * v * v_x

    rows = sorted({grid.wrap(j) for j in elements}) if elements is not None else range(grid.m)
    residual = residual[list(rows)]
    if norm == SUP:
        return float(np.max(np.abs(residual)))
    return float(np.max(np.abs(residual @ weights)))


def observed_orders(hs: Sequence[float], errors: Sequence[float]) -> Dict[str, object]:
    """Per-step orders between consecutive refinements and the least-squares log-log slope"""
    hs, errors = np.asarray(hs, dtype=float), np.asarray(errors, dtype=float)
    if len(hs) != len(errors) or len(hs) < 2:
        raise ConfigError("Need at least two (h, error) pairs of equal length")
    if np.any(errors <= 0):
        raise ConfigError("Errors must be positive to estimate an order")
    steps = np.log(errors[:-1] / errors[1:]) / np.log(hs[:-1] / hs[1:])
    fitted, _ = np.polyfit(np.log(hs), np.log(errors), 1)
    return {"steps": steps.tolist(), "fitted": float(fitted)}


@dataclass(frozen=True)
class ComparisonConfig:
    """
    A resolution sweep at fixed domain length. Moments are taken about ``centre``; by
    default that is the centroid of the initial field.
    """

    length: float
    sweep: Tuple[int, ...]
    T: float
    dt_fraction: float = 1 / 8
    fine_factor: int = DEFAULT_FINE_FACTOR
    origin: float = 0.0
    centre: Optional[float] = None
    strategies: Tuple[str, ...] = field(default=STRATEGIES)

    def __post_init__(self):
        if not self.sweep:
            raise ConfigError("The resolution sweep is empty")
        unknown = set(self.strategies) - set(STRATEGIES)
        if unknown:
            raise ConfigError(f"Unknown initial-condition strategies {sorted(unknown)}")
        if not 0 < self.dt_fraction <= 0.25:
            raise ConfigError(f"dt_fraction must lie in (0, 1/4], got {self.dt_fraction}")

    def grid(self, m: int) -> Grid:
        return Grid(m=m, h=self.length / m, origin=self.origin)

    @property
    def finest(self) -> Grid:
        return self.grid(max(self.sweep))


def initial_state(strategy: str, u0: InitialField, p: ModelParams, grid: Grid) -> GridState:
    if strategy == NAIVE:
        return GridState(grid, u0.sample(grid.centres(), grid))
    if strategy == AVERAGE:
        return element_average(u0, grid)
    if strategy == PROJECTION:
        return project(u0, p, grid)
    raise ConfigError(f"Unknown initial-condition strategy {strategy!r}")


def comparison_field(u0: InitialField, cfg: ComparisonConfig, source: Optional[Grid] = None) -> InitialField:
    """
    The one field the reference and every strategy start from. Point masses are placed by
    their element indices on ``source`` (default: the finest grid) and mollified once at
    the finest resolution, with quadrature that resolves them on the coarsest grid.
    """
    if not isinstance(u0, PointMasses):
        return u0
    finest = cfg.finest
    if source is not None:
        u0 = u0.relocated(source, finest)
    nodes = 4 * DEFAULT_QUADRATURE_ORDER * max(cfg.sweep) // min(cfg.sweep)
    return u0.mollified(finest, quadrature_order=nodes)


def comparison_reference(u0: InitialField, p: ModelParams, cfg: ComparisonConfig) -> FineSolution:
    return reference_solve(u0, p.a, cfg.finest, T=cfg.T, fine_factor=cfg.fine_factor)


def compare_at_resolution(
    m: int,
    u0: InitialField,
    p: ModelParams,
    cfg: ComparisonConfig,
    reference: FineSolution,
    centre: float,
) -> List[Dict]:
    grid = cfg.grid(m)
    params = ModelParams(a=p.a, gamma=p.gamma, h=grid.h)
    k, _ = grid.locate(centre)
    exact = u0.moments(grid, k)
    target = reference.final
    rows = []
    for strategy in cfg.strategies:
        state = initial_state(strategy, u0, params, grid)
        trajectory = integrate(state.u, params, IntegrationConfig(dt=cfg.dt_fraction * grid.h ** 2, T=cfg.T))
        v = evaluate_at(trajectory.final, params, grid, reference.x)
        error = float(np.sqrt(reference.dx * np.sum((v - target) ** 2)))
        measured = moments(state, params, k)
        row = {"strategy": strategy, "m": m, "h": grid.h, "error": error}
        row.update({f"m{n}": measured[n] for n in range(3)})
        row.update({f"dm{n}": abs(measured[n] - exact[n]) for n in range(3)})
        rows.append(row)
    log.info(f"Compared {len(rows)} strategies at m={m}")
    return rows


def compare_ic_strategies(
    u0: InitialField,
    p: ModelParams,
    cfg: ComparisonConfig,
    mapper: Callable = map,
    source: Optional[Grid] = None,
) -> pd.DataFrame:
    """
    Integrate the model from each initial-condition strategy over a resolution sweep at
    fixed domain length and measure the L2 distance of v(u(T), x) to one fine reference
    solution. Moment columns m0..m2 are those of v(u(0), x) about the element holding
    ``cfg.centre``; dm0..dm2 are their distances to the moments of the initial field.
    ``mapper`` runs the sweep entries; results keep the sweep order.
    """
    u0 = comparison_field(u0, cfg, source)
    centre = cfg.centre if cfg.centre is not None else u0.centre_of_mass(cfg.finest)
    log.info(f"Moments are taken about the element holding x={centre:g}")
    reference = comparison_reference(u0, p, cfg)
    chunks = mapper(lambda m: compare_at_resolution(m, u0, p, cfg, reference, centre), list(cfg.sweep))
    rows = [row for chunk in chunks for row in chunk]
    return pd.DataFrame(rows, columns=COMPARE_COLUMNS)


def convergence_orders(table: pd.DataFrame, quantities: Sequence[str] = ORDER_QUANTITIES) -> pd.DataFrame:
    """
    Fitted order of every error column of a comparison table, per strategy. A column at
    round-off on every grid is exact and gets an infinite order; single round-off entries
    are floored at EXACT_MOMENT.
    """
    rows = []
    for strategy, group in table.groupby("strategy", sort=False):
        group = group.sort_values("h", ascending=False)
        if len(group) < 2:
            continue
        for quantity in quantities:
            errors = group[quantity].to_numpy(dtype=float)
            if np.all(errors <= EXACT_MOMENT):
                steps, fitted = [np.inf] * (len(errors) - 1), np.inf
            else:
                result = observed_orders(group["h"].tolist(), np.maximum(errors, EXACT_MOMENT))
                steps, fitted = result["steps"], result["fitted"]
            rows.append(
                {"strategy": strategy, "quantity": quantity, "fitted": fitted, "steps": " ".join(f"{s:.4f}" for s in steps)}
            )
    return pd.DataFrame(rows, columns=["strategy", "quantity", "fitted", "steps"])


def order_gap(orders: pd.DataFrame, quantity: str = MASS_ERROR, worse: str = NAIVE, better: str = PROJECTION) -> float:
    """How many orders faster ``better`` converges than ``worse``; nan when both are exact"""
    fitted = orders[orders["quantity"] == quantity].set_index("strategy")["fitted"]
    return float(fitted[better] - fitted[worse])
