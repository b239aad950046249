"""
Subgrid field v(u, x) on the centre manifold and its tangent vectors e_j = dv/du_j.

The series is written once, symbolically, in terms of the amplitudes of the element
and its two neighbours (u_l, u_c, u_r); numerical coefficients, exact coefficients and
the analytic tangent vectors are all derived from that one expression.
Terms are complete through O(gamma, a^2).
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, List, Tuple

import numpy as np
import sympy

from holifd.core.grid import Grid
from holifd.core.polyfield import PiecewiseField, Polynomial
from holifd.exceptions import ConfigError

log = logging.getLogger(__name__)

XI, A, H, GAMMA = sympy.symbols("xi a h gamma")
UL, UC, UR = sympy.symbols("u_l u_c u_r")
NEIGHBOURS = (UL, UC, UR)
DEGREE = 4


@dataclass(frozen=True)
class ModelParams:
    a: float = 0.0
    gamma: float = 1.0
    h: float = 1.0

    def __post_init__(self):
        if not 0 <= self.gamma <= 1:
            raise ConfigError(f"gamma must lie in [0, 1], got {self.gamma}")
        if not self.h > 0:
            raise ConfigError(f"h must be positive, got {self.h}")

    def linear(self) -> "ModelParams":
        return ModelParams(a=0.0, gamma=self.gamma, h=self.h)


def _mu_delta(left, right):
    return (right - left) / 2


def _delta2(left, centre, right):
    return right - 2 * centre + left


@lru_cache()
def subgrid_series() -> sympy.Expr:
    """v on element j as an expression in xi, the local amplitudes and (a, h, gamma)"""
    R = sympy.Rational
    L, C, Rt = UL, UC, UR
    md1, d21 = _mu_delta(L, Rt), _delta2(L, C, Rt)
    md2, d22 = _mu_delta(L ** 2, Rt ** 2), _delta2(L ** 2, C ** 2, Rt ** 2)
    md3, d23 = _mu_delta(L ** 3, Rt ** 3), _delta2(L ** 3, C ** 3, Rt ** 3)
    x = XI
    series = (
        C
        + R(1, 2) * A * H * x * C ** 2
        + R(1, 4) * A ** 2 * H ** 2 * x ** 2 * C ** 3
        + GAMMA * (x * md1 + R(1, 2) * x ** 2 * d21)
        + A * H * GAMMA * (
            -R(1, 8) * x * (C * d21 + d22 + 4 * C ** 2)
            + R(1, 8) * x ** 2 * (2 * C * md1 - md2)
            + R(1, 3) * x ** 2 * C * d21
        )
        + A ** 2 * H ** 2 * GAMMA * (
            R(1, 16) * x * (C * md2 + md3)
            - R(3, 32) * x ** 2 * (3 * C ** 2 * d21 + 2 * C * d22 - d23 + 8 * C ** 3)
            + R(1, 6) * x ** 3 * (2 * C ** 2 * md1 - C * md2)
            + R(5, 24) * x ** 4 * C ** 2 * d21
        )
    )
    return sympy.expand(series)


def _xi_coefficients(expr: sympy.Expr) -> List[sympy.Expr]:
    poly = sympy.Poly(expr, XI)
    return [poly.coeff_monomial(XI ** n) for n in range(DEGREE + 1)]


def _lambdify(exprs: List[sympy.Expr]) -> Callable:
    return sympy.lambdify((UL, UC, UR, A, H, GAMMA), exprs, modules="numpy")


@lru_cache()
def _coefficient_function() -> Callable:
    return _lambdify(_xi_coefficients(subgrid_series()))


@lru_cache()
def _tangent_functions() -> Tuple[Callable, Callable, Callable]:
    """Derivatives of the element coefficients with respect to u_l, u_c, u_r"""
    coeffs = _xi_coefficients(subgrid_series())
    return tuple(_lambdify([sympy.diff(c, var) for c in coeffs]) for var in NEIGHBOURS)


def _stack(values, m: int) -> np.ndarray:
    return np.stack([np.broadcast_to(np.asarray(v, dtype=float), (m,)) for v in values], axis=1)


def _neighbours(u: np.ndarray):
    u = np.asarray(u, dtype=float)
    return np.roll(u, 1), u, np.roll(u, -1)


def subgrid_coefficients(u: np.ndarray, p: ModelParams) -> np.ndarray:
    """(m, 5) array: row j holds the xi-coefficients of v on element j"""
    left, centre, right = _neighbours(u)
    values = _coefficient_function()(left, centre, right, p.a, p.h, p.gamma)
    return _stack(values, len(centre))


def tangent_coefficients(u: np.ndarray, p: ModelParams) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Partial derivatives of every element's coefficients with respect to its left,
    centre and right amplitudes, each an (m, 5) array.
    """
    left, centre, right = _neighbours(u)
    m = len(centre)
    return tuple(
        _stack(fn(left, centre, right, p.a, p.h, p.gamma), m) for fn in _tangent_functions()
    )


def subgrid_field(u: np.ndarray, p: ModelParams, grid: Grid) -> PiecewiseField:
    return PiecewiseField.from_coefficients(grid, subgrid_coefficients(u, p))


def tangent_vector(u: np.ndarray, j: int, p: ModelParams, grid: Grid) -> PiecewiseField:
    """
    e_j = dv/du_j. u_j is the right neighbour of element j-1, the centre of
    element j and the left neighbour of element j+1.
    """
    d_left, d_centre, d_right = tangent_coefficients(u, p)
    pieces = {
        j - 1: Polynomial(d_right[grid.wrap(j - 1)]),
        j: Polynomial(d_centre[grid.wrap(j)]),
        j + 1: Polynomial(d_left[grid.wrap(j + 1)]),
    }
    return PiecewiseField(grid, pieces, exact=False)


@lru_cache()
def _linear_tangent_pieces() -> Tuple[Tuple[sympy.Expr, ...], ...]:
    """a = 0 tangent pieces on offsets -1, 0, +1 as expressions in (gamma, xi)"""
    series = subgrid_series().subs(A, 0)
    return (
        (-1, sympy.expand(sympy.diff(series, UR))),
        (0, sympy.expand(sympy.diff(series, UC))),
        (1, sympy.expand(sympy.diff(series, UL))),
    )


def tangent_series(grid: Grid, j: int = 0, order: int = 2) -> List[PiecewiseField]:
    """
    Exact gamma-series of e_j at a = 0: element n of the list is the coefficient of
    gamma**n. Terms beyond those present in the subgrid series are zero fields.
    """
    terms = []
    for n in range(order):
        pieces = {}
        for offset, expr in _linear_tangent_pieces():
            coeff = sympy.Poly(expr, GAMMA).coeff_monomial(GAMMA ** n)
            xi_poly = sympy.Poly(coeff, XI).all_coeffs()[::-1]
            pieces[j + offset] = Polynomial([Fraction(str(c)) for c in xi_poly], exact=True)
        terms.append(PiecewiseField(grid, pieces, exact=True))
    return terms


def reconstruct(u: np.ndarray, p: ModelParams, grid: Grid, samples: int = 32) -> Tuple[np.ndarray, np.ndarray]:
    """Dense evaluation of v on a uniform half-open xi-mesh of every element"""
    if samples < 1:
        raise ConfigError(f"samples per element must be positive, got {samples}")
    coeffs = subgrid_coefficients(u, p)
    xi = -0.5 + np.arange(samples) / samples
    powers = xi[None, :] ** np.arange(DEGREE + 1)[:, None]
    values = coeffs @ powers
    x = grid.centres()[:, None] + grid.h * xi[None, :]
    return x.ravel(), values.ravel()


def evaluate_at(u: np.ndarray, p: ModelParams, grid: Grid, x: np.ndarray) -> np.ndarray:
    """v(u, x) at arbitrary coordinates"""
    coeffs = subgrid_coefficients(u, p)
    j, xi = grid.locate_many(x)
    powers = xi[:, None] ** np.arange(DEGREE + 1)[None, :]
    return np.sum(coeffs[j] * powers, axis=1)
