"""
Projection of initial fields onto the holistic discretisation.

The projection vectors z_j are written once symbolically in terms of the amplitudes
u_{j-1}, u_j, u_{j+1}, with one piece per supporting element (offsets -1, 0, +1) in
that element's own local coordinate xi. Terms are complete through O(gamma, a^2).
"""
import logging
import re
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb
from tokenize import TokenError
from typing import Callable, Dict, List, Mapping, Optional, Sequence

import numpy as np
import sympy
from numpy.polynomial.legendre import leggauss
from sympy.core.function import AppliedUndef
from sympy.parsing.sympy_parser import parse_expr

from holifd.core.grid import Grid, GridState
from holifd.core.polyfield import PiecewiseField, Polynomial, inner_product, xi_moment
from holifd.core.subgrid import A, GAMMA, H, UC, UL, UR, XI, ModelParams, subgrid_coefficients, tangent_vector
from holifd.exceptions import ConfigError, ConvergenceError, DomainError

log = logging.getLogger(__name__)

OFFSETS = (-1, 0, 1)
Z_DEGREE = 3
DEFAULT_QUADRATURE_ORDER = 16
MOLLIFIER_WIDTH = 1 / 8


# initial fields


class InitialField(ABC):
    """An initial condition u_0(x), consumed through its per-element xi-moments"""

    @abstractmethod
    def element_moments(self, grid: Grid, pmax: int) -> np.ndarray:
        """(m, pmax+1) array of integrals over [-1/2, 1/2] of xi**p * u_0(x_j + h xi)"""

    @abstractmethod
    def sample(self, x: np.ndarray, grid: Grid) -> np.ndarray:
        """Pointwise values; distributions are replaced by their mollified form"""

    def mollified(self, grid: Grid) -> "InitialField":
        return self

    def element_average(self, grid: Grid) -> np.ndarray:
        return self.element_moments(grid, 0)[:, 0]

    def mass(self, grid: Grid) -> float:
        return float(grid.h * np.sum(self.element_average(grid)))

    def moments(self, grid: Grid, k: int, pmax: int = 2) -> np.ndarray:
        """Integrals of (x - x_k)**n u_0(x) for n = 0..pmax, using minimal-image offsets"""
        xi_moments = self.element_moments(grid, pmax)
        d = np.array([grid.offset(j, k) for j in range(grid.m)], dtype=float)
        out = np.zeros(pmax + 1)
        for n in range(pmax + 1):
            total = sum(comb(n, r) * np.sum(d ** (n - r) * xi_moments[:, r]) for r in range(n + 1))
            out[n] = grid.h ** (n + 1) * total
        return out

    def centroid(self, grid: Grid, k: int) -> float:
        """First moment about x_k divided by the mass"""
        mass, first = self.moments(grid, k, 1)
        return float(first / mass)

    def centre_of_mass(self, grid: Grid) -> float:
        """Absolute centroid, unwrapped about the element holding the largest share of the field"""
        k = int(np.argmax(np.abs(self.element_average(grid))))
        return float(grid.centre(k) + self.centroid(grid, k))


class AnalyticField(InitialField):
    def __init__(self, func: Callable[[np.ndarray], np.ndarray], quadrature_order: int = DEFAULT_QUADRATURE_ORDER, expression: str = None):
        if quadrature_order < 1:
            raise ConfigError(f"quadrature order must be positive, got {quadrature_order}")
        self.func = func
        self.quadrature_order = quadrature_order
        self.expression = expression

    def _evaluate(self, x: np.ndarray) -> np.ndarray:
        values = np.broadcast_to(np.asarray(self.func(x), dtype=float), np.shape(x))
        if not np.all(np.isfinite(values)):
            raise DomainError(f"Analytic initial field {self.expression or self.func} is not finite on the domain")
        return values

    def element_moments(self, grid: Grid, pmax: int) -> np.ndarray:
        nodes, weights = leggauss(self.quadrature_order)
        xi, w = nodes / 2, weights / 2
        x = grid.centres()[:, None] + grid.h * xi[None, :]
        values = self._evaluate(x)
        powers = xi[:, None] ** np.arange(pmax + 1)[None, :]
        return (values * w[None, :]) @ powers

    def sample(self, x: np.ndarray, grid: Grid) -> np.ndarray:
        return self._evaluate(np.asarray(x, dtype=float))


class PiecewiseInitialField(InitialField):
    def __init__(self, field: PiecewiseField):
        self.field = field

    def element_moments(self, grid: Grid, pmax: int) -> np.ndarray:
        return self.field.element_moments(grid, pmax)

    def sample(self, x: np.ndarray, grid: Grid) -> np.ndarray:
        return self.field.sample(x)


def check_eta(eta: float):
    if not -0.5 <= eta <= 0.5:
        raise DomainError(f"Point mass offset eta={eta} outside [-1/2, 1/2]")


@dataclass(frozen=True)
class PointMass:
    k: int
    eta: float
    w: float = 1.0

    def __post_init__(self):
        check_eta(self.eta)


class PointMasses(InitialField):
    """Finite sum of w * delta(x - x_k - h eta)"""

    def __init__(self, points: Sequence[PointMass], width: float = MOLLIFIER_WIDTH):
        self.points = tuple(points)
        self.width = width

    def element_moments(self, grid: Grid, pmax: int) -> np.ndarray:
        out = np.zeros((grid.m, pmax + 1))
        for point in self.points:
            out[grid.wrap(point.k)] += point.w / grid.h * point.eta ** np.arange(pmax + 1)
        return out

    def mollified(self, grid: Grid, quadrature_order: Optional[int] = None) -> AnalyticField:
        """Gaussians of standard deviation ``width * h``"""
        sigma = self.width * grid.h
        centres = [(grid.centre(pt.k) + grid.h * pt.eta, pt.w) for pt in self.points]
        length = grid.length

        def gaussian_sum(x):
            x = np.asarray(x, dtype=float)
            total = np.zeros_like(x)
            for centre, w in centres:
                d = (x - centre + length / 2) % length - length / 2
                total = total + w * np.exp(-0.5 * (d / sigma) ** 2) / (sigma * np.sqrt(2 * np.pi))
            return total

        order = quadrature_order or 4 * DEFAULT_QUADRATURE_ORDER
        return AnalyticField(gaussian_sum, quadrature_order=order, expression="mollified point masses")

    def relocated(self, source: Grid, target: Grid) -> "PointMasses":
        """The same physical point masses with element indices taken on another grid"""
        points = []
        for pt in self.points:
            k, xi = target.locate(source.centre(pt.k) + source.h * pt.eta)
            points.append(PointMass(k, float(xi), pt.w))
        return PointMasses(points, self.width)

    def sample(self, x: np.ndarray, grid: Grid) -> np.ndarray:
        return self.mollified(grid).sample(x, grid)


EXPRESSION_FUNCTIONS = ("sin", "cos", "tan", "sinh", "cosh", "tanh", "exp", "log", "sqrt", "Abs", "Heaviside", "Min", "Max", "pi", "E")
# dunders and attribute access never appear in a field expression
_UNSAFE_EXPRESSION = re.compile(r"__|[A-Za-z_)\]]\s*\.")


def parse_expression(text: str) -> sympy.Expr:
    """A field expression in x, L and h, parsed without access to Python builtins"""
    x, length, h = sympy.symbols("x L h")
    if _UNSAFE_EXPRESSION.search(text):
        raise ConfigError(f"Invalid analytic expression {text!r}: attribute access is not allowed")
    global_dict = {"__builtins__": {}, **{name: getattr(sympy, name) for name in EXPRESSION_FUNCTIONS}}
    global_dict.update(Symbol=sympy.Symbol, Function=sympy.Function, Integer=sympy.Integer, Float=sympy.Float, Rational=sympy.Rational, abs=sympy.Abs)
    try:
        expr = parse_expr(text, local_dict={"x": x, "L": length, "h": h}, global_dict=global_dict)
    except (SyntaxError, TokenError, TypeError, ValueError, AttributeError, NameError, sympy.SympifyError) as ex:
        raise ConfigError(f"Invalid analytic expression {text!r}: {ex}")
    if not isinstance(expr, sympy.Expr) or not expr.free_symbols <= {x, length, h}:
        raise ConfigError(f"Analytic expression {text!r} must be a formula in x, L and h")
    undefined = expr.atoms(AppliedUndef)
    if undefined:
        raise ConfigError(f"Analytic expression {text!r} calls unknown functions {sorted(map(str, undefined))}")
    return expr


def initial_field_from_spec(spec: Mapping, grid: Grid) -> InitialField:
    """
    Build an initial field from its JSON form:
      {"kind": "analytic", "expression": "sin(2*pi*x/L)", "quadrature_order": 16}
      {"kind": "piecewise", "pieces": {"3": ["1", "0", "-4"]}}
      {"kind": "points", "points": [{"k": 3, "eta": 0.25, "w": 1}]}
    Expressions may use x, L (domain length), h, pi and the functions in EXPRESSION_FUNCTIONS.
    """
    kind = spec.get("kind")
    if kind == "analytic":
        if "expression" not in spec:
            raise ConfigError(f"An analytic initial field needs an expression, got {spec}")
        x, length, h = sympy.symbols("x L h")
        expr = parse_expression(str(spec["expression"]))
        expr = expr.subs({length: grid.length, h: grid.h})
        func = sympy.lambdify(x, expr, modules="numpy")
        return AnalyticField(func, int(spec.get("quadrature_order", DEFAULT_QUADRATURE_ORDER)), str(spec["expression"]))
    if kind == "piecewise":
        data = {"exact": spec.get("exact", False), "pieces": spec.get("pieces", {})}
        return PiecewiseInitialField(PiecewiseField.from_dict(data, grid))
    if kind == "points":
        points = [PointMass(int(pt["k"]), float(pt.get("eta", 0.0)), float(pt.get("w", 1.0))) for pt in spec.get("points", [])]
        if not points:
            raise ConfigError("A points initial field needs at least one point mass")
        return PointMasses(points)
    raise ConfigError(f"Unknown initial field kind {kind!r}; expected analytic, piecewise or points")


# projection vectors


@lru_cache()
def projector_series() -> Dict[int, sympy.Expr]:
    """Pieces of z_j on elements j-1, j, j+1 as expressions in the local xi of each element"""
    R = sympy.Rational
    L, C, Rt, x = UL, UC, UR, XI
    head = {
        0: 1 - H ** 2 * A ** 2 * C ** 2 / 16,
        -1: 0,
        1: 0,
    }
    diffusive = {
        0: R(1, 6) - x ** 2,
        -1: -R(1, 12) + x / 2 + x ** 2 / 2,
        1: -R(1, 12) - x / 2 + x ** 2 / 2,
    }
    advective = {
        0: -(12 * x - 16 * x ** 3) * C + Rt - L,
        -1: C - (3 - 6 * x + 8 * x ** 3) * L,
        1: -C + (3 + 6 * x - 8 * x ** 3) * Rt,
    }
    quadratic = {
        0: 8 * (1 + 3 * x ** 2) * C ** 2 + 4 * C * (Rt + L) + 2 * (Rt ** 2 + L ** 2),
        -1: 3 * C ** 2 + 4 * C * L - (5 + 12 * x ** 2 + 16 * x ** 3) * L ** 2,
        1: 3 * C ** 2 + 4 * C * Rt - (5 + 12 * x ** 2 - 16 * x ** 3) * Rt ** 2,
    }
    return {
        off: sympy.expand(
            head[off]
            + GAMMA * diffusive[off]
            + H * A * GAMMA / 48 * advective[off]
            + H ** 2 * A ** 2 * GAMMA / 384 * quadratic[off]
        )
        for off in OFFSETS
    }


@lru_cache()
def advective_series() -> Dict[int, sympy.Expr]:
    """O(ha) modification of the diffusive projector, in its constant-field-friendly form"""
    L, C, Rt, x = UL, UC, UR, XI
    block = {
        0: (-12 * x + 16 * x ** 3) * C + Rt - L,
        -1: C + (-3 + 6 * x - 8 * x ** 3) * L,
        1: -C + (3 + 6 * x - 8 * x ** 3) * Rt,
    }
    return {off: sympy.expand(H * A / 48 * block[off]) for off in OFFSETS}


def _coefficient_function(series: Dict[int, sympy.Expr]) -> Callable:
    exprs = []
    for off in OFFSETS:
        poly = sympy.Poly(series[off], XI)
        exprs.extend(poly.coeff_monomial(XI ** n) for n in range(Z_DEGREE + 1))
    return sympy.lambdify((UL, UC, UR, A, H, GAMMA), exprs, modules="numpy")


@lru_cache()
def _projector_function() -> Callable:
    return _coefficient_function(projector_series())


@lru_cache()
def _advective_function() -> Callable:
    return _coefficient_function(advective_series())


def _evaluate_coefficients(fn: Callable, u: np.ndarray, p: ModelParams) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    m = len(u)
    values = fn(np.roll(u, 1), u, np.roll(u, -1), p.a, p.h, p.gamma)
    flat = np.stack([np.broadcast_to(np.asarray(v, dtype=float), (m,)) for v in values], axis=1)
    return flat.reshape(m, len(OFFSETS), Z_DEGREE + 1)


@dataclass
class ProjectorSet:
    """
    Projection vectors z_j for every j. coefficients[j, i, n] is the xi**n coefficient
    of z_j on element j + OFFSETS[i].
    """

    grid: Grid
    params: ModelParams
    state: np.ndarray = field(repr=False)
    coefficients: np.ndarray = field(repr=False)

    def vector(self, j: int) -> PiecewiseField:
        j = self.grid.wrap(j)
        pieces = {j + off: Polynomial(self.coefficients[j, i]) for i, off in enumerate(OFFSETS)}
        return PiecewiseField(self.grid, pieces, exact=False)

    def vectors(self) -> List[PiecewiseField]:
        return [self.vector(j) for j in range(self.grid.m)]

    def pair(self, moments: np.ndarray) -> np.ndarray:
        """<z_j, u> for all j, given the (m, >=4) xi-moments of u per element"""
        out = np.zeros(self.grid.m)
        for i, off in enumerate(OFFSETS):
            shifted = np.roll(moments[:, : Z_DEGREE + 1], -off, axis=0)
            out += np.sum(self.coefficients[:, i, :] * shifted, axis=1)
        return out

    def partition(self, x: np.ndarray) -> np.ndarray:
        """sum_j z_j(x)"""
        j, xi = self.grid.locate_many(x)
        powers = xi[:, None] ** np.arange(Z_DEGREE + 1)[None, :]
        total = np.zeros(len(j))
        for i, off in enumerate(OFFSETS):
            owner = (j - off) % self.grid.m
            total += np.sum(self.coefficients[owner, i, :] * powers, axis=1)
        return total


def projection_vectors(u: np.ndarray, p: ModelParams, grid: Grid) -> ProjectorSet:
    coeffs = _evaluate_coefficients(_projector_function(), u, p)
    return ProjectorSet(grid, p, np.asarray(u, dtype=float), coeffs)


def advective_correction(u: np.ndarray, p: ModelParams, grid: Grid) -> ProjectorSet:
    coeffs = _evaluate_coefficients(_advective_function(), u, p)
    return ProjectorSet(grid, p, np.asarray(u, dtype=float), coeffs)


def subgrid_moments(u: np.ndarray, p: ModelParams, pmax: int = Z_DEGREE) -> np.ndarray:
    """xi-moments of the reconstructed field v(u) on every element"""
    coeffs = subgrid_coefficients(u, p)
    table = np.array([[xi_moment(q + n) for n in range(pmax + 1)] for q in range(coeffs.shape[1])])
    return coeffs @ table


def normalization_matrix(u: np.ndarray, p: ModelParams, grid: Grid) -> np.ndarray:
    """N[j, i] = <z_j, e_i> at state u"""
    zs = projection_vectors(u, p, grid)
    tangents = [tangent_vector(u, i, p, grid) for i in range(grid.m)]
    return np.array([[inner_product(zs.vector(j), e) for e in tangents] for j in range(grid.m)])


# projection operations


def element_average(u0: InitialField, grid: Grid) -> GridState:
    return GridState(grid, u0.element_average(grid))


def project_linear(u0: InitialField, p: ModelParams, grid: Grid) -> GridState:
    if p.a != 0:
        raise ConfigError(f"project_linear needs a = 0, got a={p.a}")
    zs = projection_vectors(np.zeros(grid.m), p, grid)
    return GridState(grid, zs.pair(u0.element_moments(grid, Z_DEGREE)))


def project(
    u0: InitialField,
    p: ModelParams,
    grid: Grid,
    tol: float = 1e-12,
    max_iter: int = 50,
    normalization: str = "truncated",
) -> GridState:
    """
    Solve <z_j(u), u_0 - v(u)> = 0 by fixed-point iteration from the element averages.

    With ``normalization="truncated"`` the O(gamma^2) defect of the a = 0 normalization
    <z_j, e_i> = delta_ij is dropped, consistently with the truncation of z and v; at
    a = 0 the fixed point is then exactly ``project_linear``. ``"raw"`` iterates the
    orthogonality condition as it stands.
    """
    if normalization not in ("truncated", "raw"):
        raise ConfigError(f"Unknown normalization mode {normalization!r}")
    target = u0.element_moments(grid, Z_DEGREE)
    u = u0.element_average(grid).copy()
    linear = p.linear()
    residual = np.inf
    for iteration in range(1, max_iter + 1):
        zs = projection_vectors(u, p, grid)
        update = zs.pair(target) - zs.pair(subgrid_moments(u, p))
        if normalization == "truncated":
            z_lin = projection_vectors(u, linear, grid)
            update += z_lin.pair(subgrid_moments(u, linear)) - u
        u = u + update
        residual = float(np.max(np.abs(update)))
        log.debug(f"projection iteration {iteration}: max update {residual:.3e}")
        if not np.all(np.isfinite(u)):
            break
        if residual <= tol:
            log.info(f"Projection converged after {iteration} iterations")
            return GridState(grid, u)
    raise ConvergenceError(
        f"Projection did not converge in {max_iter} iterations (last update {residual:.3e}); a*h may be too large",
        last_iterate=u,
        residual=residual,
    )


def point_release_ic(k: int, eta: float, w: float, p: ModelParams, grid: Grid) -> GridState:
    """Amplitudes for a point mass w at x_k + h eta, from the diffusive projector at gamma = 1"""
    if p.a != 0 or p.gamma != 1:
        raise ConfigError(f"point_release_ic needs a = 0 and gamma = 1, got a={p.a}, gamma={p.gamma}")
    check_eta(eta)
    u = np.zeros(grid.m)
    u[grid.wrap(k)] += w * (7 / 6 - eta ** 2)
    u[grid.wrap(k - 1)] += w * (-1 / 12 - eta / 2 + eta ** 2 / 2)
    u[grid.wrap(k + 1)] += w * (-1 / 12 + eta / 2 + eta ** 2 / 2)
    return GridState(grid, u / grid.h)
