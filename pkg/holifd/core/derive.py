"""
Exact-rational derivation and verification of the diffusive (a = 0) projection vectors
as a power series in the coupling parameter gamma.

Work is done in xi units on a grid with h = 1, so h * mean(z_x) = mean(z_xi). The
representative vector is z_0; z_i is its translate by i elements.
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

import sympy

from holifd.core.grid import Grid
from holifd.core.polyfield import HALF, PiecewiseField, Polynomial, inner_product
from holifd.core.subgrid import tangent_series
from holifd.exceptions import ConfigError, DerivationError

log = logging.getLogger(__name__)

SUPPORTED_ORDERS = (1, 2)
STRETCH_ORDER = 3

EDGE_FLUX = "edge-flux"
EDGE_MEAN = "edge-mean"
NORMALIZATION = "normalization"
DUAL = "dual"
CONSTRAINT_GROUPS = (EDGE_FLUX, EDGE_MEAN, NORMALIZATION)


@dataclass(frozen=True)
class AdjointProblem:
    """
    Adjoint of the diffusion operator, J^+ = d^2/dx^2, with internal boundary
    conditions [z_x] = 0 and (1 - gamma) h mean(z_x) = gamma [z] on every edge.
    The dual operator is D z = dz/dt + J^+ z; the diffusive projectors are steady.
    """

    grid: Grid
    steady: bool = True

    def adjoint(self, z: PiecewiseField) -> PiecewiseField:
        return z.diff().diff()

    def dual(self, z: PiecewiseField) -> PiecewiseField:
        if not self.steady:
            raise DerivationError("Only steady dual problems are supported")
        return self.adjoint(z)


@dataclass
class GammaSeries:
    """z_0 = sum_n gamma**n terms[n]"""

    terms: List[PiecewiseField]

    @property
    def order(self) -> int:
        return len(self.terms)

    @property
    def grid(self) -> Grid:
        return self.terms[0].grid

    def term(self, n: int) -> PiecewiseField:
        if n < len(self.terms):
            return self.terms[n]
        return PiecewiseField(self.grid, {}, exact=True)

    def at(self, gamma=1) -> PiecewiseField:
        gamma = Fraction(gamma) if not isinstance(gamma, float) else gamma
        total = PiecewiseField(self.grid, {}, exact=not isinstance(gamma, float))
        for n, term in enumerate(self.terms):
            total = total + term * gamma ** n
        return total

    def offset_pieces(self, f: PiecewiseField) -> Dict[int, Polynomial]:
        return {self.grid.offset(j, 0): p for j, p in f.pieces.items()}

    def to_dict(self) -> Dict:
        def encode(field_):
            return {
                str(off): [str(c) for c in poly.coefficients]
                for off, poly in sorted(self.offset_pieces(field_).items())
            }

        return {
            "order": self.order,
            "terms": [{"gamma_power": n, "pieces": encode(t)} for n, t in enumerate(self.terms)],
            "at_gamma_1": encode(self.at(1)),
        }


def _series(terms: Sequence[PiecewiseField], n: int, grid: Grid) -> PiecewiseField:
    if n < len(terms):
        return terms[n]
    return PiecewiseField(grid, {}, exact=True)


def _rational(value) -> sympy.Rational:
    value = Fraction(value)
    return sympy.Rational(value.numerator, value.denominator)


class _UnknownPiece:
    """known(xi) + r xi^2/2 + b xi + c with symbolic r, b, c"""

    def __init__(self, known: Polynomial, name: str):
        self.known = known
        self.r, self.b, self.c = sympy.symbols(f"r_{name} b_{name} c_{name}")

    @property
    def symbols(self):
        return (self.r, self.b, self.c)

    def value(self, xi) -> sympy.Expr:
        return _rational(self.known(xi)) + self.r * _rational(xi) ** 2 / 2 + self.b * _rational(xi) + self.c

    def slope(self, xi) -> sympy.Expr:
        return _rational(self.known.deriv()(xi)) + self.r * _rational(xi) + self.b

    def inner(self, other: Polynomial) -> sympy.Expr:
        basis = (
            Polynomial([0, 0, Fraction(1, 2)], exact=True),
            Polynomial([0, 1], exact=True),
            Polynomial([1], exact=True),
        )
        expr = _rational(self.known.inner(other))
        for sym, poly in zip(self.symbols, basis):
            expr += sym * _rational(poly.inner(other))
        return expr

    def resolve(self, solution: Dict) -> Polynomial:
        r, b, c = (Fraction(str(s.subs(solution))) for s in self.symbols)
        return self.known + Polynomial([c, b, r / 2], exact=True)


def _dual_sum(problem: AdjointProblem, terms, tangents, n: int, grid: Grid, skip_top: bool) -> PiecewiseField:
    """
    sum over p+q+r = n and all i of <D z^(p), e_i^(q)> z_i^(r); with ``skip_top`` the
    p = n term (unknown while solving order n) is left out.
    """
    total = PiecewiseField(grid, {}, exact=True)
    for p in range(n + 1):
        if skip_top and p == n:
            continue
        dz = problem.dual(_series(terms, p, grid))
        if not dz.pieces:
            continue
        for q in range(n - p + 1):
            r = n - p - q
            e_q = _series(tangents, q, grid)
            z_r = _series(terms, r, grid)
            for i in range(grid.m):
                weight = inner_product(dz, e_q.shift(i))
                if weight:
                    total = total + z_r.shift(i) * weight
    return total


def _edges(n: int):
    return range(-(n + 2), n + 2)


def _tangent_sum(terms, tangents, n: int, i: int, grid: Grid, skip_top: bool):
    total = Fraction(0)
    for p in range(n + 1):
        if skip_top and p == n:
            continue
        total += inner_product(_series(terms, p, grid), _series(tangents, n - p, grid).shift(i))
    return total


def derive_projectors(
    order: int,
    tangents: Optional[List[PiecewiseField]] = None,
    grid: Optional[Grid] = None,
    allow_stretch: bool = False,
) -> GammaSeries:
    """
    Solve the dual equation order by order in gamma, starting from z_0 ~ chi_0.
    At order n each element piece is the double antiderivative of the known part of
    the dual equation plus r xi^2/2 + b xi + c; the edge conditions fix r and b and the
    normalization fixes c. Constants left free are set to zero.
    """
    allowed = SUPPORTED_ORDERS + ((STRETCH_ORDER,) if allow_stretch else ())
    if order not in allowed:
        raise ConfigError(f"Derivation order must be one of {allowed}, got {order}")
    grid = grid or Grid(m=max(8, 4 * order + 4), h=1)
    tangents = tangents or tangent_series(grid, j=0, order=order)
    problem = AdjointProblem(grid)
    terms = [PiecewiseField.characteristic(grid, 0, exact=True)]
    log.info(f"Deriving projection vectors to order {order} in gamma")
    for n in range(1, order):
        terms.append(_solve_order(problem, terms, tangents, n, grid))
        log.info(f"Order {n} solved on elements {sorted(grid.offset(j, 0) for j in terms[n].support)}")
    return GammaSeries(terms)


def _solve_order(problem: AdjointProblem, terms, tangents, n: int, grid: Grid) -> PiecewiseField:
    known = _dual_sum(problem, terms, tangents, n, grid, skip_top=True)
    unsolvable = [k for k in known.support if known.piece(k).integral() != 0]
    if unsolvable:
        raise DerivationError(
            f"Dual equation unsolvable at order {n}: known term has non-zero mean on elements "
            f"{sorted(grid.offset(k, 0) for k in unsolvable)}",
            order=n,
            constraint=DUAL,
        )
    pieces = {
        k: _UnknownPiece(known.piece(k).antideriv().antideriv(), name=f"{n}_{k + n}")
        for k in range(-n, n + 1)
    }
    lower = terms[n - 1]

    def slope(k, xi):
        return pieces[k].slope(xi) if k in pieces else 0

    def value(k, xi):
        return pieces[k].value(xi) if k in pieces else 0

    equations = {group: [] for group in CONSTRAINT_GROUPS}
    for k in _edges(n):
        jump_slope = slope(k + 1, -HALF) - slope(k, HALF)
        mean_slope = (slope(k + 1, -HALF) + slope(k, HALF)) / 2
        lower_slope = lower.diff()
        equations[EDGE_FLUX].append(jump_slope)
        equations[EDGE_MEAN].append(mean_slope - _rational(lower_slope.mean(k)) - _rational(lower.jump(k)))
    e0 = _series(tangents, 0, grid)
    for i in range(-(n + 2), n + 3):
        e_i = e0.shift(i)
        direct = sum((pieces[k].inner(e_i.piece(k)) for k in pieces), sympy.Integer(0))
        equations[NORMALIZATION].append(direct + _rational(_tangent_sum(terms, tangents, n, i, grid, skip_top=True)))

    unknowns = [s for piece in pieces.values() for s in piece.symbols]
    system = []
    solution = None
    for group in CONSTRAINT_GROUPS:
        system += [eq for eq in equations[group] if eq != 0]
        solutions = sympy.linsolve(system, unknowns)
        if solutions == sympy.S.EmptySet:
            raise DerivationError(
                f"Constraint system inconsistent at order {n} after adding {group} constraints",
                order=n,
                constraint=group,
            )
        solution = next(iter(solutions))
    free = {s: 0 for expr in solution for s in expr.free_symbols}
    resolved = dict(zip(unknowns, (sympy.sympify(expr).subs(free) for expr in solution)))
    return PiecewiseField(grid, {k: piece.resolve(resolved) for k, piece in pieces.items()}, exact=True)


@dataclass(frozen=True)
class Defect:
    order: int
    constraint: str
    location: str
    value: Fraction


@dataclass
class VerificationReport:
    checks: List[Defect] = field(default_factory=list)

    @property
    def defects(self) -> List[Defect]:
        return [c for c in self.checks if c.value != 0]

    def ok_through(self, order: int) -> bool:
        return not [d for d in self.defects if d.order <= order]

    def find(self, order: int, constraint: str, location: str) -> Defect:
        for check in self.checks:
            if (check.order, check.constraint, check.location) == (order, constraint, location):
                return check
        raise KeyError((order, constraint, location))

    def to_rows(self) -> List[Dict]:
        return [
            {"order": c.order, "constraint": c.constraint, "location": c.location, "value": str(c.value)}
            for c in self.checks
        ]


def verify_projector(
    series: GammaSeries,
    tangents: Optional[List[PiecewiseField]] = None,
    through: Optional[int] = None,
) -> VerificationReport:
    """
    Exact order-by-order check of the edge conditions, the normalization and the dual
    equation residual. Terms beyond the series are taken as zero.
    """
    grid = series.grid
    through = series.order - 1 if through is None else through
    tangents = tangents or tangent_series(grid, j=0, order=through + 1)
    problem = AdjointProblem(grid)
    terms = series.terms
    report = VerificationReport()
    for n in range(through + 1):
        z_n = _series(terms, n, grid)
        dz_n = z_n.diff()
        for k in _edges(n):
            where = f"edge {k}|{k + 1}"
            report.checks.append(Defect(n, EDGE_FLUX, where, dz_n.jump(k)))
            rhs = Fraction(0)
            if n:
                lower = _series(terms, n - 1, grid)
                rhs = lower.diff().mean(k) + lower.jump(k)
            report.checks.append(Defect(n, EDGE_MEAN, where, dz_n.mean(k) - rhs))
        for i in range(-(n + 2), n + 3):
            target = 1 if (n == 0 and i == 0) else 0
            value = _tangent_sum(terms, tangents, n, i, grid, skip_top=False) - target
            report.checks.append(Defect(n, NORMALIZATION, f"e_{i}", value))
        residual = problem.dual(z_n) - _dual_sum(problem, terms, tangents, n, grid, skip_top=False)
        for k in range(-(n + 2), n + 3):
            for power, coeff in enumerate(residual.piece(k).coefficients):
                report.checks.append(Defect(n, DUAL, f"element {k} xi^{power}", coeff))
        if not residual.pieces:
            report.checks.append(Defect(n, DUAL, "all elements", Fraction(0)))
    log.info(f"Verified {len(report.checks)} checks through order {through}; {len(report.defects)} defects")
    return report


def printed_series(grid: Optional[Grid] = None) -> GammaSeries:
    """The diffusive three-element projector as printed, split into gamma powers"""
    grid = grid or Grid(m=8, h=1)
    F = Fraction
    first = {
        0: Polynomial([F(1, 6), 0, -1], exact=True),
        -1: Polynomial([F(-1, 12), F(1, 2), F(1, 2)], exact=True),
        1: Polynomial([F(-1, 12), F(-1, 2), F(1, 2)], exact=True),
    }
    return GammaSeries([PiecewiseField.characteristic(grid, 0), PiecewiseField(grid, first, exact=True)])
