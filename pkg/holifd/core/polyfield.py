"""
Piecewise-polynomial calculus over the elements of a grid.

Every piece is a polynomial in the local coordinate xi of its own element. Scalars are
either exact (``fractions.Fraction``) or floating; mixing the two yields floats.
"""
import json
from fractions import Fraction
from numbers import Number
from typing import Dict, Iterable, Mapping, Sequence, Union

import numpy as np

from holifd.core.grid import Grid
from holifd.exceptions import DomainError

DEGREE_CAP = 8
HALF = Fraction(1, 2)
EDGE_TOLERANCE = 1e-12

INTERIOR = "interior"
LEFT = "left"
RIGHT = "right"


def _to_fraction(value) -> Fraction:
    if isinstance(value, str):
        return Fraction(value.strip())
    return Fraction(value)


def xi_moment(n: int, exact: bool = False) -> Union[Fraction, float]:
    """Integral of xi**n over [-1/2, 1/2]"""
    if n % 2:
        return Fraction(0) if exact else 0.0
    value = Fraction(1, 2 ** n * (n + 1))
    return value if exact else float(value)


class Polynomial:
    """Polynomial c_0 + c_1 xi + ... + c_d xi^d in the local element coordinate"""

    __slots__ = ("coefficients", "exact")

    def __init__(self, coefficients: Iterable = (), exact: bool = False):
        if exact:
            coeffs = [_to_fraction(c) for c in coefficients]
        else:
            coeffs = [float(_to_fraction(c)) if isinstance(c, str) else float(c) for c in coefficients]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        if len(coeffs) - 1 > DEGREE_CAP:
            raise DomainError(f"Polynomial degree {len(coeffs) - 1} exceeds cap {DEGREE_CAP}")
        self.coefficients = tuple(coeffs)
        self.exact = exact

    @classmethod
    def zero(cls, exact: bool = False) -> "Polynomial":
        return cls((), exact=exact)

    @classmethod
    def constant(cls, value, exact: bool = False) -> "Polynomial":
        return cls((value,), exact=exact)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def is_zero(self) -> bool:
        return not self.coefficients

    def _zero_scalar(self):
        return Fraction(0) if self.exact else 0.0

    def __call__(self, xi):
        result = self._zero_scalar()
        for c in reversed(self.coefficients):
            result = result * xi + c
        return result

    def _combine(self, other: "Polynomial", sign: int) -> "Polynomial":
        exact = self.exact and other.exact
        a, b = list(self.coefficients), list(other.coefficients)
        n = max(len(a), len(b))
        a += [0] * (n - len(a))
        b += [0] * (n - len(b))
        return Polynomial([x + sign * y for x, y in zip(a, b)], exact=exact)

    def __add__(self, other):
        if isinstance(other, Number):
            other = Polynomial.constant(other, exact=self.exact and not isinstance(other, float))
        return self._combine(other, 1)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Number):
            other = Polynomial.constant(other, exact=self.exact and not isinstance(other, float))
        return self._combine(other, -1)

    def __neg__(self):
        return Polynomial([-c for c in self.coefficients], exact=self.exact)

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            exact = self.exact and other.exact
            if self.is_zero() or other.is_zero():
                return Polynomial.zero(exact)
            out = [0] * (len(self.coefficients) + len(other.coefficients) - 1)
            for i, a in enumerate(self.coefficients):
                for j, b in enumerate(other.coefficients):
                    out[i + j] += a * b
            return Polynomial(out, exact=exact)
        exact = self.exact and not isinstance(other, float)
        if exact:
            other = _to_fraction(other)
        return Polynomial([c * other for c in self.coefficients], exact=exact)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.coefficients == other.coefficients

    def __hash__(self):
        return hash(self.coefficients)

    def __repr__(self):
        if self.is_zero():
            return "0"
        terms = []
        for i, c in enumerate(self.coefficients):
            if c == 0:
                continue
            terms.append(f"{c}" if i == 0 else f"{c}*xi^{i}")
        return " + ".join(terms)

    def deriv(self) -> "Polynomial":
        return Polynomial([i * c for i, c in enumerate(self.coefficients)][1:], exact=self.exact)

    def antideriv(self) -> "Polynomial":
        """Antiderivative with zero constant term"""
        if self.is_zero():
            return Polynomial.zero(self.exact)
        if self.exact:
            coeffs = [Fraction(0)] + [c / (i + 1) for i, c in enumerate(self.coefficients)]
        else:
            coeffs = [0.0] + [c / (i + 1) for i, c in enumerate(self.coefficients)]
        return Polynomial(coeffs, exact=self.exact)

    def integral(self):
        """Integral over the element, in xi units"""
        total = self._zero_scalar()
        for i, c in enumerate(self.coefficients):
            total += c * xi_moment(i, self.exact)
        return total

    def inner(self, other: "Polynomial"):
        """Integral over the element of the product, without forming the product"""
        exact = self.exact and other.exact
        total = Fraction(0) if exact else 0.0
        for i, a in enumerate(self.coefficients):
            for j, b in enumerate(other.coefficients):
                total += a * b * xi_moment(i + j, exact)
        return total

    def reflect(self) -> "Polynomial":
        """p(-xi)"""
        return Polynomial(
            [-c if i % 2 else c for i, c in enumerate(self.coefficients)], exact=self.exact
        )

    def to_float(self) -> "Polynomial":
        return Polynomial(self.coefficients, exact=False)

    def padded(self, n: int) -> np.ndarray:
        out = np.zeros(n)
        out[: len(self.coefficients)] = [float(c) for c in self.coefficients]
        return out


def _check_xi(xi):
    if xi < -HALF - EDGE_TOLERANCE or xi > HALF + EDGE_TOLERANCE:
        raise DomainError(f"Local coordinate {xi} outside [-1/2, 1/2]")


class PiecewiseField:
    """Map from element index to the polynomial piece on that element; zero elsewhere"""

    def __init__(self, grid: Grid, pieces: Mapping[int, Polynomial] = None, exact: bool = None):
        self.grid = grid
        merged: Dict[int, Polynomial] = {}
        for j, poly in (pieces or {}).items():
            k = grid.wrap(j)
            merged[k] = merged[k] + poly if k in merged else poly
        self.pieces = {j: p for j, p in sorted(merged.items()) if not p.is_zero()}
        if exact is None:
            exact = all(p.exact for p in merged.values())
        self.exact = exact

    @classmethod
    def characteristic(cls, grid: Grid, j: int, exact: bool = True) -> "PiecewiseField":
        return cls(grid, {j: Polynomial.constant(1, exact=exact)}, exact=exact)

    @classmethod
    def constant(cls, grid: Grid, value=1, exact: bool = True) -> "PiecewiseField":
        return cls(grid, {j: Polynomial.constant(value, exact=exact) for j in range(grid.m)}, exact=exact)

    @classmethod
    def from_coefficients(cls, grid: Grid, coefficients: np.ndarray) -> "PiecewiseField":
        """Floating field from an (m, d+1) array of per-element coefficients"""
        return cls(grid, {j: Polynomial(row) for j, row in enumerate(coefficients)}, exact=False)

    @property
    def support(self):
        return tuple(self.pieces)

    def piece(self, j: int) -> Polynomial:
        return self.pieces.get(self.grid.wrap(j), Polynomial.zero(self.exact))

    def _h(self):
        return Fraction(self.grid.h) if self.exact else float(self.grid.h)

    def evaluate(self, j: int, xi, side: str = INTERIOR):
        _check_xi(xi)
        if side == LEFT and xi <= -HALF:
            return self.piece(j - 1)(HALF)
        if side == RIGHT and xi >= HALF:
            return self.piece(j + 1)(-HALF)
        if side not in (INTERIOR, LEFT, RIGHT):
            raise DomainError(f"Unknown evaluation side {side!r}")
        return self.piece(j)(xi)

    def sample(self, x: np.ndarray) -> np.ndarray:
        j, xi = self.grid.locate_many(x)
        return np.array([float(self.piece(jj)(float(q))) for jj, q in zip(j, xi)])

    def diff(self) -> "PiecewiseField":
        """d/dx = (1/h) d/dxi on every piece"""
        scale = 1 / self._h()
        return PiecewiseField(self.grid, {j: p.deriv() * scale for j, p in self.pieces.items()}, self.exact)

    def integrate_element(self, j: int):
        """Integral over element j in x units"""
        return self._h() * self.piece(j).integral()

    def jump(self, j: int):
        """Right limit minus left limit at the boundary between elements j and j+1"""
        return self.piece(j + 1)(-HALF) - self.piece(j)(HALF)

    def mean(self, j: int):
        return (self.piece(j + 1)(-HALF) + self.piece(j)(HALF)) / 2

    def element_moments(self, grid: Grid, pmax: int) -> np.ndarray:
        """(m, pmax+1) array of integrals of xi**p times each piece"""
        self.grid.check_same(grid)
        out = np.zeros((grid.m, pmax + 1))
        for j, poly in self.pieces.items():
            for p in range(pmax + 1):
                out[j, p] = float(sum(c * xi_moment(i + p, False) for i, c in enumerate(poly.coefficients)))
        return out

    def _binary(self, other: "PiecewiseField", sign: int) -> "PiecewiseField":
        self.grid.check_same(other.grid)
        keys = set(self.pieces) | set(other.pieces)
        exact = self.exact and other.exact
        return PiecewiseField(
            self.grid, {j: self.piece(j) + other.piece(j) * sign for j in keys}, exact
        )

    def __add__(self, other):
        return self._binary(other, 1)

    def __sub__(self, other):
        return self._binary(other, -1)

    def __neg__(self):
        return self * -1

    def __mul__(self, scalar):
        exact = self.exact and not isinstance(scalar, float)
        return PiecewiseField(self.grid, {j: p * scalar for j, p in self.pieces.items()}, exact)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, PiecewiseField):
            return NotImplemented
        return self.grid == other.grid and self.pieces == other.pieces

    def __repr__(self):
        body = ", ".join(f"{j}: {p!r}" for j, p in self.pieces.items())
        return f"PiecewiseField({{{body}}})"

    def shift(self, n: int) -> "PiecewiseField":
        """Translate by n elements"""
        return PiecewiseField(self.grid, {j + n: p for j, p in self.pieces.items()}, self.exact)

    def mirror(self, about: int = 0) -> "PiecewiseField":
        """Reflect x -> 2 x_about - x"""
        return PiecewiseField(
            self.grid,
            {2 * about - self.grid.offset(j, 0): p.reflect() for j, p in self.pieces.items()},
            self.exact,
        )

    def to_float(self) -> "PiecewiseField":
        return PiecewiseField(self.grid, {j: p.to_float() for j, p in self.pieces.items()}, False)

    def to_dict(self) -> Dict:
        def encode(c):
            return str(c) if isinstance(c, Fraction) else c

        return {
            "m": self.grid.m,
            "h": encode(self.grid.h) if isinstance(self.grid.h, Fraction) else self.grid.h,
            "origin": self.grid.origin,
            "exact": self.exact,
            "pieces": {str(j): [encode(c) for c in p.coefficients] for j, p in self.pieces.items()},
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: Mapping, grid: Grid = None) -> "PiecewiseField":
        exact = bool(data.get("exact", True))
        if grid is None:
            h = data.get("h", 1)
            grid = Grid(m=int(data["m"]), h=_to_fraction(h) if isinstance(h, str) else h, origin=data.get("origin", 0.0))
        pieces = {int(j): Polynomial(coeffs, exact=exact) for j, coeffs in data.get("pieces", {}).items()}
        return cls(grid, pieces, exact)

    @classmethod
    def from_json(cls, text: str) -> "PiecewiseField":
        return cls.from_dict(json.loads(text))


def inner_product(z: PiecewiseField, u) -> Union[Fraction, float]:
    """
    <z, u> = (1/h) * integral of z*u over the domain.
    The 1/h cancels against dx = h dxi, leaving a sum of xi-integrals per element.
    :param z: piecewise field
    :param u: piecewise field, or any initial field exposing ``element_moments``
    """
    if isinstance(u, PiecewiseField):
        z.grid.check_same(u.grid)
        exact = z.exact and u.exact
        total = Fraction(0) if exact else 0.0
        for j in set(z.pieces) & set(u.pieces):
            total += z.pieces[j].inner(u.pieces[j])
        return total
    pmax = max((p.degree for p in z.pieces.values()), default=0)
    moments = u.element_moments(z.grid, max(pmax, 0))
    total = 0.0
    for j, poly in z.pieces.items():
        total += float(np.dot(poly.padded(pmax + 1), moments[j]))
    return total


def sum_fields(fields: Sequence[PiecewiseField]) -> PiecewiseField:
    total = fields[0]
    for f in fields[1:]:
        total = total + f
    return total
