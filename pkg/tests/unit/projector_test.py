import unittest
from fractions import Fraction as F

import numpy as np
import sympy

from holifd.core.grid import Grid
from holifd.core.polyfield import PiecewiseField, Polynomial
from holifd.core.projector import (
    OFFSETS,
    AnalyticField,
    PiecewiseInitialField,
    PointMass,
    PointMasses,
    advective_correction,
    advective_series,
    check_eta,
    element_average,
    initial_field_from_spec,
    normalization_matrix,
    point_release_ic,
    project,
    project_linear,
    projection_vectors,
    projector_series,
    subgrid_moments,
)
from holifd.core.subgrid import A, GAMMA, H, UC, UL, UR, XI, ModelParams
from holifd.exceptions import ConfigError, ConvergenceError, DomainError


def linear_fit_r2(x, y):
    slope, intercept = np.polyfit(x, y, 1)
    residual = y - (slope * x + intercept)
    return slope, 1 - np.sum(residual ** 2) / np.sum((y - y.mean()) ** 2)


class InitialFieldUnitTest(unittest.TestCase):
    def setUp(self):
        self.grid = Grid(m=16, h=0.5)

    def test_analytic_moments_of_a_polynomial_are_exact(self):
        u0 = AnalyticField(lambda x: x ** 2)
        moments = u0.element_moments(self.grid, 2)
        # on element j: (x_j + h xi)^2 integrated against 1, xi, xi^2
        xj = self.grid.centres()
        h = self.grid.h
        np.testing.assert_allclose(moments[:, 0], xj ** 2 + h ** 2 / 12, rtol=1e-13)
        np.testing.assert_allclose(moments[:, 1], 2 * xj * h / 12, rtol=1e-13, atol=1e-15)
        np.testing.assert_allclose(moments[:, 2], xj ** 2 / 12 + h ** 2 / 80, rtol=1e-13)

    def test_analytic_field_rejects_non_finite_values(self):
        with self.assertRaises(DomainError):
            AnalyticField(lambda x: 1 / (x - x)).element_moments(self.grid, 0)

    def test_point_masses(self):
        u0 = PointMasses([PointMass(3, 0.25, 2.0)])
        moments = u0.element_moments(self.grid, 2)
        np.testing.assert_allclose(moments[3], [4.0, 1.0, 0.25])
        self.assertAlmostEqual(u0.mass(self.grid), 2.0, places=14)
        self.assertAlmostEqual(u0.centroid(self.grid, 3), 0.125, places=14)
        with self.assertRaises(DomainError):
            PointMass(0, 0.75)

    def test_mollified_point_mass_keeps_its_mass(self):
        u0 = PointMasses([PointMass(8, 0.0, 1.0)]).mollified(self.grid)
        self.assertAlmostEqual(u0.mass(self.grid), 1.0, places=10)

    def test_relocated_point_masses(self):
        fine = Grid(m=32, h=0.25)
        moved = PointMasses([PointMass(3, 0.5)]).relocated(self.grid, fine)
        self.assertEqual(moved.points[0].k, 7)
        self.assertAlmostEqual(moved.points[0].eta, 0.0, places=14)

    def test_moments_about_an_element(self):
        u0 = initial_field_from_spec({"kind": "piecewise", "pieces": {"3": ["1"], "15": ["1"]}}, self.grid)
        h = self.grid.h
        np.testing.assert_allclose(u0.moments(self.grid, 3), [2 * h, -4 * h ** 2, h ** 3 * (16 + 2 / 12)])
        np.testing.assert_allclose(u0.moments(self.grid, 0, 1), [2 * h, 2 * h ** 2])
        single = PointMasses([PointMass(3, 0.25, 2.0)])
        self.assertAlmostEqual(single.centre_of_mass(self.grid), self.grid.centre(3) + 0.125, places=14)

    def test_expressions_cannot_reach_python(self):
        for text in ("__import__('os').getcwd()", "sin(x).func", "x.__class__", "().__class__"):
            with self.assertRaises(ConfigError):
                initial_field_from_spec({"kind": "analytic", "expression": text}, self.grid)
        for text in ("y + x", "foo(x)", "os"):
            with self.assertRaises(ConfigError):
                initial_field_from_spec({"kind": "analytic", "expression": text}, self.grid)
        with self.assertRaises(ConfigError):
            initial_field_from_spec({"kind": "analytic"}, self.grid)
        field = initial_field_from_spec({"kind": "analytic", "expression": "abs(x - 4) + 0.5*exp(-x**2)"}, self.grid)
        self.assertAlmostEqual(float(field.sample(np.array([4.0]), self.grid)[0]), 0.5 * np.exp(-16.0), places=14)

    def test_from_spec(self):
        analytic = initial_field_from_spec({"kind": "analytic", "expression": "sin(2*pi*x/L)"}, self.grid)
        np.testing.assert_allclose(analytic.sample(np.array([2.0]), self.grid), [1.0], atol=1e-14)
        piecewise = initial_field_from_spec({"kind": "piecewise", "pieces": {"2": ["1/2", "1"]}}, self.grid)
        self.assertAlmostEqual(piecewise.element_average(self.grid)[2], 0.5, places=14)
        points = initial_field_from_spec({"kind": "points", "points": [{"k": 1, "eta": 0.5}]}, self.grid)
        self.assertIsInstance(points, PointMasses)
        for bad in ({"kind": "blob"}, {"kind": "points", "points": []}, {"kind": "analytic", "expression": "sin("}):
            with self.assertRaises(ConfigError):
                initial_field_from_spec(bad, self.grid)


class ProjectionVectorUnitTest(unittest.TestCase):
    def setUp(self):
        self.grid = Grid(m=16, h=0.5)
        self.x = np.random.default_rng(11).uniform(0, self.grid.length, 10 ** 4) - self.grid.h / 2

    def test_diffusive_pieces(self):
        z = projection_vectors(np.zeros(16), ModelParams(gamma=1.0, h=0.5), self.grid).vector(5)
        np.testing.assert_allclose(z.piece(5).padded(4), [7 / 6, 0, -1, 0], atol=1e-15)
        np.testing.assert_allclose(z.piece(4).padded(4), [-1 / 12, 0.5, 0.5, 0], atol=1e-15)
        np.testing.assert_allclose(z.piece(6).padded(4), [-1 / 12, -0.5, 0.5, 0], atol=1e-15)

    def test_partition_of_unity_without_advection(self):
        u = np.random.default_rng(2).normal(size=16)
        for gamma in (0.0, 0.3, 1.0):
            zs = projection_vectors(u, ModelParams(a=0.0, gamma=gamma, h=0.5), self.grid)
            np.testing.assert_allclose(zs.partition(self.x), 1.0, atol=1e-14)

    def test_partition_of_unity_for_constant_state(self):
        for a in (0.3, 1.0):
            zs = projection_vectors(np.full(16, 1.3), ModelParams(a=a, gamma=1.0, h=0.5), self.grid)
            np.testing.assert_allclose(zs.partition(self.x), 1.0, atol=1e-12)

    def test_two_printed_advective_forms_agree(self):
        full = projector_series()
        block = advective_series()
        for off in OFFSETS:
            first_order = sympy.expand(full[off]).coeff(A, 1).subs(GAMMA, 1)
            self.assertEqual(sympy.expand(A * first_order - block[off]), 0)

    def test_advective_block_for_constant_field(self):
        U = sympy.Symbol("U")
        block = {off: sympy.expand(expr.subs({UL: U, UC: U, UR: U})) for off, expr in advective_series().items()}
        shape = 6 * XI - 8 * XI ** 3
        expected = {-1: shape - 2, 0: -2 * shape, 1: shape + 2}
        for off in OFFSETS:
            target = sympy.expand(U * H * A / 48 * expected[off])
            self.assertEqual(sympy.expand(block[off] - target), 0)

    def test_advective_correction_vectors(self):
        zs = advective_correction(np.full(16, 2.0), ModelParams(a=0.5, gamma=1.0, h=0.5), self.grid)
        z = zs.vector(3)
        scale = 2.0 * 0.5 * 0.5 / 48
        np.testing.assert_allclose(z.piece(3).padded(4), scale * np.array([0, -12, 0, 16]), atol=1e-15)

    def test_normalization_defect_is_second_order_in_gamma(self):
        grid = Grid(m=8, h=1.0)
        errors = []
        for gamma in (0.2, 0.1, 0.05):
            n = normalization_matrix(np.zeros(8), ModelParams(gamma=gamma), grid)
            errors.append(np.max(np.abs(n - np.eye(8))))
        ratios = np.array(errors[:-1]) / np.array(errors[1:])
        np.testing.assert_allclose(ratios, 4.0, atol=0.5)

    def test_normalization_defect_at_full_coupling(self):
        n = normalization_matrix(np.zeros(8), ModelParams(gamma=1.0), Grid(m=8, h=1.0))
        self.assertAlmostEqual(n[0, 0] - 1, float(F(19, 480)), places=13)

    def test_subgrid_moments_of_a_constant_state(self):
        moments = subgrid_moments(np.full(16, 2.0), ModelParams(gamma=1.0, h=0.5))
        np.testing.assert_allclose(moments[:, 0], 2.0)
        np.testing.assert_allclose(moments[:, 2], 2.0 / 12)


class ProjectionUnitTest(unittest.TestCase):
    def setUp(self):
        self.grid = Grid(m=16, h=0.25)
        self.p = ModelParams(a=0.0, gamma=1.0, h=0.25)

    def test_point_release_closed_forms(self):
        h = self.grid.h
        for eta in (0.0, 0.25, 0.5):
            state = point_release_ic(8, eta, 1.0, self.p, self.grid)
            hu = h * state.u
            self.assertAlmostEqual(hu[8], 7 / 6 - eta ** 2, delta=1e-14)
            self.assertAlmostEqual(hu[7], -1 / 12 - eta / 2 + eta ** 2 / 2, delta=1e-14)
            self.assertAlmostEqual(hu[9], -1 / 12 + eta / 2 + eta ** 2 / 2, delta=1e-14)
            self.assertAlmostEqual(float(np.sum(hu)), 1.0, places=15)
            linear = project_linear(PointMasses([PointMass(8, eta)]), self.p, self.grid)
            np.testing.assert_allclose(h * linear.u, hu, atol=1e-14)

    def test_point_release_needs_diffusive_full_coupling(self):
        with self.assertRaises(ConfigError):
            point_release_ic(0, 0.0, 1.0, ModelParams(a=0.1, h=0.25), self.grid)
        with self.assertRaises(ConfigError):
            point_release_ic(0, 0.0, 1.0, ModelParams(gamma=0.5, h=0.25), self.grid)

    def test_point_release_rejects_offsets_outside_the_element(self):
        for eta in (0.75, -0.5001):
            with self.assertRaises(DomainError):
                point_release_ic(8, eta, 1.0, self.p, self.grid)
        with self.assertRaises(DomainError):
            check_eta(float("nan"))
        check_eta(-0.5)
        check_eta(0.5)

    def test_project_linear_needs_no_advection(self):
        with self.assertRaises(ConfigError):
            project_linear(AnalyticField(np.sin), ModelParams(a=0.1, h=0.25), self.grid)

    def test_nonlinear_projection_reduces_to_linear_without_advection(self):
        u0 = AnalyticField(lambda x: np.exp(-((x - 2) ** 2)))
        np.testing.assert_allclose(
            project(u0, self.p, self.grid).u, project_linear(u0, self.p, self.grid).u, atol=1e-12
        )

    def test_projection_of_constant_field(self):
        for a in (0.0, 0.5, 2.0):
            p = ModelParams(a=a, gamma=1.0, h=0.25)
            state = project(AnalyticField(lambda x: 1.5 + 0 * x), p, self.grid)
            self.assertLess(np.ptp(state.u), 1e-12)
            mean_v = np.mean(subgrid_moments(state.u, p, 0)[:, 0])
            self.assertAlmostEqual(mean_v, 1.5, delta=1e-10)

    def test_element_average(self):
        state = element_average(AnalyticField(lambda x: 3 + 0 * x), self.grid)
        np.testing.assert_allclose(state.u, 3.0)

    def test_convergence_failure_carries_last_iterate(self):
        u0 = AnalyticField(lambda x: 1 + np.sin(2 * np.pi * x / 4))
        with self.assertRaises(ConvergenceError) as ctx:
            project(u0, ModelParams(a=0.5, gamma=1.0, h=0.25), self.grid, max_iter=1)
        self.assertEqual(len(ctx.exception.last_iterate), 16)
        self.assertGreater(ctx.exception.residual, 0)

    def test_normalization_modes(self):
        u0 = AnalyticField(lambda x: 1 + np.sin(2 * np.pi * x / 4))
        with self.assertRaises(ConfigError):
            project(u0, self.p, self.grid, normalization="other")
        raw = project(u0, self.p, self.grid, normalization="raw")
        truncated = project(u0, self.p, self.grid)
        self.assertLess(np.max(np.abs(raw.u - truncated.u)), 0.05)

    def _shifts(self, bump: Polynomial, k: int, offsets):
        background = PiecewiseField.constant(self.grid, 1.0, exact=False)
        bumped = PiecewiseInitialField(background + PiecewiseField(self.grid, {k: bump}, exact=False))
        flat = PiecewiseInitialField(background)
        base_bump = project(bumped, self.p, self.grid).u
        base_flat = project(flat, self.p, self.grid).u
        amplitudes = np.linspace(0.01, 0.1, 10)
        shifts = []
        for a in amplitudes:
            p = ModelParams(a=a, gamma=1.0, h=self.grid.h)
            with_bump = project(bumped, p, self.grid).u - base_bump
            without = project(flat, p, self.grid).u - base_flat
            shifts.append([(with_bump - without)[(k + off) % 16] for off in offsets])
        return amplitudes, np.array(shifts)

    def test_symmetric_bump_shifts_mass_upstream(self):
        k = 8
        bump = Polynomial([1.5, 0.0, -6.0])
        amplitudes, shifts = self._shifts(bump, k, (-1, 1))
        self.assertTrue(np.all(shifts[:, 0] > 0))
        self.assertTrue(np.all(shifts[:, 1] < 0))
        for column in shifts.T:
            _, r2 = linear_fit_r2(amplitudes, column)
            self.assertGreaterEqual(r2, 0.999)

    def test_antisymmetric_perturbation_raises_the_centre(self):
        k = 8
        perturbation = Polynomial([0.0, -12.0])
        amplitudes, shifts = self._shifts(perturbation, k, (0, -1, 1))
        self.assertTrue(np.all(shifts[:, 0] > 0))
        self.assertTrue(np.all(shifts[:, 1] < 0))
        self.assertTrue(np.all(shifts[:, 2] < 0))
        for column in shifts.T:
            _, r2 = linear_fit_r2(amplitudes, column)
            self.assertGreaterEqual(r2, 0.999)


if __name__ == "__main__":
    unittest.main()
