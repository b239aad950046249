import unittest

import numpy as np

from holifd.core.grid import Grid
from holifd.core.projector import AnalyticField
from holifd.core.reference import AVERAGE, SAMPLE, burgers_rhs, fine_coordinates, reference_solve, restrict
from holifd.exceptions import ConfigError, StabilityError


class FineGridUnitTest(unittest.TestCase):
    def test_element_centres_are_fine_vertices(self):
        grid = Grid(m=4, h=1.0)
        x = fine_coordinates(grid, 4)
        self.assertEqual(len(x), 16)
        self.assertAlmostEqual(x[0], -0.5)
        np.testing.assert_allclose(x[2::4], grid.centres())

    def test_constant_is_steady(self):
        np.testing.assert_allclose(burgers_rhs(np.full(32, 0.7), 1.3, 0.1), 0.0, atol=1e-12)

    def test_restrict(self):
        grid = Grid(m=4, h=1.0)
        values = np.arange(16, dtype=float)
        np.testing.assert_allclose(restrict(values, grid, 4, SAMPLE), [2, 6, 10, 14])
        np.testing.assert_allclose(restrict(values, grid, 4, AVERAGE)[:3], [2, 6, 10])
        np.testing.assert_allclose(restrict(np.full(16, 3.0), grid, 4, AVERAGE), 3.0)
        with self.assertRaises(ConfigError):
            restrict(values, grid, 4, "median")
        with self.assertRaises(ConfigError):
            restrict(values[:8], grid, 4)


class ReferenceSolveUnitTest(unittest.TestCase):
    def setUp(self):
        self.grid = Grid(m=8, h=1.0)
        self.wavenumber = 2 * np.pi / self.grid.length
        self.u0 = AnalyticField(lambda x: np.sin(self.wavenumber * x))

    def test_sine_mode_decays_at_the_discrete_rate(self):
        T = 0.5
        solution = reference_solve(self.u0, 0.0, self.grid, T, fine_factor=8)
        dx = solution.dx
        rate = 4 / dx ** 2 * np.sin(self.wavenumber * dx / 2) ** 2
        expected = np.sin(self.wavenumber * solution.x) * np.exp(-rate * T)
        np.testing.assert_allclose(solution.final, expected, atol=1e-8)
        continuum = np.sin(self.wavenumber * solution.x) * np.exp(-self.wavenumber ** 2 * T)
        np.testing.assert_allclose(solution.final, continuum, atol=1e-3)

    def test_advection_conserves_mass(self):
        solution = reference_solve(self.u0, 2.0, self.grid, 0.25, fine_factor=8)
        self.assertAlmostEqual(solution.final.sum(), solution.states[0].sum(), places=11)

    def test_refinement_differences_shrink_at_second_order(self):
        solutions = [reference_solve(self.u0, 0.5, self.grid, 0.25, fine_factor=ff) for ff in (4, 8, 16)]
        # values at the vertices of the coarsest run
        coarse, middle, fine = (s.final[:: s.fine_factor // 4] for s in solutions)
        ratio = np.max(np.abs(coarse - middle)) / np.max(np.abs(middle - fine))
        self.assertAlmostEqual(ratio, 4.0, delta=0.4)

    def test_gaussian_keeps_mass_and_first_moment(self):
        # centred between the periodic images so the tails never reach the wrap
        u0 = AnalyticField(lambda x: np.exp(-0.5 * ((x - 3.5) / 0.25) ** 2))
        diffusion = reference_solve(u0, 0.0, self.grid, 0.05, fine_factor=8)
        first = diffusion.dx * (diffusion.states @ (diffusion.x - 3.5))
        self.assertLess(abs(first[-1] - first[0]), 1e-10)
        burgers = reference_solve(u0, 0.5, self.grid, 0.05, fine_factor=8)
        mass = burgers.dx * burgers.states.sum(axis=1)
        self.assertLess(abs(mass[-1] - mass[0]), 1e-10)

    def test_snapshots(self):
        solution = reference_solve(self.u0, 0.0, self.grid, 0.5, fine_factor=4, times=[0.25])
        np.testing.assert_allclose(solution.times, [0.0, 0.25, 0.5])
        np.testing.assert_allclose(solution.at(0.5), solution.final)
        with self.assertRaises(ConfigError):
            solution.at(0.3)
        frame = solution.to_frame()
        self.assertEqual(list(frame.columns), ["x", "t=0", "t=0.25", "t=0.5"])
        self.assertEqual(len(frame), 32)

    def test_rejects_bad_settings(self):
        with self.assertRaises(ConfigError):
            reference_solve(self.u0, 0.0, self.grid, 0.1, fine_factor=7)
        with self.assertRaises(ConfigError):
            reference_solve(self.u0, 0.0, self.grid, 0.1, fine_factor=4, times=[0.2])
        dx = self.grid.h / 4
        with self.assertRaises(StabilityError):
            reference_solve(self.u0, 0.0, self.grid, 0.1, fine_factor=4, dt=0.6 * dx ** 2)


if __name__ == "__main__":
    unittest.main()
