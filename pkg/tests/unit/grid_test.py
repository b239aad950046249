import unittest

import numpy as np

from holifd.core.grid import Grid, GridState
from holifd.exceptions import ConfigError, DomainError, GridMismatchError


class GridUnitTest(unittest.TestCase):
    def setUp(self):
        self.grid = Grid(m=8, h=0.5, origin=1.0)

    def test_rejects_small_or_degenerate_grids(self):
        with self.assertRaises(ConfigError):
            Grid(m=3)
        with self.assertRaises(ConfigError):
            Grid(m=8, h=0.0)
        with self.assertRaises(ConfigError):
            Grid(m=8, h=-1.0)

    def test_centres_and_length(self):
        self.assertEqual(self.grid.length, 4.0)
        np.testing.assert_allclose(self.grid.centres(), 1.0 + 0.5 * np.arange(8))

    def test_locate_inside_element(self):
        j, xi = self.grid.locate(1.0 + 3 * 0.5 + 0.1)
        self.assertEqual(j, 3)
        self.assertAlmostEqual(xi, 0.2, places=12)

    def test_locate_left_edge_belongs_to_element(self):
        j, xi = self.grid.locate(1.0 + 2 * 0.5 - 0.25)
        self.assertEqual(j, 2)
        self.assertAlmostEqual(xi, -0.5, places=12)

    def test_locate_wraps_periodically(self):
        j, xi = self.grid.locate(1.0 + 8 * 0.5)
        self.assertEqual(j, 0)
        self.assertAlmostEqual(xi, 0.0, places=12)
        j, _ = self.grid.locate(1.0 - 0.5)
        self.assertEqual(j, 7)

    def test_locate_rejects_non_finite(self):
        with self.assertRaises(DomainError):
            self.grid.locate(float("nan"))

    def test_locate_many_matches_locate(self):
        x = np.array([0.8, 1.3, 2.74, 4.9])
        js, xis = self.grid.locate_many(x)
        for xx, jj, qq in zip(x, js, xis):
            j, xi = self.grid.locate(xx)
            self.assertEqual(j, jj)
            self.assertAlmostEqual(xi, qq, places=12)

    def test_minimal_image_offset(self):
        self.assertEqual(self.grid.offset(7, 0), -1)
        self.assertEqual(self.grid.offset(1, 0), 1)
        self.assertEqual(self.grid.offset(3, 0), 3)
        self.assertEqual(self.grid.offset(4, 0), -4)

    def test_check_same(self):
        self.grid.check_same(Grid(m=8, h=0.5, origin=1.0))
        with self.assertRaises(GridMismatchError):
            self.grid.check_same(Grid(m=16, h=0.5, origin=1.0))


class GridStateUnitTest(unittest.TestCase):
    def setUp(self):
        self.grid = Grid(m=4)

    def test_validates_shape_and_values(self):
        with self.assertRaises(DomainError):
            GridState(self.grid, np.zeros(5))
        with self.assertRaises(DomainError):
            GridState(self.grid, np.array([0.0, np.inf, 0.0, 0.0]))

    def test_indexing_wraps_and_mass(self):
        state = GridState(self.grid, np.array([1.0, 2.0, 3.0, 4.0]))
        self.assertEqual(state[-1], 4.0)
        self.assertEqual(state[5], 2.0)
        self.assertEqual(state.mass(), 10.0)

    def test_amplitudes_are_read_only(self):
        state = GridState(self.grid, np.zeros(4))
        with self.assertRaises(ValueError):
            state.u[0] = 1.0


if __name__ == "__main__":
    unittest.main()
