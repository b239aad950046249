import unittest
from fractions import Fraction as F

from holifd.core.derive import (
    DUAL,
    EDGE_MEAN,
    EDGE_FLUX,
    NORMALIZATION,
    GammaSeries,
    derive_projectors,
    printed_series,
    verify_projector,
)
from holifd.core.grid import Grid
from holifd.core.polyfield import PiecewiseField, Polynomial, sum_fields
from holifd.exceptions import ConfigError, DerivationError


class DeriveUnitTest(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.series = derive_projectors(2)

    def test_first_order_is_the_characteristic_function(self):
        series = derive_projectors(1)
        self.assertEqual(series.order, 1)
        self.assertEqual(series.at(1), PiecewiseField.characteristic(series.grid, 0))

    def test_second_order_matches_the_printed_projector(self):
        golden = printed_series(self.series.grid)
        self.assertEqual(self.series.term(1), golden.term(1))
        self.assertEqual(self.series.at(1), golden.at(1))

    def test_full_coupling_pieces(self):
        pieces = self.series.offset_pieces(self.series.at(1))
        self.assertEqual(sorted(pieces), [-1, 0, 1])
        self.assertEqual(pieces[0], Polynomial([F(7, 6), 0, -1], exact=True))
        self.assertEqual(pieces[-1], Polynomial([F(-1, 12), F(1, 2), F(1, 2)], exact=True))
        self.assertEqual(pieces[1], Polynomial([F(-1, 12), F(-1, 2), F(1, 2)], exact=True))

    def test_first_order_term_is_mirror_symmetric(self):
        z1 = self.series.term(1)
        self.assertEqual(z1.mirror(), z1)

    def test_projectors_over_all_elements_sum_to_one(self):
        for series in (self.series, derive_projectors(3, allow_stretch=True)):
            grid = series.grid
            for n in range(series.order):
                total = sum_fields([series.term(n).shift(j) for j in range(grid.m)])
                expected = PiecewiseField.constant(grid) if n == 0 else PiecewiseField(grid, {}, exact=True)
                self.assertEqual(total, expected, f"gamma^{n}")

    def test_stretched_third_order_verifies(self):
        series = derive_projectors(3, allow_stretch=True)
        self.assertEqual(series.order, 3)
        report = verify_projector(series)
        self.assertEqual(report.defects, [])
        self.assertTrue(report.ok_through(2))

    def test_to_dict(self):
        encoded = self.series.to_dict()
        self.assertEqual(set(encoded), {"order", "terms", "at_gamma_1"})
        self.assertEqual(encoded["order"], 2)
        self.assertEqual([t["gamma_power"] for t in encoded["terms"]], [0, 1])
        self.assertEqual(encoded["at_gamma_1"]["0"], ["7/6", "0", "-1"])

    def test_unsupported_order(self):
        with self.assertRaises(ConfigError):
            derive_projectors(3)
        with self.assertRaises(ConfigError):
            derive_projectors(0)

    def test_inconsistent_normalization_is_reported(self):
        grid = Grid(m=12, h=1)
        tangents = [PiecewiseField.characteristic(grid, 0), PiecewiseField.characteristic(grid, 2)]
        with self.assertRaises(DerivationError) as ctx:
            derive_projectors(2, tangents=tangents, grid=grid)
        self.assertEqual(ctx.exception.order, 1)
        self.assertEqual(ctx.exception.constraint, NORMALIZATION)


class VerifyUnitTest(unittest.TestCase):
    def setUp(self):
        self.grid = Grid(m=8, h=1)

    def test_printed_series_has_no_defects(self):
        report = verify_projector(printed_series(self.grid))
        self.assertTrue(report.ok_through(1))
        self.assertEqual(report.defects, [])
        self.assertTrue(any(c.constraint == DUAL for c in report.checks))
        self.assertEqual(report.find(1, EDGE_FLUX, "edge 0|1").value, 0)

    def test_wrong_centre_constant_breaks_normalization(self):
        golden = printed_series(self.grid)
        pieces = dict(golden.term(1).pieces)
        pieces[0] = Polynomial([0, 0, -1], exact=True)
        perturbed = GammaSeries([golden.term(0), PiecewiseField(self.grid, pieces, exact=True)])
        report = verify_projector(perturbed)
        self.assertFalse(report.ok_through(1))
        self.assertTrue(report.ok_through(0))
        self.assertEqual(report.find(1, NORMALIZATION, "e_0").value, F(-1, 6))

    def test_missing_first_order_term_breaks_edge_mean(self):
        series = GammaSeries([PiecewiseField.characteristic(self.grid, 0)])
        report = verify_projector(series, through=1)
        self.assertTrue(report.ok_through(0))
        self.assertEqual(report.find(1, EDGE_MEAN, "edge 0|1").value, 1)
        self.assertEqual(report.find(1, EDGE_MEAN, "edge -1|0").value, -1)

    def test_report_rows(self):
        rows = verify_projector(printed_series(self.grid)).to_rows()
        self.assertEqual(set(rows[0]), {"order", "constraint", "location", "value"})
        with self.assertRaises(KeyError):
            verify_projector(printed_series(self.grid)).find(5, DUAL, "nowhere")


if __name__ == "__main__":
    unittest.main()
