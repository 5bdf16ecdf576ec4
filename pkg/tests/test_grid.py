import math
import unittest

import numpy as np
from numpy.testing import assert_allclose

from cnskspectral import grid as gridmod, exceptions
from cnskspectral.grid import (
    make_grid,
    ScalarField,
    VectorField,
    Direction,
    Representation,
    transform,
)
from cnskspectral.lowfreq import AnalyticDatum


def sine_field(grid):
    x1, _ = grid.coordinates
    return ScalarField.physical(grid, np.sin(x1))


class MakeGridTest(unittest.TestCase):
    def test_spacing(self):
        grid = make_grid(8, math.pi)
        self.assertAlmostEqual(grid.dx, math.pi / 4)
        self.assertAlmostEqual(grid.dxi, 1.0)
        self.assertAlmostEqual(grid.max_wavenumber, 3.0)

    def test_spacing_on_larger_box(self):
        grid = make_grid(8, 2 * math.pi)
        self.assertAlmostEqual(grid.dxi, 0.5)
        self.assertAlmostEqual(grid.max_wavenumber, 1.5)

    def test_wavenumber_ordering(self):
        grid = make_grid(8, math.pi)
        self.assertEqual(list(grid.k), [0, 1, 2, 3, -4, -3, -2, -1])
        self.assertEqual(grid.xi1[0, 1], 1.0)
        self.assertEqual(grid.xi2[1, 0], 1.0)

    def test_rejects_invalid_sizes(self):
        for n, half_width in ((12, 1.0), (4, 1.0), (8, 0.0), (8, float("inf"))):
            with self.subTest(n=n, half_width=half_width):
                self.assertRaises(
                    exceptions.ParameterDomainError, make_grid, n, half_width
                )

    def test_nyquist_mask(self):
        grid = make_grid(8, math.pi)
        i2, i1 = grid.index_of(-4, 1)
        self.assertEqual(grid.nyquist_mask[i2, i1], 0.0)
        self.assertEqual(grid.nyquist_mask[grid.index_of(3, 3)], 1.0)

    def test_index_of(self):
        grid = make_grid(8, math.pi)
        self.assertEqual(grid.index_of(0, 0), (0, 0))
        self.assertEqual(grid.index_of(-1, 2), (2, 7))
        self.assertEqual(grid.index_of(-4, 0), (0, 4))
        self.assertRaises(exceptions.ParameterDomainError, grid.index_of, 4, 0)

    def test_box_horizon(self):
        grid = make_grid(8, 32 * math.pi)
        self.assertAlmostEqual(grid.box_horizon(1.0), 51.2)

    def test_wraparound_margin(self):
        grid = make_grid(8, 10.0)
        self.assertEqual(grid.wraparound_margin(2.0, 1.0, 3.0), 5.0)


class FieldTest(unittest.TestCase):
    def setUp(self):
        self.grid = make_grid(8, math.pi)

    def test_values_are_read_only(self):
        field = ScalarField.zeros(self.grid)
        with self.assertRaises(ValueError):
            field.values[0, 0] = 1.0

    def test_wrong_shape(self):
        self.assertRaises(
            exceptions.ParameterDomainError,
            VectorField.spectral,
            self.grid,
            np.zeros(self.grid.shape),
        )

    def test_arithmetic(self):
        field = ScalarField.spectral(self.grid, np.ones(self.grid.shape))
        assert_allclose((2 * field - field).values, 1.0)
        assert_allclose((-field).values, -1.0)

    def test_representation_mismatch(self):
        self.assertRaises(
            exceptions.RepresentationMismatch,
            lambda: ScalarField.zeros(self.grid)
            + ScalarField.zeros(self.grid, Representation.PHYSICAL),
        )

    def test_different_grids(self):
        other = make_grid(16, math.pi)
        self.assertRaises(
            exceptions.ParameterDomainError,
            lambda: ScalarField.zeros(self.grid) + ScalarField.zeros(other),
        )

    def test_different_kinds(self):
        self.assertRaises(
            TypeError,
            lambda: ScalarField.zeros(self.grid) + VectorField.zeros(self.grid),
        )

    def test_component(self):
        values = np.zeros((2,) + self.grid.shape)
        values[1] = 3.0
        component = VectorField.spectral(self.grid, values).component(1)
        self.assertIsInstance(component, ScalarField)
        assert_allclose(component.values, 3.0)


class TransformTest(unittest.TestCase):
    def setUp(self):
        self.grid = make_grid(16, math.pi)

    def test_constant_field_maps_to_its_integral(self):
        ones = ScalarField.physical(self.grid, np.ones(self.grid.shape))
        spectral = transform(ones, Direction.FORWARD)
        self.assertAlmostEqual(spectral.values[0, 0].real, 4 * math.pi ** 2)
        spectral_values = np.array(spectral.values)
        spectral_values[0, 0] = 0
        assert_allclose(spectral_values, 0.0, atol=1e-12)

    def test_inverse_undoes_forward(self):
        field = sine_field(self.grid)
        back = transform(transform(field, Direction.FORWARD), Direction.INVERSE)
        self.assertIs(back.representation, Representation.PHYSICAL)
        assert_allclose(back.values, field.values, atol=1e-13)

    def test_transform_requires_matching_representation(self):
        field = ScalarField.zeros(self.grid)
        self.assertRaises(
            exceptions.RepresentationMismatch, transform, field, Direction.FORWARD
        )

    def test_norms(self):
        ones = ScalarField.physical(self.grid, np.ones(self.grid.shape))
        self.assertAlmostEqual(gridmod.l2_norm(transform(ones, "forward")), 2 * math.pi)
        self.assertAlmostEqual(gridmod.l1_norm(ones), 4 * math.pi ** 2)

    def test_l2_norm_requires_spectral_field(self):
        self.assertRaises(
            exceptions.RepresentationMismatch,
            gridmod.l2_norm,
            sine_field(self.grid),
        )

    def test_inner_product(self):
        spectral = transform(sine_field(self.grid), Direction.FORWARD)
        self.assertAlmostEqual(gridmod.inner(spectral, spectral), 2 * math.pi ** 2)
        self.assertAlmostEqual(gridmod.l2_norm(spectral) ** 2, 2 * math.pi ** 2)

    def test_parseval_on_random_fields(self):
        rng = np.random.default_rng(11)
        for n, half_width in ((16, math.pi), (32, 5.0), (64, 40.0)):
            with self.subTest(n=n):
                grid = make_grid(n, half_width)
                f = ScalarField.physical(grid, rng.normal(size=grid.shape))
                g = ScalarField.physical(grid, rng.normal(size=grid.shape))
                f_hat, g_hat = transform(f, "forward"), transform(g, "forward")
                self.assertAlmostEqual(
                    gridmod.l2_norm(f_hat) ** 2 / (grid.dx ** 2 * np.sum(f.values.real ** 2)),
                    1.0,
                    places=12,
                )
                assert_allclose(
                    gridmod.inner(f_hat, g_hat),
                    grid.dx ** 2 * np.sum(f.values.real * g.values.real),
                    rtol=1e-10,
                    atol=1e-10,
                )

    def test_vector_parseval(self):
        grid = make_grid(32, 2 * math.pi)
        values = np.random.default_rng(5).normal(size=(2,) + grid.shape)
        m = VectorField.physical(grid, values)
        self.assertAlmostEqual(
            gridmod.l2_norm(transform(m, "forward")) ** 2 / (grid.dx ** 2 * np.sum(values ** 2)),
            1.0,
            places=12,
        )

    def test_gaussian_transform_converges_with_resolution(self):
        datum = AnalyticDatum("gaussian", center=(0.5, -0.25))
        errors = []
        for n in (16, 32, 64, 128):
            grid = make_grid(n, 12.0)
            x1, x2 = grid.coordinates
            physical = ScalarField.physical(grid, datum.evaluate(x1, x2))
            hat = transform(physical, Direction.FORWARD).values * grid.nyquist_mask
            errors.append(float(np.max(np.abs(hat - datum.sample(grid).values))))
        self.assertGreater(errors[0], 1e-8)
        self.assertTrue(all(error < 1e-8 for error in errors[1:]), errors)

    def test_hermitian_symmetry(self):
        values = np.random.default_rng(7).normal(size=self.grid.shape)
        spectral = transform(ScalarField.physical(self.grid, values), Direction.FORWARD)
        self.assertTrue(gridmod.is_hermitian(spectral))
        self.assertFalse(gridmod.is_hermitian(1j * spectral))


class ApplySymbolTest(unittest.TestCase):
    def setUp(self):
        self.grid = make_grid(16, math.pi)
        self.spectral = transform(sine_field(self.grid), Direction.FORWARD)

    def test_gradient(self):
        gradient = transform(self.spectral.gradient(), Direction.INVERSE)
        x1, _ = self.grid.coordinates
        assert_allclose(gradient.values[0].real, np.cos(x1), atol=1e-12)
        assert_allclose(gradient.values[1], 0.0, atol=1e-12)

    def test_divergence_of_gradient(self):
        laplacian = transform(self.spectral.gradient().divergence(), Direction.INVERSE)
        x1, _ = self.grid.coordinates
        assert_allclose(laplacian.values.real, -np.sin(x1), atol=1e-12)

    def test_callable_symbol(self):
        result = gridmod.apply_symbol(self.spectral, lambda grid: -grid.xi_sq)
        assert_allclose(result.values, -self.spectral.values, atol=1e-10)

    def test_incompatible_symbol(self):
        self.assertRaises(
            exceptions.ParameterDomainError,
            gridmod.apply_symbol,
            self.spectral,
            np.ones((2, 2) + self.grid.shape),
        )

    def test_physical_field_is_rejected(self):
        self.assertRaises(
            exceptions.RepresentationMismatch,
            gridmod.apply_symbol,
            sine_field(self.grid),
            np.ones(self.grid.shape),
        )


class SnapshotTest(unittest.TestCase):
    def setUp(self):
        self.grid = make_grid(8, math.pi)

    def test_layout(self):
        data = gridmod.snapshot_bytes(ScalarField.zeros(self.grid))
        self.assertEqual(len(data), 32 + 16 * 64)
        self.assertTrue(data.startswith(b"CNSKSNAP"))

    def test_vector_field_is_restored(self):
        values = np.arange(2 * 64).reshape((2,) + self.grid.shape) * (1 + 2j)
        field = VectorField.spectral(self.grid, values)
        restored = gridmod.snapshot_from_bytes(gridmod.snapshot_bytes(field))
        self.assertIsInstance(restored, VectorField)
        self.assertEqual(restored.grid, self.grid)
        assert_allclose(restored.values, values)

    def test_bad_magic(self):
        data = b"XXXXXXXX" + gridmod.snapshot_bytes(ScalarField.zeros(self.grid))[8:]
        self.assertRaises(exceptions.NonRetryableError, gridmod.snapshot_from_bytes, data)

    def test_field_rows(self):
        rows = list(gridmod.field_rows(ScalarField.zeros(self.grid)))
        self.assertEqual(rows[0], ["xi1", "xi2", "re0", "im0"])
        self.assertEqual(len(rows), 65)
        physical = list(gridmod.field_rows(VectorField.zeros(self.grid, Representation.PHYSICAL)))
        self.assertEqual(physical[0], ["x1", "x2", "re0", "im0", "re1", "im1"])
