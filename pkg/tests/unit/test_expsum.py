"""
Unit tests for exponential sums, torus grids and grid sampling.
"""
import numpy as np
import pytest

from circle_lab.errors import BudgetExceeded, DimensionMismatch, InvalidRange, UnsupportedFamily
from circle_lab.expsum import (
    CoefficientSequence,
    TorusGrid,
    eval_extension,
    eval_kernel,
    eval_kernel_direct,
    eval_weyl,
    expi,
    fold_coefficients,
    grid_sample,
    kernel_coefficients,
    kernel_grid_sample,
    make_rng,
    nyquist_grid,
    pairwise_sum,
    weyl_theta_scan,
)
from circle_lab.surfaces import SurfaceSystem, WeightProfile


@pytest.mark.unit
class TestPrimitives:
    """Test generators, phases and reductions."""

    def test_rng_is_seeded(self):
        assert np.array_equal(make_rng(7).random(5), make_rng(7).random(5))
        assert not np.array_equal(make_rng(7).random(5), make_rng(8).random(5))

    def test_expi(self):
        assert expi(0.25) == pytest.approx(1j)
        assert expi(3.5) == pytest.approx(-1.0)

    def test_pairwise_sum(self):
        values = np.arange(1, 5001, dtype=np.float64)
        assert pairwise_sum(values, chunk=7) == 5000 * 5001 / 2
        assert pairwise_sum(np.zeros(0)) == 0

    def test_pairwise_sum_along_axis(self):
        values = np.arange(12.0).reshape(3, 4)
        np.testing.assert_array_equal(pairwise_sum(values, axis=0, chunk=2), values.sum(axis=0))


@pytest.mark.unit
class TestCoefficientSequence:
    """Test coefficient sequences."""

    def test_all_ones(self, ones_cubes_4):
        assert len(ones_cubes_4) == 4
        assert ones_cubes_4.l2_norm == pytest.approx(2.0)
        assert ones_cubes_4.is_integral()

    def test_random_unit(self, cubes):
        a = CoefficientSequence.random_unit(cubes, 16, seed=3)
        np.testing.assert_allclose(np.abs(a.values), 1.0)
        assert not a.is_integral()
        assert a.normalized().l2_norm == pytest.approx(1.0)

    def test_support_must_fit_the_box(self):
        with pytest.raises(InvalidRange):
            CoefficientSequence(1, 2, [[3]], [1.0])

    def test_lengths_must_match(self):
        with pytest.raises(DimensionMismatch):
            CoefficientSequence(1, 2, [[1], [2]], [1.0])

    def test_kernel_coefficients(self, squares):
        """Window weights cover [-2N, 2N] and drop the zeros at the edge."""
        coeffs = kernel_coefficients(WeightProfile(N=4), squares)
        assert coeffs.points.min() == -7 and coeffs.points.max() == 7
        assert coeffs.values.real.max() == 1.0

    def test_kernel_needs_supported_family(self, twisted_cubic):
        with pytest.raises(UnsupportedFamily):
            kernel_coefficients(WeightProfile(N=4), twisted_cubic)


@pytest.mark.unit
class TestDirectEvaluation:
    """Test direct sums."""

    def test_extension_at_zero(self, ones_cubes_4, cubes):
        assert eval_extension(ones_cubes_4, cubes, [0.0]) == pytest.approx(4.0)

    def test_extension_at_half(self, ones_cubes_4, cubes):
        """e(n^3 / 2) alternates in sign with n."""
        assert abs(eval_extension(ones_cubes_4, cubes, [0.5])) < 1e-12

    def test_extension_dimension_checked(self, ones_cubes_4, cubes):
        with pytest.raises(DimensionMismatch):
            eval_extension(ones_cubes_4, cubes, [0.1, 0.2])

    def test_weyl_at_zero_is_window_sum(self, small_weight):
        assert eval_weyl(small_weight, 3, 0.0, 0.0) == pytest.approx(small_weight.window_sum())

    def test_weyl_needs_k_at_least_two(self, small_weight):
        with pytest.raises(InvalidRange):
            eval_weyl(small_weight, 1, 0.1, 0.0)

    def test_kernel_factorizes(self):
        """F(alpha, theta) = prod T(alpha, theta_i) matches the direct d-dim sum."""
        sys = SurfaceSystem.k_paraboloid(2, 3)
        w = WeightProfile(N=3)
        split = eval_kernel(w, sys, 0.1234, [0.2, 0.37])
        direct = eval_kernel_direct(w, sys, 0.1234, [0.2, 0.37])
        assert abs(split - direct) <= 1e-9 * max(1.0, abs(direct))

    def test_theta_scan_matches_direct(self, small_weight):
        alphas = [0.1, 0.3141]
        scan = weyl_theta_scan(small_weight, 3, alphas, n_theta=16)
        for i, alpha in enumerate(alphas):
            for j in (0, 5, 11):
                assert scan[i, j] == pytest.approx(abs(eval_weyl(small_weight, 3, alpha, j / 16)), abs=1e-9)


@pytest.mark.unit
class TestGrids:
    """Test torus grids and sampled tables."""

    def test_grid_points(self):
        grid = TorusGrid((4, 8), (0.5, 0.0))
        assert grid.r == 2 and grid.size == 32
        assert grid.point((1, 2)) == (0.75, 0.25)
        assert grid.doubled().dims == (8, 16)
        assert grid.without_offsets().offsets == (0.0, 0.0)

    def test_grid_validation(self):
        with pytest.raises(InvalidRange):
            TorusGrid((0,))
        with pytest.raises(DimensionMismatch):
            TorusGrid((4, 4), (0.1,))

    def test_grid_budget(self, settings_env):
        settings_env(budget=100)
        with pytest.raises(BudgetExceeded):
            TorusGrid((16, 16))

    def test_nyquist_grid(self, cubes):
        """M >= 2 s N^k + 1, rounded up to an FFT-friendly length."""
        grid = nyquist_grid(cubes, 4, 2)
        assert grid.dims[0] >= 257
        assert nyquist_grid(cubes, 4, 2, oversample=2).dims[0] >= 514
        with pytest.raises(InvalidRange):
            nyquist_grid(cubes, 4, 0)

    def test_grid_sample_matches_direct(self, cubes):
        a = CoefficientSequence.random_unit(cubes, 8, seed=1)
        grid = nyquist_grid(cubes, 8, 1)
        table = grid_sample(a, cubes, grid)
        for j in make_rng(2).integers(0, grid.dims[0], size=20):
            direct = eval_extension(a, cubes, grid.point((int(j),)))
            assert abs(table.values[int(j)] - direct) <= 1e-9 * max(1.0, abs(direct))

    def test_grid_sample_with_offsets(self, cubic_paraboloid):
        a = CoefficientSequence.random_unit(cubic_paraboloid, 2, seed=5)
        grid = nyquist_grid(cubic_paraboloid, 2, 1, offsets=(0.1, 0.2, 0.3))
        table = grid_sample(a, cubic_paraboloid, grid)
        index = (1, 3, 7)
        direct = eval_extension(a, cubic_paraboloid, grid.point(index))
        assert abs(table.values[index] - direct) <= 1e-9 * max(1.0, abs(direct))

    def test_parseval(self, cubes):
        """On a Nyquist grid the mean of |F_a|^2 is ||a||_2^2."""
        a = CoefficientSequence.random_unit(cubes, 10, seed=4)
        table = grid_sample(a, cubes, nyquist_grid(cubes, 10, 1))
        assert np.mean(table.modulus**2) == pytest.approx(a.l2_norm**2, rel=1e-12)

    def test_fold_coefficients(self, ones_cubes_4, cubes):
        """Folding keeps the total mass."""
        b = fold_coefficients(ones_cubes_4, cubes, TorusGrid((5,)))
        assert b.sum() == pytest.approx(4.0)

    def test_grid_dimension_checked(self, ones_cubes_4, cubes):
        with pytest.raises(DimensionMismatch):
            grid_sample(ones_cubes_4, cubes, TorusGrid((8, 8)))

    def test_provenance_and_resample(self, ones_cubes_4, cubes):
        table = grid_sample(ones_cubes_4, cubes, nyquist_grid(cubes, 4, 1))
        assert table.provenance["N"] == 4
        assert table.provenance["l2_norm"] == pytest.approx(2.0)
        assert table.sup() == pytest.approx(4.0)
        finer = table.resample(table.grid.doubled())
        assert finer.grid.dims == tuple(2 * m for m in table.grid.dims)

    def test_kernel_table_matches_weyl(self, cubes, small_weight):
        grid = TorusGrid((4099,))
        table = kernel_grid_sample(small_weight, cubes, grid)
        for j in (0, 17, 2048):
            expected = eval_weyl(small_weight, 3, j / 4099, 0.0)
            assert abs(table.values[j] - expected) <= 1e-9 * max(1.0, abs(expected))
