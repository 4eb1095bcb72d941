"""
Performance benchmarks for circle-lab kernels.
"""
import pytest

from circle_lab import arcs, arith
from circle_lab.expsum import CoefficientSequence, eval_weyl, grid_sample, kernel_grid_sample, nyquist_grid
from circle_lab.restriction import decomposition_grid, even_moment_exact, kernel_decompose, moment_quadrature
from circle_lab.surfaces import WeightProfile


@pytest.mark.performance
class TestPerformanceBenchmarks:
    """Benchmarks for the hot paths."""

    def test_grid_sample_performance(self, cubes, benchmark):
        """Benchmark FFT sampling of F_a on a Nyquist grid."""
        a = CoefficientSequence.random_unit(cubes, 32, seed=0)
        grid = nyquist_grid(cubes, 32, 2)

        table = benchmark(grid_sample, a, cubes, grid)
        assert table.grid == grid

    def test_kernel_sample_performance(self, cubes, benchmark):
        grid = decomposition_grid(cubes, 16)
        benchmark(kernel_grid_sample, WeightProfile(N=16), cubes, grid)

    def test_moment_quadrature_performance(self, cubes, benchmark):
        """Benchmark non-even moments, which re-sample on the doubled grid."""
        a = CoefficientSequence.all_ones(cubes, 16)
        table = grid_sample(a, cubes, nyquist_grid(cubes, 16, 3, oversample=2))

        report = benchmark(moment_quadrature, table, 5.5)
        assert report.value > 0

    def test_exact_moment_performance(self, cubes, benchmark):
        a = CoefficientSequence.all_ones(cubes, 64)
        report = benchmark(even_moment_exact, a, cubes, 3)
        assert report.exact > 0

    def test_weyl_sum_performance(self, benchmark):
        benchmark(eval_weyl, WeightProfile(N=256), 3, 0.123456, 0.0)

    def test_ramanujan_performance(self, benchmark):
        def scan():
            return [arith.ramanujan_sum(q, n) for q in range(1, 101) for n in range(-50, 51)]

        benchmark(scan)

    def test_divisor_histogram_performance(self, benchmark):
        benchmark(arith.truncated_divisor_histogram, 64, 10**5)

    def test_mollifier_fourier_performance(self, benchmark):
        fam = arcs.MollifierFamily(k=3, N=32)

        def scan():
            return arcs.mollifier_fourier_scan(fam, 1, 0, 256)

        benchmark(scan)

    def test_decomposition_performance(self, cubes, benchmark):
        fam = arcs.MollifierFamily(k=3, N=8)
        grid = decomposition_grid(cubes, 8)

        dcp = benchmark(kernel_decompose, WeightProfile(N=8), cubes, fam, grid)
        assert dcp.completeness_error() <= 1e-10 * 8
