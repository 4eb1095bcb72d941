"""
Unit tests for log-log scaling fits.
"""
import pytest

from circle_lab.errors import InvalidRange, RangeViolation
from circle_lab.restriction import CoefficientRule, level_set_exponent_fit, scaling_fit
from circle_lab.restriction.fits import predicted_level_slope, predicted_moment_slope


@pytest.mark.unit
class TestScalingFit:
    """Test moment growth fits."""

    @pytest.mark.parametrize("rule", list(CoefficientRule))
    def test_second_moment_is_linear(self, cubes, rule):
        """int |F_a|^2 = N for unimodular a, so the slope is exactly 1."""
        report = scaling_fit(cubes, 2, [4, 6, 8, 10], rule, seed=1)
        assert report["fit"]["slope"] == pytest.approx(1.0, abs=1e-9)
        assert report["predicted_slope"] == 1.0
        assert abs(report["deviation"]) < 1e-9
        assert [row["N"] for row in report["rows"]] == [4, 6, 8, 10]

    def test_sweep_is_sorted(self, cubes):
        report = scaling_fit(cubes, 2, [10, 4, 8, 6])
        assert [row["N"] for row in report["rows"]] == [4, 6, 8, 10]

    def test_needs_four_points(self, cubes):
        with pytest.raises(InvalidRange):
            scaling_fit(cubes, 4, [4, 8, 8, 16])

    def test_p_range(self, cubes):
        with pytest.raises(InvalidRange):
            scaling_fit(cubes, 0, [4, 6, 8, 10])

    def test_predicted_slopes(self, cubes, cubic_paraboloid):
        assert predicted_moment_slope(cubes, 8, CoefficientRule.ALL_ONES) == 5.0
        assert predicted_moment_slope(cubes, 4, CoefficientRule.ALL_ONES) == 2.0
        assert predicted_moment_slope(cubes, 8, CoefficientRule.RANDOM_UNIT) == 4.0
        assert predicted_moment_slope(cubic_paraboloid, 8, CoefficientRule.ALL_ONES) == 11.0


@pytest.mark.unit
class TestLevelSetFit:
    """Test level-set measure fits."""

    def test_exactly_one_eta(self, cubes):
        with pytest.raises(InvalidRange):
            level_set_exponent_fit(cubes, [4, 6, 8, 10])
        with pytest.raises(InvalidRange):
            level_set_exponent_fit(cubes, [4, 6, 8, 10], eta=0.9, eta_exponent=0.1)

    def test_eta_above_one(self, cubes):
        with pytest.raises(RangeViolation):
            level_set_exponent_fit(cubes, [4, 6, 8, 10], eta=1.5)

    def test_eta_below_validity_floor(self, cubes):
        """eta must exceed N^{-1/8} for cubes."""
        with pytest.raises(RangeViolation):
            level_set_exponent_fit(cubes, [4, 6, 8, 10], eta=0.5)

    def test_measure_decays(self, cubes):
        report = level_set_exponent_fit(cubes, [8, 12, 16, 24], eta=0.9)
        assert report["zeta"] == 0.125
        assert all(row["measure"] > 0 for row in report["rows"])
        assert -4.0 < report["fit"]["slope"] < -2.0
        assert report["predicted_slope"] == -3.0

    def test_predicted_level_slopes(self, cubes, cubic_paraboloid, twisted_cubic):
        assert predicted_level_slope(cubes) == -3.0
        assert predicted_level_slope(cubic_paraboloid) == -5.0
        assert predicted_level_slope(twisted_cubic) == -6.0
