"""
Unit tests for surface systems, weights and the exponent calculus.
"""
from fractions import Fraction

import numpy as np
import pytest
from pydantic import ValidationError

from circle_lab.errors import DimensionMismatch, InvalidRange, OverflowRisk, UnsupportedFamily
from circle_lab.surfaces import (
    Family,
    Profile,
    SurfaceSystem,
    WeightProfile,
    combine_eps_removal,
    complete_subcritical,
    critical_exponent,
    curve_exponent_ranges,
    eta,
    eta_mass,
    evaluate_map,
    exponent_table,
    injectivity_check,
    tomas_stein_decomposition,
    weight,
    weight_array,
    weyl_exponent,
)


@pytest.mark.unit
class TestSurfaceSystem:
    """Test the three surface families."""

    def test_kth_powers_dimensions(self, cubes):
        """k-th powers map Z to Z with total degree k."""
        assert (cubes.d, cubes.r, cubes.K, cubes.degree) == (1, 1, 3, 3)
        assert cubes.coordinate_degrees == (3,)

    def test_paraboloid_dimensions(self, cubic_paraboloid):
        """The k-paraboloid has r = d + 1 and K = d + k."""
        assert (cubic_paraboloid.d, cubic_paraboloid.r, cubic_paraboloid.K) == (2, 3, 5)
        assert cubic_paraboloid.coordinate_degrees == (1, 1, 3)

    def test_curve_dimensions(self, twisted_cubic):
        """Monomial curves have r = t and K = sum of the exponents."""
        assert (twisted_cubic.r, twisted_cubic.K, twisted_cubic.degree) == (3, 6, 3)

    def test_json_form(self):
        """Systems serialize to the documented JSON shape and back."""
        sys = SurfaceSystem.model_validate({"family": "k_paraboloid", "d": 2, "k": 3})
        assert sys == SurfaceSystem.k_paraboloid(2, 3)
        assert sys.model_dump(mode="json")["family"] == "k_paraboloid"

    @pytest.mark.parametrize(
        "payload",
        [
            {"family": "kth_powers", "k": 1},
            {"family": "kth_powers", "k": 3, "d": 2},
            {"family": "monomial_curve", "exponents": [3, 1]},
            {"family": "monomial_curve", "exponents": []},
            {"family": "k_paraboloid", "d": 2, "k": 3, "exponents": [1]},
        ],
    )
    def test_invalid_systems_rejected(self, payload):
        """Invalid systems fail validation."""
        with pytest.raises(ValidationError):
            SurfaceSystem.model_validate(payload)

    def test_supports(self, cubes, cubic_paraboloid):
        """Powers live on [1, N], paraboloids on [-N, N]^d."""
        assert cubes.support(4).ravel().tolist() == [1, 2, 3, 4]
        box = cubic_paraboloid.support(1)
        assert box.shape == (9, 2)
        assert box.min() == -1 and box.max() == 1

    def test_map_points(self, cubic_paraboloid, twisted_cubic):
        """P is applied row by row in output order (theta first, alpha last)."""
        assert cubic_paraboloid.map_points(np.array([[1, 2]])).tolist() == [[1, 2, 9]]
        assert twisted_cubic.map_points(np.array([[2]])).tolist() == [[2, 4, 8]]

    def test_map_points_shape_checked(self, cubic_paraboloid):
        """Points must have d columns."""
        with pytest.raises(DimensionMismatch):
            cubic_paraboloid.map_points(np.array([[1, 2, 3]]))

    def test_overflow_guard(self, cubes):
        """Images that may leave 2^62 are refused."""
        with pytest.raises(OverflowRisk):
            cubes.map_points(np.array([[2**21]]))

    def test_evaluate_map(self, cubic_paraboloid):
        """Scalar evaluation in exact integers."""
        assert evaluate_map(cubic_paraboloid, (1, -2)) == (1, -2, -7)
        with pytest.raises(DimensionMismatch):
            evaluate_map(cubic_paraboloid, (1,))

    def test_frequency_extent(self, cubic_paraboloid):
        """Extents per coordinate, optionally over a wider radius."""
        assert cubic_paraboloid.frequency_extent(2) == (2, 2, 16)
        assert cubic_paraboloid.frequency_extent(2, radius=4) == (4, 4, 128)

    def test_injectivity(self, squares):
        """n -> n^2 is injective on [1, N]."""
        assert injectivity_check(squares, 6) is True


@pytest.mark.unit
class TestWeights:
    """Test the plateau weights."""

    def test_eta_plateau_and_support(self):
        """eta is 1 on [-1, 1], 1/2 at the middle of the transition, 0 from 2 on."""
        values = eta(Profile.QUINTIC_PLATEAU, [0.0, -1.0, 1.5, 2.0, 3.0])
        np.testing.assert_allclose(values, [1.0, 1.0, 0.5, 0.0, 0.0], atol=1e-15)

    def test_exp_bump_is_monotone(self):
        """The C-infinity profile decreases across the transition."""
        t = np.linspace(1.0, 2.0, 101)
        values = eta(Profile.EXP_BUMP, t)
        assert values[0] == 1.0 and values[-1] == 0.0
        assert np.all(np.diff(values) <= 0)

    def test_quintic_mass(self):
        """The quintic transition is antisymmetric about 3/2, so the mass is 3."""
        assert eta_mass(Profile.QUINTIC_PLATEAU) == pytest.approx(3.0, abs=1e-12)

    def test_omega_scaling(self):
        """omega(x) = eta(x / N)."""
        w = WeightProfile(N=4)
        np.testing.assert_allclose(w.omega([4, 6, 8]), [1.0, 0.5, 0.0], atol=1e-15)

    def test_product_weight(self):
        """omega_d multiplies the coordinates."""
        w = WeightProfile(N=4)
        assert weight(w, [0, 6]) == pytest.approx(0.5)
        np.testing.assert_allclose(weight_array(w, np.array([[0, 6], [8, 0]])), [0.5, 0.0])

    def test_window_sum(self):
        """The window sum approximates N times the mass."""
        w = WeightProfile(N=32)
        assert w.window_sum() == pytest.approx(32 * w.mass, rel=1e-3)


@pytest.mark.unit
class TestExponentCalculus:
    """Test the restriction ranges."""

    @pytest.mark.parametrize(
        "k, tau", [(2, Fraction(1, 2)), (3, Fraction(1, 4)), (4, Fraction(1, 8)), (6, Fraction(1, 30))]
    )
    def test_weyl_exponent(self, k, tau):
        assert weyl_exponent(k) == tau

    def test_cubes(self, cubes):
        """k=3 powers: truncated p > 6, full p > 18, level 1/8."""
        profile = exponent_table(cubes)
        assert profile.truncated_threshold == 6
        assert profile.full_threshold == 18
        assert profile.zeta_bound == Fraction(1, 8)
        assert profile.hypothesis_k_threshold == 6
        assert profile.critical == 6

    def test_cubic_paraboloid(self, cubic_paraboloid):
        """d=2, k=3 paraboloid: 8, 14, low-dimensional bound 12, critical 5."""
        profile = exponent_table(cubic_paraboloid)
        assert profile.truncated_threshold == 8
        assert profile.full_threshold == 14
        assert profile.lowdim_bound == 12
        assert profile.lowdim_valid is True
        assert profile.critical == 5

    def test_tau_override(self, cubes):
        """A better Weyl exponent moves the full threshold."""
        assert exponent_table(cubes, tau=Fraction(1, 3)).full_threshold == 14

    def test_tau_range_checked(self, cubes):
        with pytest.raises(InvalidRange):
            exponent_table(cubes, tau=1)

    def test_curves_use_their_own_table(self, twisted_cubic):
        with pytest.raises(UnsupportedFamily):
            exponent_table(twisted_cubic)

    def test_profile_serialization(self, cubes):
        """Thresholds are reported exactly and as floats."""
        data = exponent_table(cubes).to_dict()
        assert data["zeta_bound"] == {"exact": "1/8", "float": 0.125}
        assert data["lowdim_bound"] is None

    def test_complete_subcritical(self):
        """Interpolating with the L^2 bound gives 2 + 2k/(d tau)."""
        threshold = complete_subcritical(8, Fraction(1, 4), 2, d=2, K=5)
        assert threshold == 14

    def test_complete_subcritical_ranges(self):
        with pytest.raises(InvalidRange):
            complete_subcritical(5, Fraction(1, 4), 2, d=2, K=5)

    def test_tomas_stein_decomposition(self):
        """A supercritical major-arc bound yields level d tau / 2."""
        assert tomas_stein_decomposition(6, Fraction(1, 4), 2, 5) == (6, Fraction(1, 4))
        with pytest.raises(InvalidRange):
            tomas_stein_decomposition(5, Fraction(1, 4), 2, 5)

    def test_combine_eps_removal(self):
        assert combine_eps_removal(18, 19, Fraction(1, 8), 1, 3) is True
        with pytest.raises(InvalidRange):
            combine_eps_removal(18, 18, Fraction(1, 8), 1, 3)

    def test_consecutive_curve(self):
        """(1, 2, 3): integral p > 7, series p > 8, truncated q > 16."""
        ranges = curve_exponent_ranges([1, 2, 3])
        assert ranges.K == 6
        assert ranges.singular_integral_threshold == 7
        assert ranges.singular_series_threshold == 8
        assert ranges.truncated_threshold == 16
        assert ranges.conjectured == 12
        assert ranges.moment_method_threshold == 18
        assert ranges.zeta == Fraction(1, 8)

    def test_sparse_curve_with_high_degree(self):
        """(1, 4): ranges K, K+1 and 2K+2."""
        ranges = curve_exponent_ranges([1, 4])
        assert (ranges.singular_integral_threshold, ranges.truncated_threshold) == (5, 12)

    def test_unknown_curve_ranges(self):
        """(1, 3) has no classical range on record."""
        ranges = curve_exponent_ranges([1, 3])
        assert ranges.truncated_threshold is None
        assert ranges.to_dict()["truncated_threshold"] is None

    def test_critical_exponent(self, cubic_paraboloid):
        assert critical_exponent(cubic_paraboloid) == 5
        assert cubic_paraboloid.family is Family.K_PARABOLOID
