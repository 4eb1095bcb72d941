"""
Unit tests for composite Gauss-Legendre quadrature.
"""
import math

import numpy as np
import pytest

from circle_lab.errors import QuadratureFailure
from circle_lab.quadrature import adaptive_panels, gauss_legendre, integrate_panels, panel_rule


@pytest.mark.unit
class TestPanelRules:
    """Test fixed composite rules."""

    def test_nodes_are_cached_read_only(self):
        nodes, weights = gauss_legendre(8)
        assert gauss_legendre(8)[0] is nodes
        assert weights.sum() == pytest.approx(2.0)
        with pytest.raises(ValueError):
            nodes[0] = 0.0

    def test_polynomials_are_exact(self):
        assert integrate_panels(lambda x: x**5, (0.0, 1.0), 1, nodes=4) == pytest.approx(1 / 6, rel=1e-14)

    def test_empty_intervals_skipped(self):
        x, w = panel_rule((0.0, 0.0, 1.0), (3, 2), nodes=4)
        assert len(x) == 8
        assert w.sum() == pytest.approx(1.0)

    def test_vectorized_family(self):
        """One call integrates a stack of integrands."""
        values = integrate_panels(lambda x: np.stack([np.sin(x), np.cos(x)]), (0.0, math.pi), 8)
        np.testing.assert_allclose(values, [2.0, 0.0], atol=1e-12)


@pytest.mark.unit
class TestAdaptivePanels:
    """Test panel doubling."""

    def test_sine(self):
        assert adaptive_panels(np.sin, (0.0, math.pi)) == pytest.approx(2.0, rel=1e-10)

    def test_oscillatory(self):
        value = adaptive_panels(lambda x: np.cos(200.0 * x), (0.0, 1.0), panels=4)
        assert value == pytest.approx(math.sin(200.0) / 200.0, abs=1e-9)

    def test_failure_after_max_depth(self):
        with pytest.raises(QuadratureFailure):
            adaptive_panels(np.sin, (0.0, math.pi), max_depth=0)
