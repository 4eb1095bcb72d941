"""Analytic functionals: moments, level sets, kernel decompositions, Weyl scans and fits."""

from circle_lab.restriction.decomposition import (
    KernelDecomposition,
    Variant,
    decomposition_grid,
    kernel_decompose,
    piece_bound_scan,
    piece_fourier_check,
)
from circle_lab.restriction.fits import (
    CoefficientRule,
    level_set_exponent_fit,
    scaling_fit,
)
from circle_lab.restriction.levelsets import LevelSetReport, level_set_measure, tomas_stein_check
from circle_lab.restriction.moments import (
    MomentMethod,
    MomentReport,
    even_moment_chain,
    even_moment_exact,
    even_moment_fourier,
    layer_cake_moment,
    moment_quadrature,
    truncated_moment,
)
from circle_lab.restriction.weyl import (
    oscillatory_integral,
    poisson_convergence_study,
    poisson_majorarc_check,
    weyl_minor_scan,
)

__all__ = [
    "CoefficientRule",
    "KernelDecomposition",
    "LevelSetReport",
    "MomentMethod",
    "MomentReport",
    "Variant",
    "decomposition_grid",
    "even_moment_chain",
    "even_moment_exact",
    "even_moment_fourier",
    "kernel_decompose",
    "layer_cake_moment",
    "level_set_exponent_fit",
    "level_set_measure",
    "moment_quadrature",
    "oscillatory_integral",
    "piece_bound_scan",
    "piece_fourier_check",
    "poisson_convergence_study",
    "poisson_majorarc_check",
    "scaling_fit",
    "tomas_stein_check",
    "truncated_moment",
    "weyl_minor_scan",
]
