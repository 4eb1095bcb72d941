"""Log-log scaling fits of moments and level-set measures across N."""
import logging
import math
from enum import Enum
from typing import List, Optional, Sequence

import numpy as np

from circle_lab.errors import InvalidRange, RangeViolation
from circle_lab.expsum import CoefficientSequence, grid_sample, nyquist_grid
from circle_lab.monitoring import track_performance
from circle_lab.restriction.levelsets import level_set_measure
from circle_lab.restriction.moments import moment_quadrature
from circle_lab.settings import get_settings
from circle_lab.surfaces import Family, SurfaceSystem, curve_exponent_ranges, exponent_table

logger = logging.getLogger(__name__)

MIN_FIT_POINTS = 4


class CoefficientRule(str, Enum):
    ALL_ONES = "all_ones"
    RANDOM_UNIT = "random_unit"


def _coefficients(sys: SurfaceSystem, N: int, rule: CoefficientRule, seed: int) -> CoefficientSequence:
    if rule is CoefficientRule.ALL_ONES:
        return CoefficientSequence.all_ones(sys, N)
    return CoefficientSequence.random_unit(sys, N, seed)


def _line_fit(N_list: Sequence[int], values: Sequence[float]) -> dict:
    x = np.log(np.asarray(N_list, dtype=np.float64))
    y = np.log(np.asarray(values, dtype=np.float64))
    slope, intercept = np.polyfit(x, y, 1)
    residuals = y - (slope * x + intercept)
    return {
        "slope": float(slope),
        "intercept": float(intercept),
        "residuals": [float(r) for r in residuals],
    }


def _check_sweep(N_list: Sequence[int]) -> List[int]:
    N_list = sorted(int(N) for N in N_list)
    if len(set(N_list)) < MIN_FIT_POINTS:
        raise InvalidRange(f"fits need at least {MIN_FIT_POINTS} distinct N, got {N_list}")
    if N_list[0] < 1:
        raise InvalidRange(f"N must be >= 1, got {N_list[0]}")
    return N_list


def predicted_moment_slope(sys: SurfaceSystem, p: float, rule: CoefficientRule) -> float:
    """
    Growth of int |F_a|^p in N: N^{max(pd - K, pd/2)} for flat coefficients,
    N^{pd/2} (square-root cancellation) for random phases.
    """
    half = p * sys.d / 2.0
    if rule is CoefficientRule.ALL_ONES:
        return max(p * sys.d - sys.K, half)
    return half


def scaling_fit(
    sys: SurfaceSystem,
    p: float,
    N_list: Sequence[int],
    a_rule: CoefficientRule = CoefficientRule.ALL_ONES,
    seed: int = 0,
) -> dict:
    """
    Least-squares slope of log int |F_a|^p against log N. Even p use Nyquist
    grids (exact); other p an oversampled grid with a refinement delta.
    """
    if p <= 0:
        raise InvalidRange(f"p must be > 0, got {p}")
    N_list = _check_sweep(N_list)
    a_rule = CoefficientRule(a_rule)
    even = float(p) == round(p) and int(round(p)) % 2 == 0
    s = int(round(p)) // 2 if even else int(math.ceil(p / 2.0))
    rows = []
    with track_performance("scaling_fit", p=p, points=len(N_list)):
        for N in N_list:
            a = _coefficients(sys, N, a_rule, seed)
            grid = nyquist_grid(sys, N, s, oversample=1 if even else 2)
            report = moment_quadrature(grid_sample(a, sys, grid), p, refine=not even)
            rows.append(
                {
                    "N": N,
                    "moment": report.value,
                    "l2_norm": a.l2_norm,
                    "grid": list(grid.dims),
                    "refinement_delta": report.refinement_delta,
                }
            )
            logger.info("Scaling fit point", extra={"N": N, "p": p, "moment": report.value})
    fit = _line_fit(N_list, [row["moment"] for row in rows])
    predicted = predicted_moment_slope(sys, p, a_rule)
    return {
        "system": sys.model_dump(mode="json"),
        "p": float(p),
        "a_rule": a_rule.value,
        "seed": seed,
        "rows": rows,
        "fit": fit,
        "predicted_slope": predicted,
        "deviation": fit["slope"] - predicted,
    }


def _validity_floor(sys: SurfaceSystem) -> float:
    if sys.family is Family.MONOMIAL_CURVE:
        return float(curve_exponent_ranges(sys.exponents).zeta)
    return float(exponent_table(sys).zeta_bound)


def predicted_level_slope(sys: SurfaceSystem) -> float:
    if sys.family is Family.KTH_POWERS:
        return -float(sys.k)
    if sys.family is Family.K_PARABOLOID:
        return -float(sys.k + sys.d)
    return -float(sys.K)


def level_set_exponent_fit(
    sys: SurfaceSystem,
    N_list: Sequence[int],
    eta: Optional[float] = None,
    eta_exponent: Optional[float] = None,
) -> dict:
    """
    Slope of log m(E_lambda) against log N at lambda = eta N^{d/2} ||a||_2 for
    a = 1, with either a fixed eta or eta = N^{-eta_exponent}.
    """
    if (eta is None) == (eta_exponent is None):
        raise InvalidRange("give exactly one of eta and eta_exponent")
    N_list = _check_sweep(N_list)
    zeta = _validity_floor(sys)
    oversample = get_settings().level_set_oversample
    rows = []
    with track_performance("level_set_exponent_fit", points=len(N_list)):
        for N in N_list:
            level = float(eta) if eta is not None else float(N) ** (-float(eta_exponent))
            if level > 1.0 or level <= float(N) ** (-zeta):
                raise RangeViolation(
                    f"eta={level:.4g} outside (N^-{zeta:.4g}, 1] at N={N}",
                    context={"N": N, "eta": level, "zeta": zeta},
                )
            a = CoefficientSequence.all_ones(sys, N)
            grid = nyquist_grid(sys, N, 1, oversample=oversample)
            table = grid_sample(a, sys, grid)
            lam = level * N ** (sys.d / 2.0) * a.l2_norm
            report = level_set_measure(table, lam, refine=False)
            if report.measure <= 0:
                raise RangeViolation(
                    f"empty level set at N={N}; fit refused",
                    context={"N": N, "eta": level, "lambda": lam},
                )
            rows.append({"N": N, "eta": level, "lambda": lam, "measure": report.measure})
            logger.info("Level set fit point", extra=rows[-1])
    fit = _line_fit(N_list, [row["measure"] for row in rows])
    predicted = predicted_level_slope(sys)
    return {
        "system": sys.model_dump(mode="json"),
        "eta": eta,
        "eta_exponent": eta_exponent,
        "zeta": zeta,
        "rows": rows,
        "fit": fit,
        "predicted_slope": predicted,
        "deviation": fit["slope"] - predicted,
    }
