"""
Moments of the extension operator.

Three routes to the even moment int |F_a|^{2s}: exact counting through the
weighted s-fold sum set, the trapezoid rule on a Nyquist grid, and Parseval
applied to the DFT of F_a^s. Truncated moments are cross-checked against
their layer-cake reconstruction.
"""
import logging
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Optional

import numpy as np
import scipy.fft

from circle_lab.arith import representation_table, sparse_convolve
from circle_lab.errors import InvalidRange, ToleranceCheckFailure
from circle_lab.expsum import (
    CoefficientSequence,
    FourierTable,
    fft_workers,
    grid_sample,
    nyquist_grid,
    pairwise_sum,
)
from circle_lab.monitoring import track_performance
from circle_lab.settings import get_settings
from circle_lab.surfaces import SurfaceSystem

logger = logging.getLogger(__name__)

LAYER_CAKE_RTOL = 1e-6


class MomentMethod(str, Enum):
    EXACT_EVEN = "exact_even"
    QUADRATURE = "quadrature"
    FOURIER = "fourier"


@dataclass(frozen=True)
class MomentReport:
    p: float
    value: float
    method: MomentMethod
    predicted_exponent: Optional[float] = None
    fitted_slope: Optional[float] = None
    refinement_delta: Optional[float] = None
    exact: Optional[int] = None

    def to_dict(self) -> dict:
        data = asdict(self)
        data["method"] = self.method.value
        return data


def predicted_exponent(sys: SurfaceSystem, p: float) -> float:
    """Scaling exponent dp/2 - K of the normalized moment."""
    return sys.d * p / 2.0 - sys.K


def _table_system(table: FourierTable) -> Optional[SurfaceSystem]:
    raw = table.provenance.get("system")
    return SurfaceSystem.model_validate(raw) if raw else None


def _grid_mean(values: np.ndarray) -> float:
    flat = np.ravel(values)
    return float(pairwise_sum(flat)) / flat.size


def _is_even_integer(p: float) -> bool:
    return float(p) == round(p) and int(round(p)) % 2 == 0


def even_moment_exact(a: CoefficientSequence, sys: SurfaceSystem, s: int) -> MomentReport:
    """
    int |F_a|^{2s} = sum_u |A_s(u)|^2 where A_s(u) sums a(n_1)...a(n_s) over
    P(n_1) + ... + P(n_s) = u. Integer coefficients give an exact integer.
    """
    if s < 1:
        raise InvalidRange(f"s must be >= 1, got {s}")
    integral = a.is_integral()
    base_p = sys.map_points(a.points)
    base_w = a.values.real.astype(np.int64) if integral else a.values
    points, weights = base_p, base_w
    with track_performance("even_moment_exact", s=s, support=len(a)):
        for _ in range(s - 1):
            points, weights = sparse_convolve(points, weights, base_p, base_w, "even moment")
    if integral:
        exact = int((weights.astype(object) ** 2).sum()) if len(weights) else 0
        value = float(exact)
    else:
        exact = None
        value = float(pairwise_sum(np.abs(weights) ** 2))
    logger.debug("even moment", extra={"s": s, "value": value, "targets": len(points)})
    return MomentReport(
        p=2.0 * s,
        value=value,
        method=MomentMethod.EXACT_EVEN,
        predicted_exponent=predicted_exponent(sys, 2 * s),
        exact=exact,
    )


def moment_quadrature(table: FourierTable, p: float, refine: Optional[bool] = None) -> MomentReport:
    """
    (1/prod M) sum |values|^p. Non-even p are re-sampled on the doubled grid
    (when the table retains its source) and the difference is reported.
    """
    if p <= 0:
        raise InvalidRange(f"p must be > 0, got {p}")
    value = _grid_mean(table.modulus**p)
    if refine is None:
        refine = not _is_even_integer(p)
    delta = None
    if refine:
        finer = table.resample(table.grid.doubled())
        if finer is not None:
            delta = abs(_grid_mean(finer.modulus**p) - value)
    sys = _table_system(table)
    return MomentReport(
        p=float(p),
        value=value,
        method=MomentMethod.QUADRATURE,
        predicted_exponent=predicted_exponent(sys, p) if sys else None,
        refinement_delta=delta,
    )


def even_moment_fourier(table: FourierTable, s: int) -> MomentReport:
    """||F_a^s||_2^2 as the sum of squared Fourier coefficients of F_a^s."""
    if s < 1:
        raise InvalidRange(f"s must be >= 1, got {s}")
    coeffs = scipy.fft.fftn(table.values**s, workers=fft_workers()) / table.grid.size
    sys = _table_system(table)
    return MomentReport(
        p=2.0 * s,
        value=float(pairwise_sum(np.ravel(np.abs(coeffs) ** 2))),
        method=MomentMethod.FOURIER,
        predicted_exponent=predicted_exponent(sys, 2 * s) if sys else None,
    )


def even_moment_chain(a: CoefficientSequence, sys: SurfaceSystem, s: int) -> dict:
    """
    ||F_a||_{2s}^{2s} <= ||R_s||_inf ||a||_2^{2s} <= ||F_1||_s^s ||a||_2^{2s},
    where F_1 is the extension of the indicator of the support.
    """
    moment = even_moment_exact(a, sys, s).value
    table = representation_table(sys, s, a.N)
    r_sup = int(table.counts.max()) if len(table) else 0
    a_pow = a.l2_norm ** (2 * s)
    ones = CoefficientSequence.all_ones(sys, a.N)
    if s % 2 == 0:
        window = even_moment_exact(ones, sys, s // 2).value
    else:
        oversample = get_settings().level_set_oversample
        grid = nyquist_grid(sys, a.N, s, oversample=oversample)
        window = moment_quadrature(grid_sample(ones, sys, grid), s, refine=False).value
    middle = r_sup * a_pow
    upper = window * a_pow
    tol = 1e-9 * max(1.0, upper)
    return {
        "s": s,
        "moment": moment,
        "r_sup": r_sup,
        "a_l2_power": a_pow,
        "window_moment": window,
        "middle": middle,
        "upper": upper,
        "first_holds": bool(moment <= middle + tol),
        "second_holds": bool(middle <= upper + tol),
    }


def layer_cake_moment(table: FourierTable, p: float, lambda_cut: float) -> float:
    """
    p int_{lambda_cut}^inf t^{p-1} m(E_t) dt + lambda_cut^p m(E_{lambda_cut}),
    integrated exactly over the step function t -> m(E_t) of the grid.
    """
    x = np.sort(table.modulus.ravel())
    x = x[x >= lambda_cut]
    n = len(x)
    levels = np.concatenate([[float(lambda_cut)], x])
    steps = (levels[1:] ** p - levels[:-1] ** p) * (n - np.arange(n))
    return (float(pairwise_sum(steps)) + float(lambda_cut) ** p * n) / table.grid.size


def truncated_moment(table: FourierTable, p: float, lambda_cut: float) -> float:
    """(1/prod M) sum over |F_a| >= lambda_cut of |F_a|^p, cross-checked by layer cake."""
    if p <= 0:
        raise InvalidRange(f"p must be > 0, got {p}")
    if lambda_cut < 0:
        raise InvalidRange(f"lambda_cut must be >= 0, got {lambda_cut}")
    modulus = table.modulus.ravel()
    kept = modulus[modulus >= lambda_cut]
    value = float(pairwise_sum(kept**p)) / table.grid.size
    reconstructed = layer_cake_moment(table, p, lambda_cut)
    if abs(value - reconstructed) > LAYER_CAKE_RTOL * max(abs(value), 1e-300):
        raise ToleranceCheckFailure(
            "truncated moment disagrees with its layer-cake reconstruction",
            context={"p": p, "lambda_cut": lambda_cut, "value": value, "layer_cake": reconstructed},
        )
    return value
