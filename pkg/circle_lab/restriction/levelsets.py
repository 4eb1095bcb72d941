"""
Level sets E_lambda = {|F_a| >= lambda} measured on torus grids, and the
Tomas-Stein duality bound lambda^2 m(E)^2 <= ||a||^2 <g * |F|, g>.
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.fft

from circle_lab.errors import GridMismatch, InvalidRange
from circle_lab.expsum import FourierTable, TorusGrid, fft_workers, pairwise_sum

logger = logging.getLogger(__name__)

TOMAS_STEIN_SLACK = 1e-6


@dataclass(frozen=True)
class LevelSetReport:
    lam: float
    eta: float
    measure: float
    grid: TorusGrid
    refinement_delta: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "eta": self.eta,
            "measure": self.measure,
            "grid": self.grid.to_dict(),
            "refinement_delta": self.refinement_delta,
        }


def _measure(table: FourierTable, lam: float) -> float:
    return int(np.count_nonzero(table.modulus >= lam)) / table.grid.size


def normalization(table: FourierTable) -> float:
    """N^{d/2} ||a||_2, the level at which eta = 1 sits at the sup of a flat sequence."""
    prov = table.provenance
    d = int((prov.get("system") or {}).get("d", 1))
    return float(prov.get("N", 1.0)) ** (d / 2.0) * float(prov.get("l2_norm", 1.0))


def level_set_measure(table: FourierTable, lam: float, refine: bool = True) -> LevelSetReport:
    """Fraction of grid points with |F_a| >= lam, with the change under grid doubling."""
    if lam < 0:
        raise InvalidRange(f"lambda must be >= 0, got {lam}")
    measure = _measure(table, lam)
    delta = None
    if refine:
        finer = table.resample(table.grid.doubled())
        if finer is not None:
            delta = abs(_measure(finer, lam) - measure)
    return LevelSetReport(
        lam=float(lam),
        eta=float(lam) / normalization(table),
        measure=measure,
        grid=table.grid,
        refinement_delta=delta,
    )


def tomas_stein_check(table_Fa: FourierTable, table_F: FourierTable, lam: float) -> dict:
    """
    lhs = lam^2 m(E)^2 against rhs = ||a||_2^2 (1/M) sum_j g_j (g * |F|)_j with
    (g * |F|)_j = (1/M) sum_i g_i |F|(x_j - x_i). The kernel table must share
    the dims of the F_a table and carry zero offsets.
    """
    if lam < 0:
        raise InvalidRange(f"lambda must be >= 0, got {lam}")
    if table_Fa.grid.dims != table_F.grid.dims:
        raise GridMismatch(
            "tables live on different grids",
            context={"Fa": list(table_Fa.grid.dims), "F": list(table_F.grid.dims)},
        )
    if any(table_F.grid.offsets):
        raise GridMismatch("the kernel table must be sampled at zero offsets")
    size = table_Fa.grid.size
    g = (table_Fa.modulus >= lam).astype(np.float64)
    measure = float(g.sum()) / size
    workers = fft_workers()
    conv = scipy.fft.ifftn(
        scipy.fft.fftn(g, workers=workers) * scipy.fft.fftn(table_F.modulus, workers=workers),
        workers=workers,
    ).real / size
    l2_sq = float(table_Fa.provenance.get("l2_norm", 1.0)) ** 2
    lhs = float(lam) ** 2 * measure**2
    rhs = l2_sq * float(pairwise_sum(np.ravel(g * conv))) / size
    holds = lhs <= rhs * (1.0 + TOMAS_STEIN_SLACK)
    report = {
        "lambda": float(lam),
        "measure": measure,
        "lhs": lhs,
        "rhs": rhs,
        "holds": bool(holds),
        "slack": rhs / lhs if lhs > 0 else None,
    }
    if not holds:
        logger.warning("Tomas-Stein inequality violated", extra=report)
    return report
