"""
Major/minor arc decomposition of the smoothed kernel F on a torus grid.

Each arc mollifier Phi_{Q,s} multiplies F along the alpha coordinate (the
last one), giving a piece whose Fourier coefficients are
omega_d(l) Phi^(m - |l|_k^k). The corrected variant subtracts a multiple of
rho from every mollifier so each piece has mean zero, and absorbs the
subtracted mass into the minor arc part.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, Optional, Tuple

import numpy as np
import scipy.fft

from circle_lab.arcs import (
    MollifierFamily,
    arc_mollifier,
    lambda_rho,
    mollifier_fourier,
    mollifier_fourier_array,
    rho_fourier,
    rho_fourier_array,
)
from circle_lab.errors import GridMismatch, InvalidRange, MissingPieces, UnsupportedFamily
from circle_lab.expsum import (
    FourierTable,
    TorusGrid,
    fft_workers,
    kernel_coefficients,
    kernel_grid_sample,
    make_rng,
    nyquist_grid,
)
from circle_lab.monitoring import track_performance
from circle_lab.surfaces import Family, SurfaceSystem, WeightProfile, weyl_exponent

logger = logging.getLogger(__name__)

PieceKey = Tuple[int, int]


class Variant(str, Enum):
    PLAIN = "plain"
    CORRECTED = "corrected"


def decomposition_grid(sys: SurfaceSystem, N: int) -> TorusGrid:
    """Zero-offset grid resolving every frequency of the kernel F."""
    return nyquist_grid(sys, N, 1, radius=2 * N)


@dataclass
class KernelDecomposition:
    variant: Variant
    system: SurfaceSystem
    weight: WeightProfile
    family: MollifierFamily
    grid: TorusGrid
    F: FourierTable = field(repr=False)
    major: np.ndarray = field(repr=False)
    minor: np.ndarray = field(repr=False)
    minor_factor: float
    pieces: Dict[PieceKey, np.ndarray] = field(default_factory=dict, repr=False)
    piece_means: Dict[PieceKey, float] = field(default_factory=dict)
    rho_mean: float = 0.0
    Q1: Optional[int] = None
    F1: Optional[np.ndarray] = field(default=None, repr=False)
    F2: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def N(self) -> int:
        return self.family.N

    def completeness_error(self) -> float:
        """max |F - (F_major + F_minor)| over the grid."""
        return float(np.max(np.abs(self.F.values - (self.major + self.minor))))

    def _alpha(self) -> np.ndarray:
        return self.grid.axis(self.grid.r - 1)

    def piece_weight(self, Q: int, s: int) -> np.ndarray:
        """The alpha-weight of piece (Q, s) on the grid's alpha axis."""
        alpha = self._alpha()
        weight = np.asarray(arc_mollifier(self.family, Q, s, alpha), dtype=np.float64)
        if self.variant is Variant.CORRECTED:
            _, rho = lambda_rho(self.family, alpha)
            weight = weight - (self.piece_means[(Q, s)] / self.rho_mean) * rho
        return weight

    def piece_weight_hat(self, Q: int, s: int, n) -> np.ndarray:
        """Fourier coefficients of the alpha-weight of piece (Q, s)."""
        n = np.asarray(n, dtype=np.int64)
        values = mollifier_fourier_array(self.family, Q, s, n)
        if self.variant is Variant.CORRECTED:
            values = values - (self.piece_means[(Q, s)] / self.rho_mean) * rho_fourier_array(self.family, n)
        return values

    def summary(self) -> dict:
        return {
            "variant": self.variant.value,
            "system": self.system.model_dump(mode="json"),
            "N": self.N,
            "k": self.family.k,
            "c1": str(self.family.c1),
            "Q1": self.Q1,
            "grid": self.grid.to_dict(),
            "levels": list(self.family.levels),
            "retained": [list(key) for key in sorted(self.pieces)],
            "minor_factor": self.minor_factor,
            "rho_mean": self.rho_mean,
            "completeness_error": self.completeness_error(),
            "sup_F": self.F.sup(),
            "sup_major": float(np.abs(self.major).max()),
            "sup_minor": float(np.abs(self.minor).max()),
        }


def _broadcast_alpha(weight: np.ndarray, r: int) -> np.ndarray:
    return weight.reshape((1,) * (r - 1) + (-1,))


def kernel_decompose(
    w: WeightProfile,
    sys: SurfaceSystem,
    fam: MollifierFamily,
    grid: TorusGrid,
    variant: Variant = Variant.PLAIN,
    Q1: Optional[int] = None,
    retain: Optional[Iterable[PieceKey]] = None,
) -> KernelDecomposition:
    """
    F = F_major + F_minor with F_major the sum of all pieces. ``retain`` picks
    the (Q, s) pieces whose tables are kept; None keeps every piece.
    """
    if sys.family is Family.MONOMIAL_CURVE:
        raise UnsupportedFamily("kernel decompositions exist for kth_powers and k_paraboloid")
    if grid.r != sys.r:
        raise GridMismatch(f"grid has r={grid.r}, system has r={sys.r}")
    N = int(round(w.N))
    if fam.N != N or fam.k != sys.k:
        raise InvalidRange(
            "mollifier family does not match the kernel",
            context={"family_N": fam.N, "family_k": fam.k, "N": N, "k": sys.k},
        )
    variant = Variant(variant)
    all_keys = [(Q, s) for Q in fam.levels for s in fam.shifts(Q)]
    keep = set(all_keys) if retain is None else {tuple(key) for key in retain}
    unknown = keep.difference(all_keys)
    if unknown:
        raise MissingPieces(f"no such pieces: {sorted(unknown)}")

    with track_performance("kernel_decompose", variant=variant.value, points=grid.size):
        F = kernel_grid_sample(w, sys, grid)
        alpha = grid.axis(grid.r - 1)
        _, rho = lambda_rho(fam, alpha)
        means = {key: mollifier_fourier(fam, key[0], key[1], 0).real for key in all_keys}
        rho_mean = rho_fourier(fam, 0).real
        correction = 0.0
        if variant is Variant.CORRECTED:
            if rho_mean <= 0:
                raise InvalidRange("rho has non-positive mean; lower c1", context={"rho_mean": rho_mean})
            correction = sum(means.values()) / rho_mean

        total = np.zeros(len(alpha))
        low = np.zeros(len(alpha))
        pieces: Dict[PieceKey, np.ndarray] = {}
        for Q, s in all_keys:
            weight = np.asarray(arc_mollifier(fam, Q, s, alpha), dtype=np.float64)
            if variant is Variant.CORRECTED:
                weight = weight - (means[(Q, s)] / rho_mean) * rho
            total += weight
            if Q1 is not None and Q <= Q1:
                low += weight
            if (Q, s) in keep:
                pieces[(Q, s)] = F.values * _broadcast_alpha(weight, grid.r)

        minor_factor = 1.0 + correction
        major = F.values * _broadcast_alpha(total, grid.r)
        minor = F.values * _broadcast_alpha(minor_factor * rho, grid.r)
        F1 = F2 = None
        if Q1 is not None:
            F1 = F.values * _broadcast_alpha(low, grid.r)
            F2 = major - F1

    dcp = KernelDecomposition(
        variant=variant,
        system=sys,
        weight=w,
        family=fam,
        grid=grid,
        F=F,
        major=major,
        minor=minor,
        minor_factor=minor_factor,
        pieces=pieces,
        piece_means=means,
        rho_mean=rho_mean,
        Q1=Q1,
        F1=F1,
        F2=F2,
    )
    logger.info(
        "Kernel decomposed",
        extra={
            "variant": variant.value,
            "N": N,
            "pieces": len(all_keys),
            "completeness_error": dcp.completeness_error(),
        },
    )
    return dcp


def piece_bound_scan(dcp: KernelDecomposition, eps: float = 0.05) -> dict:
    """
    C(Q, s) = sup|piece| / (Q^0.01 (2^s/Q)^{d/k} N^{d(1-1/k)}) for every retained
    piece, plus sup|F_minor| against N^{d(1-tau)+eps}.
    """
    if not dcp.pieces:
        raise MissingPieces("the decomposition retains no pieces")
    d, k, N = dcp.system.d, dcp.family.k, dcp.N
    rows = []
    for (Q, s), piece in sorted(dcp.pieces.items()):
        sup = float(np.abs(piece).max())
        bound = Q**0.01 * ((1 << s) / Q) ** (d / k) * N ** (d * (1.0 - 1.0 / k))
        rows.append({"Q": Q, "s": s, "sup": sup, "bound": bound, "C": sup / bound})
    worst = max(rows, key=lambda row: row["C"])
    tau = float(weyl_exponent(k))
    minor_sup = float(np.abs(dcp.minor).max())
    return {
        "N": N,
        "d": d,
        "k": k,
        "variant": dcp.variant.value,
        "pieces": rows,
        "max_C": worst["C"],
        "argmax": {"Q": worst["Q"], "s": worst["s"]},
        "minor_sup": minor_sup,
        "minor_C": minor_sup / N ** (d * (1.0 - tau) + eps),
    }


def piece_fourier_check(
    dcp: KernelDecomposition, Q: int, s: int, samples: int = 64, seed: int = 0
) -> dict:
    """
    Grid DFT of piece (Q, s) against sum_n omega_d(n) Psi^(m - P_alpha(n)) at
    random frequencies, half of them next to the surface. Theta frequencies
    are matched modulo the grid and alpha aliases m + jM, |j| <= 1, included.
    """
    piece = dcp.pieces.get((Q, s))
    if piece is None:
        raise MissingPieces(f"piece (Q={Q}, s={s}) was not retained", context={"Q": Q, "s": s})
    grid = dcp.grid
    if any(grid.offsets):
        raise GridMismatch("piece Fourier checks need a zero-offset grid")
    hat = scipy.fft.fftn(piece, workers=fft_workers()) / grid.size

    coeffs = kernel_coefficients(dcp.weight, dcp.system)
    images = dcp.system.map_points(coeffs.points)
    theta_images, top = images[:, :-1], images[:, -1]
    omega = coeffs.values.real
    k, R = dcp.family.k, 2 * dcp.N
    M_alpha = grid.dims[-1]
    theta_dims = np.asarray(grid.dims[:-1], dtype=np.int64)

    rng = make_rng(seed)
    frequencies = []
    owners, freqs, weights = [], [], []
    for i in range(samples):
        ell = rng.integers(-R - 2, R + 3, size=grid.r - 1)
        if i % 2 == 0:
            base = int(top[rng.integers(0, len(top))]) if grid.r == 1 else int(np.sum(np.abs(ell) ** k))
            m = base + int(rng.integers(-4, 5))
        else:
            m = int(rng.integers(-(M_alpha // 2), M_alpha // 2 + 1))
        frequencies.append((tuple(int(x) for x in ell), m))
        if grid.r == 1:
            mask = np.ones(len(top), dtype=bool)
        else:
            mask = np.all(np.mod(theta_images - ell[None, :], theta_dims[None, :]) == 0, axis=1)
        for j in (-1, 0, 1):
            owners.append(np.full(int(mask.sum()), i))
            freqs.append(m + j * M_alpha - top[mask])
            weights.append(omega[mask])
    owners = np.concatenate(owners)
    freqs = np.concatenate(freqs)
    weights = np.concatenate(weights)
    expected = np.zeros(samples, dtype=np.complex128)
    if len(freqs):
        np.add.at(expected, owners, weights * dcp.piece_weight_hat(Q, s, freqs))

    errors = np.empty(samples)
    for i, (ell, m) in enumerate(frequencies):
        index = tuple(np.mod(ell, theta_dims)) + (m % M_alpha,)
        errors[i] = abs(hat[index] - expected[i])
    scale = float(np.abs(piece).mean())
    worst = int(np.argmax(errors))
    max_error = float(errors[worst])
    return {
        "Q": Q,
        "s": s,
        "variant": dcp.variant.value,
        "samples": samples,
        "max_error": max_error,
        "l1_scale": scale,
        "passes": bool(max_error <= 1e-6 * max(scale, 1.0)),
        "worst_frequency": {"l": list(frequencies[worst][0]), "m": frequencies[worst][1]},
    }
