"""
The major-arc majorant V_{p,Q}, its Fourier coefficients, domination checks
against the smoothed Weyl kernel, and the band-limiting multiplier psi_N.
"""
import logging
import math
from functools import lru_cache
from typing import List, Sequence, Tuple

import numpy as np
import scipy.fft
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import integrate

from circle_lab.arcs import classify_arcs, torus_distance
from circle_lab.arith import truncated_divisor
from circle_lab.errors import BudgetExceeded, GridMismatch, InvalidRange, QuadratureFailure, check_budget
from circle_lab.expsum import FourierTable, fft_workers, make_rng, weyl_theta_scan
from circle_lab.monitoring import track_performance
from circle_lab.settings import get_settings
from circle_lab.surfaces import Family, SurfaceSystem, WeightProfile, weyl_exponent

logger = logging.getLogger(__name__)

MAX_MAJORANT_Q = 10**4


class MajorantParams(BaseModel):
    """Parameters of V_{p,Q}: exponent p >= k, level Q, epsilon, scale N, degree k."""

    model_config = ConfigDict(frozen=True)

    p: float
    Q: int = Field(ge=1)
    eps: float = Field(default_factory=lambda: get_settings().majorant_eps, gt=0)
    N: int = Field(ge=1)
    k: int = Field(ge=2)

    @model_validator(mode="after")
    def _check_range(self) -> "MajorantParams":
        if self.p < self.k:
            raise ValueError(f"need p >= k, got p={self.p}, k={self.k}")
        if self.Q > self.N**self.delta:
            logger.warning(
                "Q exceeds N^delta",
                extra={"Q": self.Q, "N": self.N, "delta": self.delta},
            )
        return self

    @property
    def tau(self) -> float:
        return float(weyl_exponent(self.k))

    @property
    def delta(self) -> float:
        """delta = k tau + eps, the admissible level exponent Q <= N^delta."""
        return self.k * self.tau + self.eps

    @property
    def decay(self) -> float:
        """p/k."""
        return self.p / self.k


def z_kernel(params: MajorantParams, theta):
    """Z_p(theta) = (1 + N^k ||theta||)^{-p/k}."""
    value = (1.0 + float(params.N) ** params.k * torus_distance(theta)) ** (-params.decay)
    return value[()] if np.ndim(value) == 0 else value


def majorant_eval(params: MajorantParams, theta):
    """V_{p,Q}(theta) = sum_{q <= Q} sum_{a mod q} q^{eps - p/k} Z_p(theta - a/q)."""
    if params.Q > MAX_MAJORANT_Q:
        raise BudgetExceeded(f"majorant level Q={params.Q} exceeds {MAX_MAJORANT_Q}")
    theta = np.asarray(theta, dtype=np.float64)
    flat = theta.ravel()
    check_budget(
        len(flat) * params.Q * (params.Q + 1) // 2,
        get_settings().operation_budget,
        "majorant evaluation",
    )
    total = np.zeros(len(flat))
    for q in range(1, params.Q + 1):
        shifts = np.arange(q) / q
        weight = q ** (params.eps - params.decay)
        total += weight * z_kernel(params, flat[:, None] - shifts[None, :]).sum(axis=1)
    total = total.reshape(theta.shape)
    return total[()] if total.ndim == 0 else total


def _quad_cos(f, a: float, b: float, omega: float) -> float:
    settings = get_settings()
    if omega == 0:
        result = integrate.quad(f, a, b, limit=settings.quad_limit, full_output=1)
    else:
        result = integrate.quad(
            f, a, b, weight="cos", wvar=omega, limit=settings.quad_limit, full_output=1
        )
    value, abserr = result[0], result[1]
    if len(result) > 3 and abserr > 1e-6 * abs(value) + 1e-13:
        raise QuadratureFailure(f"cosine quadrature: {result[3]}", context={"abserr": abserr})
    return float(value)


@lru_cache(maxsize=16384)
def _z_hat(N: int, k: int, decay: float, l: int) -> float:
    scale = float(N) ** k
    edges = [0.0]
    x = 1.0 / scale
    while x < 0.5:
        edges.append(x)
        x *= 2.0
    edges.append(0.5)

    def f(t):
        return (1.0 + scale * t) ** (-decay)

    omega = 2.0 * math.pi * l
    return 2.0 * sum(_quad_cos(f, a, b, omega) for a, b in zip(edges[:-1], edges[1:]))


def z_hat(params: MajorantParams, l: int) -> float:
    """Z^_p(l) = 2 int_0^{1/2} Z_p(t) cos(2 pi l t) dt over geometric panels."""
    return _z_hat(params.N, params.k, params.decay, abs(int(l)))


def divisor_weight(params: MajorantParams, l: int) -> float:
    """sum_{q <= Q, q | l} q^{eps + 1 - p/k}."""
    l = abs(int(l))
    exponent = params.eps + 1.0 - params.decay
    return float(sum(q**exponent for q in range(1, params.Q + 1) if l % q == 0))


def majorant_fourier(params: MajorantParams, l: int) -> float:
    """V^_{p,Q}(l) = (sum_{q <= Q, q | l} q^{eps+1-p/k}) Z^_p(l)."""
    return divisor_weight(params, l) * z_hat(params, l)


def majorant_fourier_direct(params: MajorantParams, l: int) -> float:
    """V^_{p,Q}(l) by quadrature of V between consecutive fractions a/q, q <= Q."""
    breaks = {0.0, 1.0}
    for q in range(1, params.Q + 1):
        for a in range(q):
            breaks.add(a / q)
            breaks.add((a / q + 0.5) % 1.0)
    coarse = sorted(breaks)
    # geometric refinement towards the peaks of width N^{-k}
    width = 1.0 / float(params.N) ** params.k
    for a, b in zip(coarse[:-1], coarse[1:]):
        step = width
        while step < 0.5 * (b - a):
            breaks.update((a + step, b - step))
            step *= 2.0
    breaks = sorted(breaks)
    omega = 2.0 * math.pi * abs(int(l))

    def f(t):
        return float(majorant_eval(params, t))

    with track_performance("majorant_fourier_direct", Q=params.Q, l=l):
        return sum(_quad_cos(f, a, b, omega) for a, b in zip(breaks[:-1], breaks[1:]) if b > a)


def majorant_divisor_bound_scan(params: MajorantParams, l_max: int) -> dict:
    """Fitted C_p in |V^(l)| <= C_p N^{-k} d(l, Q) over 1 <= l <= l_max."""
    ratios = []
    for l in range(1, l_max + 1):
        bound = float(params.N) ** (-params.k) * truncated_divisor(l, params.Q)
        ratios.append(abs(majorant_fourier(params, l)) / bound)
    worst = int(np.argmax(ratios))
    return {"C_p": float(ratios[worst]), "argmax_l": worst + 1, "l_max": l_max}


def z_l1_scan(p: float, k: int, N_list: Sequence[int]) -> dict:
    """N^k ||Z_p||_1 across N; bounded in N when p > k."""
    rows = []
    for N in N_list:
        params = MajorantParams(p=p, Q=1, N=N, k=k)
        rows.append({"N": N, "scaled_l1": z_hat(params, 0) * float(N) ** k})
    values = [r["scaled_l1"] for r in rows]
    drift = (max(values) - min(values)) / max(values) if values else 0.0
    return {"p": p, "k": k, "rows": rows, "drift": drift}


def domination_check(
    params: MajorantParams,
    w: WeightProfile,
    samples: int,
    seed: int = 0,
) -> dict:
    """
    C_major = max |F|^p / (N^p V) on the major arcs and C_minor =
    max |F| / (Q^{eps - 1/k} N) on the minor arcs, with F(alpha) = T(alpha, 0).
    alpha = 0 is always included.
    """
    alphas = np.concatenate([[0.0], make_rng(seed).random(max(samples - 1, 0))])
    with track_performance("domination_check", samples=len(alphas)):
        modulus = weyl_theta_scan(w, params.k, alphas, n_theta=1)[:, 0]
        major, _, _ = classify_arcs(alphas, params.Q, params.N, params.k)
        report = {
            "samples": len(alphas),
            "major_count": int(major.sum()),
            "minor_count": int((~major).sum()),
            "C_major": None,
            "C_minor": None,
        }
        if major.any():
            V = majorant_eval(params, alphas[major])
            ratio = (modulus[major] / params.N) ** params.p / V
            report["C_major"] = float(ratio.max())
        if (~major).any():
            scale = params.Q ** (params.eps - 1.0 / params.k) * params.N
            report["C_minor"] = float((modulus[~major] / scale).max())
    logger.info("Domination check", extra=dict(report))
    return report


def majorant_profile(
    params: MajorantParams, w: WeightProfile, thetas: Sequence[float]
) -> List[Tuple[float, float, float]]:
    """Rows (theta, V, |F|^p / N^p)."""
    thetas = np.asarray(thetas, dtype=np.float64)
    V = np.atleast_1d(majorant_eval(params, thetas))
    modulus = weyl_theta_scan(w, params.k, thetas, n_theta=1)[:, 0]
    scaled = (modulus / params.N) ** params.p
    return [(float(t), float(v), float(f)) for t, v, f in zip(thetas, V, scaled)]


# ---------------------------------------------------------------------------
# Band-limiting multiplier
# ---------------------------------------------------------------------------


def band_cutoffs(sys: SurfaceSystem, N: int) -> Tuple[int, ...]:
    """
    Plateau half-widths n_i of psi^_N, one per output coordinate: (2N)^k for
    k-th powers, 2N on paraboloid theta coordinates and d (2N)^k on alpha.
    """
    if sys.family is Family.K_PARABOLOID:
        return (2 * N,) * sys.d + (sys.d * (2 * N) ** sys.k,)
    return tuple((2 * N) ** e for e in sys.coordinate_degrees)


def trapezoid(j, n: float) -> np.ndarray:
    """1 on [-n, n], linear down to 0 at +-2n."""
    return np.clip(2.0 - np.abs(np.asarray(j, dtype=np.float64)) / n, 0.0, 1.0)


def band_multiplier(sys: SurfaceSystem, N: int, j) -> np.ndarray:
    """psi^_N(j) = prod_i trap(j_i; n_i) for j of shape (r,) or (m, r)."""
    j = np.asarray(j, dtype=np.float64)
    cutoffs = band_cutoffs(sys, N)
    if j.shape[-1] != len(cutoffs):
        raise InvalidRange(f"frequency vectors need {len(cutoffs)} coordinates")
    value = np.ones(j.shape[:-1])
    for i, n in enumerate(cutoffs):
        value = value * trapezoid(j[..., i], n)
    return value[()] if value.ndim == 0 else value


def apply_band_multiplier(table: FourierTable, sys: SurfaceSystem, N: int) -> FourierTable:
    """The table of H * psi_N: DFT, multiply by psi^_N at signed frequencies, invert."""
    grid = table.grid
    if any(grid.offsets):
        raise GridMismatch("band multiplier needs a table on a zero-offset grid")
    if grid.r != sys.r:
        raise GridMismatch(f"table has r={grid.r}, system has r={sys.r}")
    coeffs = scipy.fft.fftn(table.values, workers=fft_workers()) / grid.size
    multiplier = np.ones(grid.dims)
    for i, (m, n) in enumerate(zip(grid.dims, band_cutoffs(sys, N))):
        freqs = np.rint(scipy.fft.fftfreq(m) * m)
        shape = [1] * grid.r
        shape[i] = m
        multiplier = multiplier * trapezoid(freqs, n).reshape(shape)
    values = scipy.fft.ifftn(coeffs * multiplier, workers=fft_workers()) * grid.size
    provenance = dict(table.provenance, band_limited=True)
    return FourierTable(grid, values, provenance)


def band_multiplier_l1(n: int, oversample: int = 16) -> float:
    """||psi_N||_1 for one coordinate, by a fine-grid mean of |sum_j trap(j; n) e(j theta)|."""
    if n < 1:
        raise InvalidRange(f"n must be >= 1, got {n}")
    M = scipy.fft.next_fast_len(oversample * (4 * n + 1))
    check_budget(M, get_settings().budget, "multiplier grid points")
    freqs = np.rint(scipy.fft.fftfreq(M) * M)
    values = scipy.fft.ifft(trapezoid(freqs, n), workers=fft_workers()) * M
    return float(np.mean(np.abs(values)))
