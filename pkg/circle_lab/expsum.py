"""
Exponential sums: the extension operator F_a, the Weyl sum T and the
smoothed kernel F, evaluated directly or sampled on torus grids.

Grid sampling folds the coefficients modulo the grid dims and applies one
multidimensional DFT, so a grid of prod(M) points costs O(#support + prod(M) log).
"""
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
import scipy.fft

from circle_lab.errors import DimensionMismatch, InvalidRange, UnsupportedFamily, check_budget
from circle_lab.monitoring import track_performance
from circle_lab.settings import get_settings
from circle_lab.surfaces import Family, SurfaceSystem, WeightProfile, weight_array

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based 64-bit generator; a seed fully determines every sample set."""
    return np.random.Generator(np.random.Philox(int(seed)))


def fft_workers() -> int:
    threads = get_settings().threads
    return -1 if threads is None else int(threads)


def expi(phase) -> np.ndarray:
    """e(x) = exp(2 pi i x) after reducing x modulo 1."""
    return np.exp(1j * TWO_PI * np.mod(phase, 1.0))


def pairwise_sum(values, axis: int = -1, chunk: Optional[int] = None):
    """
    Deterministic pairwise reduction: leaves of ``chunk`` terms are summed by
    numpy, then partial sums are combined along a fixed binary tree.
    """
    chunk = chunk or get_settings().pairwise_chunk
    v = np.moveaxis(np.asarray(values), axis, -1)
    length = v.shape[-1]
    if length == 0:
        return np.zeros(v.shape[:-1], dtype=v.dtype)[()]
    leaves = -(-length // chunk)
    pad = leaves * chunk - length
    if pad:
        v = np.concatenate([v, np.zeros(v.shape[:-1] + (pad,), dtype=v.dtype)], axis=-1)
    partial = v.reshape(v.shape[:-1] + (leaves, chunk)).sum(axis=-1)
    while partial.shape[-1] > 1:
        if partial.shape[-1] % 2:
            partial = np.concatenate(
                [partial, np.zeros(partial.shape[:-1] + (1,), dtype=partial.dtype)], axis=-1
            )
        partial = partial[..., 0::2] + partial[..., 1::2]
    return partial[..., 0][()]


# ---------------------------------------------------------------------------
# Coefficient sequences
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoefficientSequence:
    """Complex weights a(n) on lattice points of the box [-N, N]^d."""

    d: int
    N: int
    points: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        points = np.asarray(self.points, dtype=np.int64).reshape(-1, self.d)
        values = np.asarray(self.values, dtype=np.complex128).ravel()
        if len(points) != len(values):
            raise DimensionMismatch(
                f"{len(points)} points but {len(values)} values",
            )
        if points.size and int(np.abs(points).max()) > self.N:
            raise InvalidRange(f"support leaves the box [-{self.N}, {self.N}]^{self.d}")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "values", values)

    @cached_property
    def l2_norm(self) -> float:
        return float(np.sqrt(pairwise_sum(np.abs(self.values) ** 2)))

    @cached_property
    def l1_norm(self) -> float:
        return float(pairwise_sum(np.abs(self.values)))

    def __len__(self) -> int:
        return len(self.values)

    def conj(self) -> "CoefficientSequence":
        return CoefficientSequence(self.d, self.N, self.points, np.conj(self.values))

    def normalized(self) -> "CoefficientSequence":
        """Rescaled to unit l2 norm."""
        return CoefficientSequence(self.d, self.N, self.points, self.values / self.l2_norm)

    def is_integral(self) -> bool:
        """True when every a(n) is an integer (exact counting applies)."""
        v = self.values
        return bool(np.all(v.imag == 0) and np.all(v.real == np.round(v.real)))

    @classmethod
    def from_values(cls, sys: SurfaceSystem, N: int, values) -> "CoefficientSequence":
        """Coefficients on the family's support, given in support order."""
        points = sys.support(N)
        return cls(sys.d, N, points, values)

    @classmethod
    def all_ones(cls, sys: SurfaceSystem, N: int) -> "CoefficientSequence":
        points = sys.support(N)
        return cls(sys.d, N, points, np.ones(len(points)))

    @classmethod
    def random_unit(cls, sys: SurfaceSystem, N: int, seed: int) -> "CoefficientSequence":
        """Unimodular coefficients with uniform random phases."""
        points = sys.support(N)
        phases = make_rng(seed).random(len(points))
        return cls(sys.d, N, points, expi(phases))

    @classmethod
    def random_complex(cls, sys: SurfaceSystem, N: int, seed: int) -> "CoefficientSequence":
        """Gaussian complex coefficients."""
        points = sys.support(N)
        rng = make_rng(seed)
        values = rng.standard_normal(len(points)) + 1j * rng.standard_normal(len(points))
        return cls(sys.d, N, points, values)


def kernel_coefficients(w: WeightProfile, sys: SurfaceSystem) -> CoefficientSequence:
    """
    Window weights omega_d(n) on [-2N, 2N]^d defining the smoothed kernel
    F(x) = sum omega_d(n) e(P(n) . x).
    """
    if sys.family is Family.MONOMIAL_CURVE:
        raise UnsupportedFamily("smoothed kernels exist for kth_powers and k_paraboloid")
    radius = 2 * int(round(w.N))
    axis = np.arange(-radius, radius + 1, dtype=np.int64)
    if sys.d == 1:
        points = axis.reshape(-1, 1)
    else:
        mesh = np.meshgrid(*([axis] * sys.d), indexing="ij")
        points = np.stack([m.ravel() for m in mesh], axis=1)
    values = weight_array(w, points)
    keep = values > 0
    return CoefficientSequence(sys.d, radius, points[keep], values[keep])


# ---------------------------------------------------------------------------
# Direct evaluation
# ---------------------------------------------------------------------------


def _phases(images: np.ndarray, alpha: Sequence[float]) -> np.ndarray:
    phase = np.zeros(len(images))
    for i, a_i in enumerate(alpha):
        phase = phase + np.mod(images[:, i].astype(np.float64) * float(a_i), 1.0)
    return phase


def eval_extension(a: CoefficientSequence, sys: SurfaceSystem, alpha: Sequence[float]) -> complex:
    """F_a(alpha) = sum a(n) e(P(n) . alpha) by direct pairwise summation."""
    if a.d != sys.d:
        raise DimensionMismatch(f"coefficients have d={a.d}, system has d={sys.d}")
    alpha = np.atleast_1d(np.asarray(alpha, dtype=np.float64))
    if alpha.size != sys.r:
        raise DimensionMismatch(f"alpha needs {sys.r} coordinates, got {alpha.size}")
    images = sys.map_points(a.points)
    return complex(pairwise_sum(a.values * expi(_phases(images, alpha))))


def _weyl_terms(w: WeightProfile, k: int) -> Tuple[np.ndarray, np.ndarray]:
    radius = 2 * int(round(w.N))
    n = np.arange(-radius, radius + 1, dtype=np.int64)
    return n, w.omega(n)


def eval_weyl(w: WeightProfile, k: int, alpha: float, theta: float) -> complex:
    """T(alpha, theta) = sum_{|n| <= 2N} omega(n) e(alpha n^k + theta n)."""
    if k < 2:
        raise InvalidRange(f"Weyl sums need k >= 2, got {k}")
    n, omega = _weyl_terms(w, k)
    nf = n.astype(np.float64)
    phase = np.mod(nf**k * float(alpha), 1.0) + np.mod(nf * float(theta), 1.0)
    return complex(pairwise_sum(omega * expi(phase)))


def weyl_theta_scan(w: WeightProfile, k: int, alphas, n_theta: int = 64) -> np.ndarray:
    """
    |T(alpha, j/n_theta)| for every alpha and every j at once.

    Terms are folded by n mod n_theta, so one short DFT per alpha gives the
    whole theta grid. Returns an array of shape (len(alphas), n_theta).
    """
    n, omega = _weyl_terms(w, k)
    alphas = np.atleast_1d(np.asarray(alphas, dtype=np.float64))
    nk = n.astype(np.float64) ** k
    residues = np.mod(n, n_theta)
    out = np.empty((len(alphas), n_theta))
    block = max(1, 2**22 // max(len(n), 1))
    for start in range(0, len(alphas), block):
        a = alphas[start : start + block, None]
        terms = omega[None, :] * expi(nk[None, :] * a)
        folded = np.zeros((terms.shape[0], n_theta), dtype=np.complex128)
        for r in range(n_theta):
            mask = residues == r
            if mask.any():
                folded[:, r] = pairwise_sum(terms[:, mask], axis=-1)
        values = scipy.fft.ifft(folded, axis=-1, workers=fft_workers()) * n_theta
        out[start : start + block] = np.abs(values)
    return out


def eval_kernel(w: WeightProfile, sys: SurfaceSystem, alpha: float, theta: Sequence[float]) -> complex:
    """F(alpha, theta) = prod_i T(alpha, theta_i) for k-paraboloids."""
    if sys.family is not Family.K_PARABOLOID:
        raise UnsupportedFamily("eval_kernel splits only for k-paraboloids")
    theta = np.atleast_1d(np.asarray(theta, dtype=np.float64))
    if theta.size != sys.d:
        raise DimensionMismatch(f"theta needs {sys.d} coordinates, got {theta.size}")
    result = 1.0 + 0.0j
    for t in theta:
        result = result * eval_weyl(w, sys.k, alpha, float(t))
    return result


def eval_kernel_direct(
    w: WeightProfile, sys: SurfaceSystem, alpha: float, theta: Sequence[float]
) -> complex:
    """The same kernel by direct d-dimensional summation over [-2N, 2N]^d."""
    coeffs = kernel_coefficients(w, sys)
    point = list(np.atleast_1d(theta)) + [alpha]
    return eval_extension(coeffs, sys, point)


# ---------------------------------------------------------------------------
# Grids and tables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TorusGrid:
    """Uniform grid j/M + offset on the torus T^r."""

    dims: Tuple[int, ...]
    offsets: Tuple[float, ...] = ()

    def __post_init__(self):
        dims = tuple(int(m) for m in self.dims)
        offsets = tuple(float(o) % 1.0 for o in self.offsets) or (0.0,) * len(dims)
        if not dims or any(m < 1 for m in dims):
            raise InvalidRange(f"grid dims must be >= 1, got {dims}")
        if len(offsets) != len(dims):
            raise DimensionMismatch(f"{len(dims)} dims but {len(offsets)} offsets")
        check_budget(int(np.prod(dims, dtype=object)), get_settings().budget, "torus grid points")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "offsets", offsets)

    @property
    def r(self) -> int:
        return len(self.dims)

    @property
    def size(self) -> int:
        return int(np.prod(self.dims))

    def axis(self, i: int) -> np.ndarray:
        """Sample positions along coordinate i."""
        return np.arange(self.dims[i]) / self.dims[i] + self.offsets[i]

    def point(self, index: Sequence[int]) -> Tuple[float, ...]:
        return tuple(j / m + o for j, m, o in zip(index, self.dims, self.offsets))

    def doubled(self) -> "TorusGrid":
        return TorusGrid(tuple(2 * m for m in self.dims), self.offsets)

    def without_offsets(self) -> "TorusGrid":
        return TorusGrid(self.dims)

    def to_dict(self) -> dict:
        return {"dims": list(self.dims), "offsets": list(self.offsets)}


@dataclass
class FourierTable:
    """Samples of a trigonometric polynomial on a TorusGrid, shaped like grid.dims."""

    grid: TorusGrid
    values: np.ndarray = field(repr=False)
    provenance: Dict = field(default_factory=dict)
    resampler: Optional[Callable[[TorusGrid], "FourierTable"]] = field(
        default=None, repr=False, compare=False
    )

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128).reshape(self.grid.dims)

    @property
    def modulus(self) -> np.ndarray:
        return np.abs(self.values)

    def sup(self) -> float:
        return float(self.modulus.max())

    def resample(self, grid: TorusGrid) -> Optional["FourierTable"]:
        """Re-sample the source sum on another grid, when the source is retained."""
        if self.resampler is None:
            return None
        return self.resampler(grid)


def _fold(images: np.ndarray, weights: np.ndarray, grid: TorusGrid) -> np.ndarray:
    """b(m) = sum over P(n) = m mod M of a(n) e(P(n) . offsets)."""
    b = np.zeros(grid.dims, dtype=np.complex128)
    index = tuple(np.mod(images[:, i], grid.dims[i]) for i in range(grid.r))
    twisted = weights * expi(_phases(images, grid.offsets))
    np.add.at(b, index, twisted)
    return b


def _sample(images: np.ndarray, weights: np.ndarray, grid: TorusGrid) -> np.ndarray:
    b = _fold(images, weights, grid)
    return scipy.fft.ifftn(b, workers=fft_workers()) * grid.size


def grid_sample(a: CoefficientSequence, sys: SurfaceSystem, grid: TorusGrid) -> FourierTable:
    """values[j] = F_a(j/M + offsets) by folding plus one multidimensional DFT."""
    if grid.r != sys.r:
        raise DimensionMismatch(f"grid has r={grid.r}, system has r={sys.r}")
    if a.d != sys.d:
        raise DimensionMismatch(f"coefficients have d={a.d}, system has d={sys.d}")
    with track_performance("grid_sample", points=grid.size):
        values = _sample(sys.map_points(a.points), a.values, grid)
    provenance = {
        "sum": "F_a",
        "system": sys.model_dump(mode="json"),
        "N": a.N,
        "support_size": len(a),
        "l1_norm": a.l1_norm,
        "l2_norm": a.l2_norm,
    }
    return FourierTable(grid, values, provenance, lambda g: grid_sample(a, sys, g))


def kernel_grid_sample(w: WeightProfile, sys: SurfaceSystem, grid: TorusGrid) -> FourierTable:
    """Samples of the smoothed kernel F (powers: T(alpha, 0); paraboloids: prod T)."""
    coeffs = kernel_coefficients(w, sys)
    if grid.r != sys.r:
        raise DimensionMismatch(f"grid has r={grid.r}, system has r={sys.r}")
    with track_performance("kernel_grid_sample", points=grid.size):
        values = _sample(sys.map_points(coeffs.points), coeffs.values, grid)
    provenance = {
        "sum": "F",
        "system": sys.model_dump(mode="json"),
        "N": w.N,
        "profile": w.profile.value,
        "window_sum": float(coeffs.values.sum()),
    }
    return FourierTable(grid, values, provenance, lambda g: kernel_grid_sample(w, sys, g))


def fold_coefficients(a: CoefficientSequence, sys: SurfaceSystem, grid: TorusGrid) -> np.ndarray:
    """The folded coefficient array b behind grid_sample (Parseval checks)."""
    return _fold(sys.map_points(a.points), a.values, grid)


def nyquist_grid(
    sys: SurfaceSystem,
    N: int,
    s: int,
    radius: Optional[int] = None,
    offsets: Sequence[float] = (),
    oversample: int = 1,
) -> TorusGrid:
    """
    Smallest FFT-friendly grid with M_i >= 2s * extent_i + 1, on which the
    trapezoid rule integrates |F_a|^{2s} exactly. ``radius`` measures the
    extent over [-radius, radius]^d instead of the support (kernel tables).
    """
    if s < 1:
        raise InvalidRange(f"s must be >= 1, got {s}")
    extents = sys.frequency_extent(N, radius)
    dims = tuple(
        scipy.fft.next_fast_len(oversample * (2 * s * e + 1)) for e in extents
    )
    return TorusGrid(dims, tuple(offsets))
