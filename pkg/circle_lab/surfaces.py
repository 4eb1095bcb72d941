"""
Polynomial surface systems, smooth weights and the exponent calculus.

A surface system is one of three families of integer polynomial maps
P : Z^d -> Z^r (k-th powers, k-paraboloids, monomial curves). Weights are the
plateau functions omega(x) = eta(x/N) with [-1,1] < eta < [-2,2]. The
exponent calculus turns the Weyl exponent tau into the restriction ranges
for each family and combines truncated and subcritical estimates.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from circle_lab.errors import (
    DimensionMismatch,
    InvalidRange,
    OverflowRisk,
    UnsupportedFamily,
)

logger = logging.getLogger(__name__)

INT_GUARD = 2**62

Rational = Union[int, float, Fraction]


class Family(str, Enum):
    """Supported surface families."""

    KTH_POWERS = "kth_powers"
    K_PARABOLOID = "k_paraboloid"
    MONOMIAL_CURVE = "monomial_curve"


class SurfaceSystem(BaseModel):
    """
    The polynomial system P with input dimension d, output dimension r and
    total degree K.

    Serialized as JSON, e.g. ``{"family": "kth_powers", "k": 3}``,
    ``{"family": "k_paraboloid", "d": 2, "k": 3}`` or
    ``{"family": "monomial_curve", "exponents": [1, 3]}``.
    """

    model_config = ConfigDict(frozen=True)

    family: Family
    k: Optional[int] = Field(default=None, ge=1)
    d: int = Field(default=1, ge=1)
    exponents: Optional[Tuple[int, ...]] = None

    @model_validator(mode="after")
    def _check_invariants(self) -> "SurfaceSystem":
        if self.family is Family.MONOMIAL_CURVE:
            exps = self.exponents
            if not exps:
                raise ValueError("monomial_curve needs a non-empty exponents tuple")
            if exps[0] < 1 or any(b <= a for a, b in zip(exps, exps[1:])):
                raise ValueError(f"exponents must be positive and strictly increasing: {exps}")
            if self.d != 1:
                raise ValueError("monomial_curve has input dimension d=1")
            return self
        if self.k is None or self.k < 2:
            raise ValueError(f"{self.family.value} needs degree k >= 2")
        if self.family is Family.KTH_POWERS and self.d != 1:
            raise ValueError("kth_powers has input dimension d=1")
        if self.exponents is not None:
            raise ValueError(f"{self.family.value} does not take exponents")
        return self

    @classmethod
    def kth_powers(cls, k: int) -> "SurfaceSystem":
        return cls(family=Family.KTH_POWERS, k=k)

    @classmethod
    def k_paraboloid(cls, d: int, k: int) -> "SurfaceSystem":
        return cls(family=Family.K_PARABOLOID, d=d, k=k)

    @classmethod
    def monomial_curve(cls, exponents: Sequence[int]) -> "SurfaceSystem":
        return cls(family=Family.MONOMIAL_CURVE, exponents=tuple(int(e) for e in exponents))

    @property
    def r(self) -> int:
        if self.family is Family.KTH_POWERS:
            return 1
        if self.family is Family.K_PARABOLOID:
            return self.d + 1
        return len(self.exponents)

    @property
    def K(self) -> int:
        if self.family is Family.KTH_POWERS:
            return self.k
        if self.family is Family.K_PARABOLOID:
            return self.d + self.k
        return sum(self.exponents)

    @property
    def degree(self) -> int:
        """Maximal degree of the components."""
        if self.family is Family.MONOMIAL_CURVE:
            return self.exponents[-1]
        return self.k

    @property
    def coordinate_degrees(self) -> Tuple[int, ...]:
        """Degree of each output coordinate, in output order."""
        if self.family is Family.KTH_POWERS:
            return (self.k,)
        if self.family is Family.K_PARABOLOID:
            return (1,) * self.d + (self.k,)
        return tuple(self.exponents)

    def support_bounds(self, N: int) -> Tuple[int, int]:
        """Per-coordinate range of the support: [1,N] or [-N,N]."""
        if self.family is Family.K_PARABOLOID:
            return -N, N
        return 1, N

    def support(self, N: int) -> np.ndarray:
        """Lattice points of the support as an (m, d) int64 array in lexicographic order."""
        if N < 1:
            raise InvalidRange(f"N must be >= 1, got {N}")
        lo, hi = self.support_bounds(N)
        axis = np.arange(lo, hi + 1, dtype=np.int64)
        if self.d == 1:
            return axis.reshape(-1, 1)
        mesh = np.meshgrid(*([axis] * self.d), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def map_points(self, points: np.ndarray) -> np.ndarray:
        """Vectorized P on an (m, d) int64 array; returns (m, r) int64."""
        points = np.asarray(points, dtype=np.int64)
        if points.ndim != 2 or points.shape[1] != self.d:
            raise DimensionMismatch(
                f"expected points of shape (m, {self.d}), got {points.shape}",
                context={"d": self.d},
            )
        max_abs = int(np.abs(points).max()) if points.size else 0
        guard = max_abs ** self.degree * (self.d if self.family is Family.K_PARABOLOID else 1)
        if guard > INT_GUARD:
            raise OverflowRisk(
                f"P(n) may exceed 2^62 for |n| <= {max_abs}",
                context={"max_abs": max_abs, "degree": self.degree},
            )
        if self.family is Family.KTH_POWERS:
            return points[:, :1] ** self.k
        if self.family is Family.K_PARABOLOID:
            top = (points**self.k).sum(axis=1, keepdims=True)
            return np.concatenate([points, top], axis=1)
        n = points[:, 0:1]
        return np.concatenate([n**e for e in self.exponents], axis=1)

    def frequency_extent(self, N: int, radius: Optional[int] = None) -> Tuple[int, ...]:
        """
        max |P_i(n)| over the support (or over [-radius, radius]^d when given),
        per output coordinate.
        """
        if radius is None:
            lo, hi = self.support_bounds(N)
            m = max(abs(lo), abs(hi))
        else:
            m = radius
        if self.family is Family.KTH_POWERS:
            return (m**self.k,)
        if self.family is Family.K_PARABOLOID:
            return (m,) * self.d + (self.d * m**self.k,)
        return tuple(m**e for e in self.exponents)


def evaluate_map(sys: SurfaceSystem, n: Sequence[int]) -> Tuple[int, ...]:
    """Return P(n) exactly in integer arithmetic."""
    n = tuple(int(x) for x in n)
    if len(n) != sys.d:
        raise DimensionMismatch(f"expected {sys.d} coordinates, got {len(n)}")
    if sys.family is Family.KTH_POWERS:
        out = (n[0] ** sys.k,)
    elif sys.family is Family.K_PARABOLOID:
        out = n + (sum(x**sys.k for x in n),)
    else:
        out = tuple(n[0] ** e for e in sys.exponents)
    if any(abs(c) > INT_GUARD for c in out):
        raise OverflowRisk(f"P({n}) leaves the 2^62 range", context={"n": list(n)})
    return out


def injectivity_check(sys: SurfaceSystem, N: int) -> bool:
    """Check by exhaustive hashing that P is injective on the support at scale N."""
    images = sys.map_points(sys.support(N))
    return len(np.unique(images, axis=0)) == len(images)


# ---------------------------------------------------------------------------
# Weights
# ---------------------------------------------------------------------------


class Profile(str, Enum):
    """Transition shapes for eta on 1 <= |x| <= 2."""

    QUINTIC_PLATEAU = "quintic_plateau"
    EXP_BUMP = "exp_bump"


def _smoothstep(u: np.ndarray) -> np.ndarray:
    return u * u * u * (u * (6.0 * u - 15.0) + 10.0)


def _exp_step(u: np.ndarray) -> np.ndarray:
    # C-infinity step from 0 at u=0 to 1 at u=1
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(u > 0, np.exp(-1.0 / np.where(u > 0, u, 1.0)), 0.0)
        b = np.where(u < 1, np.exp(-1.0 / np.where(u < 1, 1.0 - u, 1.0)), 0.0)
        return np.where(u <= 0, 0.0, np.where(u >= 1, 1.0, a / (a + b)))


def eta(profile: Profile, t) -> np.ndarray:
    """The unit-scale plateau eta: 1 on [-1,1], 0 outside (-2,2)."""
    t = np.abs(np.asarray(t, dtype=np.float64))
    u = np.clip(t - 1.0, 0.0, 1.0)
    step = _smoothstep(u) if profile is Profile.QUINTIC_PLATEAU else _exp_step(u)
    return np.where(t <= 1.0, 1.0, np.where(t >= 2.0, 0.0, 1.0 - step))


@lru_cache(maxsize=8)
def eta_mass(profile: Profile) -> float:
    """Integral of eta over the real line, by Gauss-Legendre on the smooth pieces."""
    nodes, weights = np.polynomial.legendre.leggauss(64)
    # transition on [1,2], mapped from [-1,1]
    x = 1.5 + 0.5 * nodes
    transition = 0.5 * float(np.dot(weights, eta(profile, x)))
    return 2.0 * (1.0 + transition)


class WeightProfile(BaseModel):
    """omega(x) = eta(x/N) with the chosen transition profile."""

    model_config = ConfigDict(frozen=True)

    N: float = Field(gt=0)
    profile: Profile = Profile.QUINTIC_PLATEAU

    def omega(self, x) -> np.ndarray:
        """One-dimensional weight, vectorized."""
        return eta(self.profile, np.asarray(x, dtype=np.float64) / self.N)

    def eta(self, t) -> np.ndarray:
        """Unit-scale eta of this profile."""
        return eta(self.profile, t)

    @property
    def mass(self) -> float:
        """Integral of the unit-scale eta."""
        return eta_mass(self.profile)

    def window_sum(self) -> float:
        """Sum of omega(n) over |n| <= 2N."""
        n = np.arange(-2 * int(self.N), 2 * int(self.N) + 1)
        return float(self.omega(n).sum())


def weight(w: WeightProfile, x) -> float:
    """omega_d(x) = prod omega(x_i), multiplied left to right."""
    coords = np.atleast_1d(np.asarray(x, dtype=np.float64))
    result = 1.0
    for value in coords:
        result = result * float(w.omega(value))
    return result


def weight_array(w: WeightProfile, points: np.ndarray) -> np.ndarray:
    """omega_d over the rows of an (m, d) array, same multiplication order as weight()."""
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points.reshape(-1, 1)
    result = np.ones(points.shape[0])
    for i in range(points.shape[1]):
        result = result * w.omega(points[:, i])
    return result


# ---------------------------------------------------------------------------
# Exponent calculus
# ---------------------------------------------------------------------------


def _as_fraction(x: Rational) -> Fraction:
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**12)
    return Fraction(x)


def weyl_exponent(k: int) -> Fraction:
    """tau = max(2^{1-k}, 1/(k(k-1)))."""
    if k < 2:
        raise InvalidRange(f"Weyl exponent needs k >= 2, got {k}")
    return max(Fraction(1, 2 ** (k - 1)), Fraction(1, k * (k - 1)))


@dataclass(frozen=True)
class ExponentProfile:
    """
    Exponent thresholds for one surface system.

    All thresholds are exclusive lower bounds on p (estimate holds for p > x).
    ``lowdim_bound`` is None when 1 - k*tau <= 0, i.e. the low-dimensional
    condition holds in every dimension.
    """

    family: Family
    d: int
    k: int
    K: int
    tau: Fraction
    critical: Fraction
    truncated_threshold: Fraction
    full_threshold: Fraction
    zeta_bound: Fraction
    lowdim_valid: Optional[bool] = None
    lowdim_bound: Optional[Fraction] = None
    lowdim_threshold: Optional[Fraction] = None
    hypothesis_k_threshold: Optional[Fraction] = None

    def to_dict(self) -> dict:
        """Thresholds both exactly (as strings) and as binary64."""
        out = {"family": self.family.value, "d": self.d, "k": self.k, "K": self.K}
        for name in (
            "tau",
            "critical",
            "truncated_threshold",
            "full_threshold",
            "zeta_bound",
            "lowdim_bound",
            "lowdim_threshold",
            "hypothesis_k_threshold",
        ):
            value = getattr(self, name)
            out[name] = None if value is None else {"exact": str(value), "float": float(value)}
        out["lowdim_valid"] = self.lowdim_valid
        return out


def exponent_table(sys: SurfaceSystem, tau: Optional[Rational] = None) -> ExponentProfile:
    """
    Restriction thresholds for k-th powers and k-paraboloids.

    ``tau`` overrides the Weyl exponent to explore what an improved minor-arc
    bound would give; by default tau = max(2^{1-k}, 1/(k(k-1))).
    """
    if sys.family is Family.MONOMIAL_CURVE:
        raise UnsupportedFamily(
            "exponent_table covers kth_powers and k_paraboloid; use curve_exponent_ranges"
        )
    k, d, K = sys.k, sys.d, sys.K
    t = weyl_exponent(k) if tau is None else _as_fraction(tau)
    if not 0 < t < 1:
        raise InvalidRange(f"tau must lie in (0,1), got {t}")
    critical = Fraction(2 * K, d)

    if sys.family is Family.KTH_POWERS:
        return ExponentProfile(
            family=sys.family,
            d=1,
            k=k,
            K=K,
            tau=t,
            critical=critical,
            truncated_threshold=Fraction(2 * k),
            full_threshold=2 + 2 * (k - 1) / t,
            zeta_bound=t / 2,
            hypothesis_k_threshold=Fraction(2 * k),
        )

    denominator = 1 - k * t
    if denominator <= 0:
        lowdim_bound, lowdim_valid = None, True
    else:
        lowdim_bound = Fraction(k * k - 2 * k) / denominator
        lowdim_valid = d < lowdim_bound
    return ExponentProfile(
        family=sys.family,
        d=d,
        k=k,
        K=K,
        tau=t,
        critical=critical,
        truncated_threshold=Fraction(2 * (d + k) + 2 * k, d),
        full_threshold=2 + Fraction(2 * k, d) / t,
        zeta_bound=d * t / 2,
        lowdim_valid=lowdim_valid,
        lowdim_bound=lowdim_bound,
        lowdim_threshold=critical,
    )


def combine_eps_removal(p: Rational, q: Rational, zeta: Rational, d: int, K: int) -> bool:
    """
    Whether an epsilon-full estimate at p and a truncated estimate at level
    zeta combine into an epsilon-free estimate at q.
    """
    p, q, zeta = _as_fraction(p), _as_fraction(q), _as_fraction(zeta)
    if q <= p:
        raise InvalidRange(f"need q > p, got p={p}, q={q}")
    if not 0 < zeta < Fraction(d, 2):
        raise InvalidRange(f"need 0 < zeta < d/2 = {Fraction(d, 2)}, got {zeta}")
    return p >= Fraction(2 * K, d)


def complete_subcritical(p1: Rational, zeta: Rational, p0: Rational, d: int, K: int) -> Fraction:
    """
    Threshold max(p1, p0 + (K - d*p0/2)/zeta) obtained by interpolating a
    truncated supercritical estimate at p1 with a subcritical one at p0.
    """
    p1, zeta, p0 = _as_fraction(p1), _as_fraction(zeta), _as_fraction(p0)
    critical = Fraction(2 * K, d)
    if p1 <= critical:
        raise InvalidRange(f"need p1 > 2K/d = {critical}, got {p1}")
    if not 0 < zeta < Fraction(d, 2):
        raise InvalidRange(f"need 0 < zeta < d/2, got {zeta}")
    if p0 > critical:
        raise InvalidRange(f"need p0 <= 2K/d = {critical}, got {p0}")
    return max(p1, p0 + (K - d * p0 / 2) / zeta)


def tomas_stein_decomposition(p: Rational, tau: Rational, d: int, K: int) -> Tuple[Fraction, Fraction]:
    """
    Major/minor split to truncated estimate.

    A p-bound on the major-arc convolution operator (p > 2K/d) together with
    ||F_minor||_inf <~ N^{d(1-tau)} gives truncated estimates for every q > p
    at level zeta = d*tau/2. Returns (p, zeta).
    """
    p, t = _as_fraction(p), _as_fraction(tau)
    if p <= Fraction(2 * K, d):
        raise InvalidRange(f"need p > 2K/d = {Fraction(2 * K, d)}, got {p}")
    if not 0 < t < 1:
        raise InvalidRange(f"need tau in (0,1), got {t}")
    return p, d * t / 2


@dataclass(frozen=True)
class CurveRanges:
    """Exponent ranges for a monomial curve (n^{k_1}, ..., n^{k_t})."""

    exponents: Tuple[int, ...]
    K: int
    tau: Fraction
    zeta: Fraction
    conjectured: Fraction
    moment_method_threshold: Fraction
    singular_integral_threshold: Optional[Fraction]
    singular_series_threshold: Optional[Fraction]
    truncated_threshold: Optional[Fraction]

    def to_dict(self) -> dict:
        out = {"exponents": list(self.exponents), "K": self.K}
        for name in (
            "tau",
            "zeta",
            "conjectured",
            "moment_method_threshold",
            "singular_integral_threshold",
            "singular_series_threshold",
            "truncated_threshold",
        ):
            value = getattr(self, name)
            out[name] = None if value is None else {"exact": str(value), "float": float(value)}
        return out


def curve_exponent_ranges(exponents: Sequence[int]) -> CurveRanges:
    """
    Classical convergence ranges of the singular series and integral of a
    monomial curve, and the truncated range they feed.

    Ranges are known for consecutive exponents (1, ..., k) and for any other
    tuple with maximal degree at least 4; otherwise they are reported as None.
    """
    sys = SurfaceSystem.monomial_curve(exponents)
    exps = sys.exponents
    t, k, K = len(exps), exps[-1], sys.K
    tau = weyl_exponent(max(k, 2))
    consecutive = exps == tuple(range(1, k + 1))
    if consecutive:
        integral, series, truncated = Fraction(K + 1), Fraction(K + 2), Fraction(2 * K + 4)
    elif k >= 4:
        integral, series, truncated = Fraction(K), Fraction(K + 1), Fraction(2 * K + 2)
    else:
        integral = series = truncated = None
        logger.info(f"No classical singular-series range recorded for exponents {exps}")
    return CurveRanges(
        exponents=exps,
        K=K,
        tau=tau,
        zeta=tau / 2,
        conjectured=Fraction(2 * K),
        moment_method_threshold=Fraction(2 * k * t),
        singular_integral_threshold=integral,
        singular_series_threshold=series,
        truncated_threshold=truncated,
    )


def critical_exponent(sys: SurfaceSystem) -> Fraction:
    return Fraction(2 * sys.K, sys.d)


def log2_floor(n: int) -> int:
    return max(int(n).bit_length() - 1, 0)
