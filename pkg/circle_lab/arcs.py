"""
Rational approximation, major/minor arc classification and the arc mollifier
family: dyadic bumps phi^(s), arc mollifiers Phi_{Q,s}, the partition
lambda + rho = 1 and their Fourier coefficients.
"""
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np

from circle_lab.arith import ramanujan_sum, ramanujan_sum_array, truncated_divisor_histogram
from circle_lab.errors import InvalidRange, LevelOutOfRange, RangeExceeded
from circle_lab.expsum import expi, make_rng
from circle_lab.monitoring import track_performance
from circle_lab.quadrature import adaptive_panels
from circle_lab.settings import get_settings
from circle_lab.surfaces import Profile, eta, log2_floor

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Fractions and arcs
# ---------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class FareyFraction:
    """Reduced fraction a/q with 1 <= a <= q; zero on the torus is 1/1."""

    q: int
    a: int

    def __post_init__(self):
        if self.q < 1 or not 1 <= self.a <= self.q or math.gcd(self.a, self.q) != 1:
            raise InvalidRange(f"{self.a}/{self.q} is not a reduced fraction in (0, 1]")

    @classmethod
    def from_pair(cls, a: int, q: int) -> "FareyFraction":
        """Reduce a/q and move it into (0, 1]."""
        g = math.gcd(int(a), int(q))
        a, q = int(a) // g, int(q) // g
        return cls(q=q, a=(a % q) or q)

    @property
    def value(self) -> float:
        return self.a / self.q

    def as_fraction(self) -> Fraction:
        return Fraction(self.a, self.q)

    def __str__(self) -> str:
        return f"{self.a}/{self.q}"


def torus_distance(x) -> np.ndarray:
    """||x||, the distance to the nearest integer."""
    x = np.asarray(x, dtype=np.float64)
    return np.abs(x - np.round(x))


def best_rational(alpha: float, Qmax: int) -> Tuple[FareyFraction, float]:
    """
    Last continued-fraction convergent a/q of alpha with q <= Qmax, and
    |alpha - a/q|. The convergent satisfies |alpha - a/q| <= 1/(q Qmax).
    """
    if Qmax < 1:
        raise InvalidRange(f"Qmax must be >= 1, got {Qmax}")
    x = Fraction(alpha)
    x -= math.floor(x)
    target = x
    h_prev, h = 0, 1
    k_prev, k = 1, 0
    while True:
        whole = math.floor(x)
        h_next = whole * h + h_prev
        k_next = whole * k + k_prev
        if k_next > Qmax:
            break
        h_prev, h, k_prev, k = h, h_next, k, k_next
        rest = x - whole
        if rest == 0:
            break
        x = 1 / rest
    error = float(abs(target - Fraction(h, k)))
    return FareyFraction.from_pair(h, k), error


@dataclass(frozen=True)
class ArcClass:
    """Major(a, q) when fraction is set, Minor otherwise."""

    fraction: Optional[FareyFraction] = None

    @property
    def major(self) -> bool:
        return self.fraction is not None

    def __str__(self) -> str:
        return f"Major({self.fraction.a},{self.fraction.q})" if self.major else "Minor"


def classify_arcs(alphas, Q: int, N: int, k: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Vectorized arc classification. Returns (major, a, q) arrays; a = q = 0
    on the minor arcs. Ties go to the smallest q, then the smallest a.
    """
    if Q < 1:
        raise InvalidRange(f"Q must be >= 1, got {Q}")
    alphas = np.mod(np.atleast_1d(np.asarray(alphas, dtype=np.float64)), 1.0)
    radius = Q / float(N) ** k
    found_a = np.zeros(len(alphas), dtype=np.int64)
    found_q = np.zeros(len(alphas), dtype=np.int64)
    for q in range(1, Q + 1):
        open_ = found_q == 0
        if not open_.any():
            break
        x = alphas[open_]
        if radius * q >= 0.5:
            candidates = np.arange(1, q + 1, dtype=np.int64)[None, :].repeat(len(x), axis=0)
        else:
            low = np.floor(q * x).astype(np.int64)
            candidates = np.stack([low, low + 1], axis=1)
        residues = np.mod(candidates, q)
        residues = np.where(residues == 0, q, residues)
        ok = (np.gcd(residues, q) == 1) & (
            torus_distance(x[:, None] - residues / q) <= radius
        )
        # smallest a among admissible candidates
        masked = np.where(ok, residues, q + 1)
        best = masked.min(axis=1)
        hit = best <= q
        idx = np.nonzero(open_)[0][hit]
        found_a[idx] = best[hit]
        found_q[idx] = q
    return found_q > 0, found_a, found_q


def classify_arc(alpha: float, Q: int, N: int, k: int) -> ArcClass:
    """Major(a, q) iff some q <= Q, (a, q) = 1 has ||alpha - a/q|| <= Q/N^k."""
    major, a, q = classify_arcs([alpha], Q, N, k)
    if major[0]:
        return ArcClass(FareyFraction(q=int(q[0]), a=int(a[0])))
    return ArcClass()


def reduced_fractions(q: int) -> np.ndarray:
    """Numerators 1 <= a <= q with (a, q) = 1."""
    a = np.arange(1, q + 1, dtype=np.int64)
    return a[np.gcd(a, q) == 1]


# ---------------------------------------------------------------------------
# Bump transforms
# ---------------------------------------------------------------------------


def _kappa_hat_array(profile: Profile, xi: np.ndarray) -> np.ndarray:
    xi = np.asarray(xi, dtype=np.float64)
    flat = xi.ravel()
    out = np.empty(len(flat))
    block = 256
    for start in range(0, len(flat), block):
        chunk = flat[start : start + block]
        cycles = float(np.max(np.abs(chunk), initial=0.0))

        def integrand(x, chunk=chunk):
            # kappa is even, so its transform is a cosine transform over [0, 2]
            return 2.0 * eta(profile, x)[None, :] * np.cos(2.0 * np.pi * np.outer(chunk, x))

        panels = int(math.ceil(cycles)) + 1
        out[start : start + block] = adaptive_panels(
            integrand, (0.0, 1.0, 2.0), panels, what="bump transform"
        )
    return out.reshape(xi.shape)


@lru_cache(maxsize=65536)
def _kappa_hat_scalar(profile: Profile, xi: float) -> float:
    return float(_kappa_hat_array(profile, np.array([xi]))[0])


def kappa_hat(profile: Profile, xi):
    """kappa^(xi) = int kappa(x) e(-x xi) dx (real, even)."""
    if np.ndim(xi) == 0:
        return _kappa_hat_scalar(profile, float(xi))
    return _kappa_hat_array(profile, np.asarray(xi))


# ---------------------------------------------------------------------------
# Mollifier family
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MollifierFamily:
    """
    Arc mollifiers at degree k and scale N. Dyadic levels Q run over powers of
    two up to N1 = floor(c1 N); shifts s over Q <= 2^s <= Ntilde with
    Ntilde = 2^floor(log2 N). ``q ~ Q`` means Q <= q < 2Q.
    """

    k: int
    N: int
    c1: Fraction = Fraction(1, 8)
    kappa: Profile = Profile.QUINTIC_PLATEAU
    strict: bool = False
    disjoint: bool = field(init=False)

    def __post_init__(self):
        if self.k < 3:
            raise InvalidRange(f"mollifiers need k >= 3, got k={self.k}")
        if self.N < 1:
            raise InvalidRange(f"N must be >= 1, got {self.N}")
        c1 = Fraction(self.c1).limit_denominator(10**6)
        if not 0 < c1 <= 1:
            raise InvalidRange(f"c1 must lie in (0, 1], got {c1}")
        object.__setattr__(self, "c1", c1)
        if self.N1 < 1:
            raise InvalidRange(f"N1 = floor(c1 N) must be >= 1, got {self.N1}")
        disjoint = disjointness_check(self)
        object.__setattr__(self, "disjoint", disjoint)
        if not disjoint:
            if self.strict:
                raise InvalidRange(
                    "arc intervals overlap; lower c1",
                    context={"k": self.k, "N": self.N, "c1": str(c1)},
                )
            logger.warning(
                "Arc intervals overlap", extra={"k": self.k, "N": self.N, "c1": str(c1)}
            )

    @classmethod
    def from_settings(cls, k: int, N: int, **kwargs) -> "MollifierFamily":
        c1 = Fraction(get_settings().mollifier_c1).limit_denominator(10**6)
        return cls(k=k, N=N, c1=c1, **kwargs)

    @property
    def N1(self) -> int:
        return math.floor(self.c1 * self.N)

    @property
    def Ntilde(self) -> int:
        return 1 << log2_floor(self.N)

    @property
    def scale(self) -> int:
        """N^{k-1}."""
        return self.N ** (self.k - 1)

    @cached_property
    def levels(self) -> Tuple[int, ...]:
        out, Q = [], 1
        while Q <= self.N1:
            out.append(Q)
            Q *= 2
        return tuple(out)

    def shifts(self, Q: int) -> Tuple[int, ...]:
        """Shifts s with Q <= 2^s <= Ntilde."""
        top = log2_floor(self.Ntilde)
        return tuple(s for s in range(0, top + 1) if Q <= (1 << s))

    def fundamental_domain(self) -> Tuple[float, float]:
        """U = (1/(2 N1), 1 + 1/(2 N1)]."""
        start = 1.0 / (2 * self.N1)
        return start, 1.0 + start

    def check_shift(self, s: int) -> None:
        if s < 0 or (1 << s) > self.Ntilde:
            raise LevelOutOfRange(
                f"need 1 <= 2^s <= {self.Ntilde}, got s={s}", context={"s": s}
            )

    def check_level(self, Q: int, s: int) -> None:
        self.check_shift(s)
        if Q not in self.levels:
            raise LevelOutOfRange(
                f"Q={Q} is not a dyadic level <= N1={self.N1}", context={"Q": Q}
            )
        if (1 << s) < Q:
            raise LevelOutOfRange(f"need Q <= 2^s, got Q={Q}, s={s}", context={"Q": Q, "s": s})

    def kappa_at(self, x) -> np.ndarray:
        return eta(self.kappa, x)

    def fractions(self, Q: int) -> List[FareyFraction]:
        return [FareyFraction(q=q, a=int(a)) for q in range(Q, 2 * Q) for a in reduced_fractions(q)]


def phi_s(fam: MollifierFamily, s: int, x):
    """phi^(s)(x) = kappa(2^s N^{k-1} x) - kappa(2^{s+1} N^{k-1} x); kappa(2^s N^{k-1} x) on top."""
    fam.check_shift(s)
    x = np.asarray(x, dtype=np.float64)
    L = float((1 << s) * fam.scale)
    value = fam.kappa_at(L * x)
    if (1 << s) < fam.Ntilde:
        value = value - fam.kappa_at(2.0 * L * x)
    return value[()] if value.ndim == 0 else value


def _near_fraction_offsets(alpha: np.ndarray, q: int):
    """Offsets alpha - a/q and numerators for the neighbours floor(q alpha), +1."""
    if q == 1:
        a = np.round(alpha)
        yield alpha - a, np.ones(alpha.shape, dtype=np.int64)
        return
    low = np.floor(q * alpha)
    for shift in (0.0, 1.0):
        a = low + shift
        yield alpha - a / q, np.mod(a.astype(np.int64), q)


def _fraction_sum(alpha, q_lo: int, q_hi: int, profile_fn) -> np.ndarray:
    """sum over q in [q_lo, q_hi), (a, q) = 1, of profile_fn(alpha - a/q)."""
    alpha = np.asarray(alpha, dtype=np.float64)
    total = np.zeros(alpha.shape)
    for q in range(q_lo, q_hi):
        for offset, a in _near_fraction_offsets(alpha, q):
            coprime = np.gcd(a, q) == 1 if q > 1 else True
            total = total + np.where(coprime, profile_fn(offset), 0.0)
    return total


def arc_mollifier(fam: MollifierFamily, Q: int, s: int, alpha):
    """Phi_{Q,s}(alpha) = sum_{q ~ Q, (a,q)=1} phi^(s)(alpha - a/q)."""
    fam.check_level(Q, s)
    value = _fraction_sum(alpha, Q, 2 * Q, lambda x: phi_s(fam, s, x))
    return value[()] if value.ndim == 0 else value


def lambda_rho(fam: MollifierFamily, alpha):
    """(lambda, rho) with lambda = sum_Q sum_{q ~ Q} kappa(Q N^{k-1}(alpha - a/q)), rho = 1 - lambda."""
    alpha = np.asarray(alpha, dtype=np.float64)
    lam = np.zeros(alpha.shape)
    for Q in fam.levels:
        L = float(Q * fam.scale)
        lam = lam + _fraction_sum(alpha, Q, 2 * Q, lambda x, L=L: fam.kappa_at(L * x))
    rho = 1.0 - lam
    if lam.ndim == 0:
        return float(lam), float(rho)
    return lam, rho


def lambda_expanded(fam: MollifierFamily, alpha):
    """lambda as the double sum of arc mollifiers over levels and shifts."""
    alpha = np.asarray(alpha, dtype=np.float64)
    total = np.zeros(alpha.shape)
    for Q in fam.levels:
        for s in fam.shifts(Q):
            total = total + arc_mollifier(fam, Q, s, alpha)
    return total


def partition_check(fam: MollifierFamily, Q: int, samples) -> float:
    """max |sum_{Q <= 2^s <= Ntilde} phi^(s)(x) - kappa(Q N^{k-1} x)| over the samples."""
    if Q < 1 or Q & (Q - 1) or Q > fam.Ntilde:
        raise LevelOutOfRange(f"Q={Q} is not a dyadic level <= {fam.Ntilde}")
    x = np.asarray(samples, dtype=np.float64)
    total = np.zeros(x.shape)
    for s in fam.shifts(Q):
        total = total + phi_s(fam, s, x)
    return float(np.max(np.abs(total - fam.kappa_at(Q * fam.scale * x)), initial=0.0))


def disjointness_check(fam: MollifierFamily) -> bool:
    """Exact check that the intervals a/q +- 2/(Q N^{k-1}) over all levels are disjoint."""
    intervals = []
    Q = 1
    while Q <= fam.N1:
        half = Fraction(2, Q * fam.scale)
        for q in range(Q, 2 * Q):
            for a in reduced_fractions(q):
                intervals.append((Fraction(int(a), q) % 1, half))
        Q *= 2
    if len(intervals) < 2:
        return True
    intervals.sort()
    for (c1, h1), (c2, h2) in zip(intervals, intervals[1:]):
        if c2 - c1 < h1 + h2:
            return False
    (first, h_first), (last, h_last) = intervals[0], intervals[-1]
    return first + 1 - last >= h_first + h_last


def major_core_samples(fam: MollifierFamily, seed: int, fractions: int = 200, per: int = 16) -> np.ndarray:
    """
    lambda at random points of the cores a/q +- 1/(Q N^{k-1}), q <= N1, where Q
    is the dyadic level of q.
    """
    rng = make_rng(seed)
    qs = rng.integers(1, fam.N1 + 1, size=fractions)
    values = []
    for q in qs:
        q = int(q)
        numerators = reduced_fractions(q)
        a = int(numerators[rng.integers(0, len(numerators))])
        Q = 1 << log2_floor(q)
        offsets = rng.uniform(-1.0, 1.0, size=per) / (Q * fam.scale)
        lam, _ = lambda_rho(fam, a / q + offsets)
        values.append(lam)
    return np.concatenate(values)


# ---------------------------------------------------------------------------
# Fourier coefficients
# ---------------------------------------------------------------------------


def gamma_hat(fam: MollifierFamily, s: int, xi):
    """Transform of gamma^(s) = kappa - kappa(2 .), or kappa at the top shift."""
    value = kappa_hat(fam.kappa, xi)
    if (1 << s) < fam.Ntilde:
        value = value - 0.5 * kappa_hat(fam.kappa, np.divide(xi, 2.0))
    return value


def mollifier_fourier(fam: MollifierFamily, Q: int, s: int, n: int) -> complex:
    """Phi^_{Q,s}(n) = (sum_{q ~ Q} c_q(n)) (2^s N^{k-1})^{-1} gamma^(n / (2^s N^{k-1}))."""
    fam.check_level(Q, s)
    L = (1 << s) * fam.scale
    ram = sum(ramanujan_sum(q, n) for q in range(Q, 2 * Q))
    return complex(ram * gamma_hat(fam, s, n / L) / L)


def mollifier_fourier_array(fam: MollifierFamily, Q: int, s: int, n) -> np.ndarray:
    """Phi^_{Q,s} over an integer array of frequencies."""
    fam.check_level(Q, s)
    L = (1 << s) * fam.scale
    n = np.asarray(n, dtype=np.int64)
    ram = np.zeros(n.shape, dtype=np.int64)
    for q in range(Q, 2 * Q):
        ram += ramanujan_sum_array(q, n)
    return ram * gamma_hat(fam, s, n / L) / L


def mollifier_fourier_direct(fam: MollifierFamily, Q: int, s: int, n: int) -> complex:
    """Phi^_{Q,s}(n) by panel quadrature of Phi_{Q,s}(alpha) e(-n alpha) over U."""
    fam.check_level(Q, s)
    L = (1 << s) * fam.scale
    start, end = fam.fundamental_domain()
    local = np.array([-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0]) / L
    breaks = [start, end]
    for frac in fam.fractions(Q):
        for b in frac.value + local:
            b = b - math.floor(b - start)
            if start < b < end:
                breaks.append(b)
    breaks = np.unique(np.asarray(breaks))
    panels = 1 + np.ceil(abs(n) * np.diff(breaks)).astype(np.int64)

    def integrand(alpha):
        return arc_mollifier(fam, Q, s, alpha) * expi(-n * alpha)

    return complex(adaptive_panels(integrand, breaks, panels, what="mollifier transform"))


def mollifier_fourier_scan(fam: MollifierFamily, Q: int, s: int, n_max: int) -> dict:
    """
    Fitted constants for |Phi^(0)| <= C Q^2 / (2^s N^{k-1}) and
    |Phi^(n)| <= C (Q / (2^s N^{k-1})) d(n, 2Q) over |n| <= n_max.
    """
    fam.check_level(Q, s)
    L = (1 << s) * fam.scale
    n = np.arange(0, n_max + 1, dtype=np.int64)
    values = mollifier_fourier_array(fam, Q, s, n)
    d = truncated_divisor_histogram(2 * Q, n_max)[n].astype(np.float64)
    pointwise = np.abs(values) / ((Q / L) * d)
    return {
        "Q": Q,
        "s": s,
        "n_max": n_max,
        "average": float(values[0]),
        "C_average": float(abs(values[0]) * L / Q**2),
        "C_pointwise": float(pointwise.max()),
        "argmax_n": int(n[int(np.argmax(pointwise))]),
    }


def _lambda_fourier_array(fam: MollifierFamily, n: np.ndarray) -> np.ndarray:
    # the shifts telescope, leaving kappa(Q N^{k-1} x) per fraction
    lam = np.zeros(n.shape)
    for Q in fam.levels:
        L = Q * fam.scale
        ram = np.zeros(n.shape, dtype=np.int64)
        for q in range(Q, 2 * Q):
            ram += ramanujan_sum_array(q, n)
        lam = lam + ram * kappa_hat(fam.kappa, n / L) / L
    return lam


def rho_fourier_array(fam: MollifierFamily, n) -> np.ndarray:
    """rho^(n) = 1_{n=0} - lambda^(n) over an integer array, for |n| <= A N^A."""
    n = np.asarray(n, dtype=np.int64)
    A = get_settings().rho_fourier_exponent
    top = int(np.abs(n).max(initial=0))
    if top > A * fam.N**A:
        raise RangeExceeded(f"|n| = {top} exceeds {A} N^{A}", context={"n": top, "A": A})
    return (n == 0).astype(np.float64) - _lambda_fourier_array(fam, n)


def rho_fourier(fam: MollifierFamily, n: int) -> complex:
    """rho^(n) = 1_{n=0} - lambda^(n), for |n| <= A N^A."""
    return complex(rho_fourier_array(fam, np.array([n]))[0])


def rho_fourier_scan(fam: MollifierFamily, n_max: int, eps: float = 0.1) -> dict:
    """max_{0 < |n| <= n_max} |rho^(n)| and its size against N^{-(k-1-eps)}."""
    with track_performance("rho_fourier_scan", n_max=n_max):
        n = np.arange(1, n_max + 1, dtype=np.int64)
        values = np.abs(_lambda_fourier_array(fam, n))
        worst = int(np.argmax(values))
        average = rho_fourier(fam, 0).real
    top = float(values[worst])
    return {
        "N": fam.N,
        "k": fam.k,
        "n_max": n_max,
        "rho_average": average,
        "max_abs": top,
        "argmax_n": int(n[worst]),
        "normalized": top * fam.N ** (fam.k - 1 - eps),
    }


# ---------------------------------------------------------------------------
# Dumps
# ---------------------------------------------------------------------------


def arc_table(fam: MollifierFamily) -> List[Tuple]:
    """Rows (Q, s, a, q, center, halfwidth) for every arc mollifier translate."""
    rows = []
    for Q in fam.levels:
        fractions = fam.fractions(Q)
        for s in fam.shifts(Q):
            half = 2.0 / ((1 << s) * fam.scale)
            rows.extend((Q, s, f.a, f.q, f.value, half) for f in fractions)
    return rows


def mollifier_profile(fam: MollifierFamily, alphas: Sequence[float]) -> List[Tuple[float, float, float]]:
    """Rows (alpha, lambda, rho)."""
    alphas = np.asarray(alphas, dtype=np.float64)
    lam, rho = lambda_rho(fam, alphas)
    return [(float(a), float(l), float(r)) for a, l, r in zip(alphas, np.atleast_1d(lam), np.atleast_1d(rho))]
