"""
Exact arithmetic kernels: truncated divisor functions, Ramanujan and Gaussian
sums, representation counts, Vinogradov counts, and partial singular series
and truncated singular integrals.
"""
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.fft
from scipy import integrate
from sympy import divisors, factorint, integer_nthroot

from circle_lab.errors import (
    BudgetExceeded,
    DimensionMismatch,
    InvalidRange,
    OverflowRisk,
    QuadratureFailure,
    check_budget,
)
from circle_lab.expsum import expi, fft_workers, pairwise_sum
from circle_lab.monitoring import track_performance
from circle_lab.quadrature import adaptive_panels
from circle_lab.settings import get_settings
from circle_lab.surfaces import INT_GUARD, Profile, SurfaceSystem, eta

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Divisors, Moebius, Ramanujan sums
# ---------------------------------------------------------------------------


@lru_cache(maxsize=65536)
def mobius(n: int) -> int:
    if n < 1:
        raise InvalidRange(f"mobius needs n >= 1, got {n}")
    exponents = factorint(n).values()
    if any(e > 1 for e in exponents):
        return 0
    return -1 if len(exponents) % 2 else 1


@lru_cache(maxsize=65536)
def _divisors(n: int) -> Tuple[int, ...]:
    return tuple(int(d) for d in divisors(n))


def truncated_divisor(n: int, Q: int) -> int:
    """d(n, Q) = #{1 <= q <= Q : q | n}, with d(0, Q) = Q."""
    if Q < 1:
        raise InvalidRange(f"Q must be >= 1, got {Q}")
    n = abs(int(n))
    if n == 0:
        return int(Q)
    return sum(1 for q in _divisors(n) if q <= Q)


def ramanujan_sum(q: int, n: int) -> int:
    """c_q(n) = sum_{d | (q, n)} d mu(q/d), exact."""
    if q < 1:
        raise InvalidRange(f"q must be >= 1, got {q}")
    g = math.gcd(q, int(n))
    return sum(d * mobius(q // d) for d in _divisors(g))


def ramanujan_sum_direct(q: int, n: int) -> complex:
    """c_q(n) by summing e_q(an) over reduced residues a."""
    if q < 1:
        raise InvalidRange(f"q must be >= 1, got {q}")
    a = np.arange(1, q + 1, dtype=np.int64)
    a = a[np.gcd(a, q) == 1]
    return complex(pairwise_sum(expi(np.mod(a * (int(n) % q), q) / q)))


def ramanujan_sum_array(q: int, n) -> np.ndarray:
    """c_q(n) for an integer array n."""
    n = np.asarray(n, dtype=np.int64)
    out = np.zeros(n.shape, dtype=np.int64)
    for d in _divisors(q):
        mu = mobius(q // d)
        if mu:
            out += d * mu * (np.mod(n, d) == 0)
    return out


def truncated_divisor_histogram(Q: int, X: int) -> np.ndarray:
    """h[l] = d(l, Q) for 0 <= l <= X, by sieving the multiples of each q <= Q."""
    if Q < 1 or X < 0:
        raise InvalidRange(f"need Q >= 1 and X >= 0, got Q={Q}, X={X}")
    if X > 10**8:
        raise InvalidRange(f"X must be <= 10^8, got {X}")
    check_budget(int(X * (math.log(Q) + 1)) + Q, get_settings().operation_budget, "divisor sieve")
    h = np.zeros(X + 1, dtype=np.min_scalar_type(Q))
    for q in range(1, min(Q, X) + 1):
        h[q::q] += 1
    h[0] = Q
    return h


def _value_moment(values: np.ndarray, B: int) -> int:
    distinct, counts = np.unique(values, return_counts=True)
    return sum(int(c) * int(v) ** B for v, c in zip(distinct, counts))


def divisor_moment(B: int, Q: int, X: int) -> int:
    """sum_{|l| <= X} d(l, Q)^B, exactly."""
    if B < 1:
        raise InvalidRange(f"B must be >= 1, got {B}")
    h = truncated_divisor_histogram(Q, X)
    return 2 * _value_moment(h[1:], B) + int(h[0]) ** B


def divisor_tail_count(D: float, Q: int, X: int) -> int:
    """#{|n| <= X : d(n, Q) >= D}."""
    if D < 1:
        raise InvalidRange(f"D must be >= 1, got {D}")
    h = truncated_divisor_histogram(Q, X)
    return 2 * int(np.count_nonzero(h[1:] >= D)) + int(Q >= D)


def ramanujan_block_scan(Q_list: Sequence[int], n_max: int) -> dict:
    """
    Fitted constant C in |sum_{Q <= q < 2Q} c_q(n)| <= C Q d(n, 2Q) over |n| <= n_max.
    """
    n = np.arange(-n_max, n_max + 1, dtype=np.int64)
    rows = []
    for Q in Q_list:
        block = np.zeros_like(n)
        for q in range(Q, 2 * Q):
            block += ramanujan_sum_array(q, n)
        h = truncated_divisor_histogram(2 * Q, n_max)
        d = h[np.abs(n)].astype(np.float64)
        ratio = np.abs(block) / (Q * d)
        worst = int(np.argmax(ratio))
        rows.append({"Q": int(Q), "C": float(ratio[worst]), "argmax_n": int(n[worst])})
        logger.info("Ramanujan block scan", extra={"Q": Q, "C": rows[-1]["C"]})
    return {"n_max": n_max, "rows": rows, "C": max((r["C"] for r in rows), default=0.0)}


# ---------------------------------------------------------------------------
# Gaussian sums
# ---------------------------------------------------------------------------


def _powers_mod(q: int, k: int) -> np.ndarray:
    """u^k mod q for u = 0..q-1 in int64."""
    if q > 3 * 10**9:
        raise OverflowRisk(f"modulus {q} too large for int64 residue arithmetic")
    u = np.arange(q, dtype=np.int64)
    out = np.ones(q, dtype=np.int64) % q
    for _ in range(k):
        out = np.mod(out * u, q)
    return out


def gaussian_sum(a: int, b: int, q: int, k: int) -> complex:
    """S(a, b; q) = sum_{u mod q} e_q(a u^k + b u)."""
    if q < 1:
        raise InvalidRange(f"q must be >= 1, got {q}")
    u = np.arange(q, dtype=np.int64)
    residues = np.mod((int(a) % q) * _powers_mod(q, k) + (int(b) % q) * u, q)
    return complex(pairwise_sum(expi(residues / q)))


def hua_constant_scan(k: int, qmax: int, eps: float = 0.0) -> dict:
    """
    max over q <= qmax, (a, q) = 1 and b mod q of |S(a, b; q)/q| q^{1/k - eps}.

    For each (a, q) the whole b-row comes from one DFT of e_q(a u^k).
    """
    if qmax < 1 or qmax > 10**4:
        raise InvalidRange(f"qmax must lie in [1, 10^4], got {qmax}")
    cost = sum(q * q * max(1, int(math.log2(q + 1))) for q in range(1, qmax + 1))
    check_budget(cost, get_settings().operation_budget, "Hua constant scan")
    best, argmax = 0.0, (1, 1, 0)
    per_q: List[float] = []
    with track_performance("hua_constant_scan", qmax=qmax):
        for q in range(1, qmax + 1):
            uk = _powers_mod(q, k)
            a = np.arange(1, q + 1, dtype=np.int64)
            a = a[np.gcd(a, q) == 1] % q
            row_best, row_arg = 0.0, (q, 1, 0)
            block = max(1, 2**20 // q)
            for start in range(0, len(a), block):
                chunk = a[start : start + block]
                terms = expi(np.mod(chunk[:, None] * uk[None, :], q) / q)
                # ifft uses e(+jn/q): column j holds S(a, j; q)/q
                sums = scipy.fft.ifft(terms, axis=-1, workers=fft_workers())
                modulus = np.abs(sums)
                j = np.unravel_index(int(np.argmax(modulus)), modulus.shape)
                if modulus[j] > row_best:
                    row_best = float(modulus[j])
                    row_arg = (q, int(chunk[j[0]]) or q, int(j[1]))
            ratio = row_best * q ** (1.0 / k - eps)
            per_q.append(ratio)
            if ratio > best:
                best, argmax = ratio, row_arg
    return {
        "k": k,
        "qmax": qmax,
        "eps": eps,
        "max_ratio": best,
        "argmax": {"q": argmax[0], "a": argmax[1], "b": argmax[2]},
        "per_q": per_q,
    }


# ---------------------------------------------------------------------------
# Representation tables
# ---------------------------------------------------------------------------


@dataclass
class RepTable:
    """Sparse table u -> R_{s,P}(u) of ordered representations."""

    system: SurfaceSystem
    s: int
    N: int
    points: np.ndarray = field(repr=False)
    counts: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.counts)

    def total(self) -> int:
        return int(sum(int(c) for c in self.counts))

    def get(self, u) -> int:
        """R(u); 0 when u is not represented."""
        u = np.atleast_1d(np.asarray(u, dtype=np.int64))
        if u.size != self.points.shape[1]:
            raise DimensionMismatch(f"target needs {self.points.shape[1]} coordinates")
        hit = np.nonzero(np.all(self.points == u[None, :], axis=1))[0]
        return int(self.counts[hit[0]]) if len(hit) else 0

    def sum_squares(self) -> int:
        """sum_u R(u)^2, exactly."""
        return sum(int(c) * int(c) for c in self.counts)

    def as_dict(self) -> Dict[Tuple[int, ...], int]:
        return {tuple(int(x) for x in p): int(c) for p, c in zip(self.points, self.counts)}

    def rows(self) -> List[Tuple[int, ...]]:
        """Sorted rows (u_1, ..., u_r, count)."""
        return [tuple(int(x) for x in p) + (int(c),) for p, c in zip(self.points, self.counts)]


def _merge(points: np.ndarray, counts: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    unique, inverse = np.unique(points, axis=0, return_inverse=True)
    merged = np.zeros(len(unique), dtype=counts.dtype)
    np.add.at(merged, inverse.ravel(), counts)
    return unique, merged


def level_one_table(sys: SurfaceSystem, N: int) -> RepTable:
    support = sys.support(N)
    points, counts = _merge(sys.map_points(support), np.ones(len(support), dtype=np.int64))
    return RepTable(sys, 1, N, points, counts)


def sparse_convolve(
    p1: np.ndarray, w1: np.ndarray, p2: np.ndarray, w2: np.ndarray, what: str = "sparse convolution"
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Convolve two weighted point sets: the result carries, for every sum v+w,
    the total weight sum w1(v) w2(w). Weights may be integer or complex.
    """
    check_budget(len(p1) * len(p2), get_settings().operation_budget, what)
    guard = np.abs(p1).max(initial=0) + np.abs(p2).max(initial=0)
    if guard > INT_GUARD:
        raise OverflowRisk("convolved targets may exceed 2^62", context={"what": what})
    block = max(1, 2**22 // max(len(p2), 1))
    parts_p, parts_w = [], []
    for start in range(0, len(p1), block):
        head = p1[start : start + block]
        sums = (head[:, None, :] + p2[None, :, :]).reshape(-1, head.shape[1])
        weights = (w1[start : start + block, None] * w2[None, :]).ravel()
        p, c = _merge(sums, weights)
        parts_p.append(p)
        parts_w.append(c)
    if not parts_p:
        return np.zeros((0, p2.shape[1]), dtype=np.int64), np.zeros(0, dtype=np.result_type(w1, w2))
    return _merge(np.concatenate(parts_p), np.concatenate(parts_w))


def convolve_tables(t1: RepTable, t2: RepTable) -> RepTable:
    """Exact convolution: R_{s1+s2}(u) = sum_{v+w=u} R_{s1}(v) R_{s2}(w)."""
    if t1.system != t2.system or t1.N != t2.N:
        raise DimensionMismatch("tables belong to different systems or scales")
    points, counts = sparse_convolve(t1.points, t1.counts, t2.points, t2.counts, "table convolution")
    return RepTable(t1.system, t1.s + t2.s, t1.N, points, counts)


def representation_table(sys: SurfaceSystem, s: int, N: int) -> RepTable:
    """R_{s,P}(u) for every represented u, by s-1 convolutions with the level-one table."""
    if s < 1:
        raise InvalidRange(f"s must be >= 1, got {s}")
    base = level_one_table(sys, N)
    table = base
    with track_performance("representation_table", s=s, N=N):
        for _ in range(s - 1):
            table = convolve_tables(table, base)
    return table


def hypothesis_k_scan(k: int, s: int, X: int) -> dict:
    """max_{n <= X} R_{s,k}(n), its maximizers and a dyadic growth table."""
    if X < 1:
        raise InvalidRange(f"X must be >= 1, got {X}")
    N = int(integer_nthroot(X, k)[0])
    if s * N**k < X:
        logger.info("Targets above s N^k are unrepresentable", extra={"N": N, "X": X})
    table = representation_table(SurfaceSystem.kth_powers(k), s, N)
    targets = table.points[:, 0]
    keep = targets <= X
    targets, counts = targets[keep], table.counts[keep]
    order = np.argsort(targets)
    targets, counts = targets[order], counts[order]

    def best_upto(limit: int) -> Tuple[int, List[int]]:
        mask = targets <= limit
        if not mask.any():
            return 0, []
        top = int(counts[mask].max())
        return top, [int(t) for t in targets[mask][counts[mask] == top]]

    growth = []
    limit = 2
    while limit < X:
        growth.append({"X": limit, "max_R": best_upto(limit)[0]})
        limit *= 2
    top, argmax = best_upto(X)
    growth.append({"X": X, "max_R": top})
    return {"k": k, "s": s, "X": X, "N": N, "max_R": top, "argmax": argmax, "growth": growth}


def vinogradov_count(s: int, k: int, N: int) -> int:
    """J_{s,k}(N): solutions of the Vinogradov system, as sum_u R(u)^2."""
    if s < 1 or k < 1 or N < 1:
        raise InvalidRange(f"need s, k, N >= 1, got s={s}, k={k}, N={N}")
    if s * k > 8 or N > 64:
        raise BudgetExceeded(
            f"exact Vinogradov enumeration needs s*k <= 8 and N <= 64, got s={s}, k={k}, N={N}"
        )
    sys = SurfaceSystem.monomial_curve(range(1, k + 1))
    return representation_table(sys, s, N).sum_squares()


def vinogradov_diagonal(s: int, N: int) -> int:
    """Number of pairs (n, m) in [N]^s x [N]^s where m is a rearrangement of n."""
    if math.comb(N + s - 1, s) > get_settings().operation_budget:
        raise BudgetExceeded("diagonal enumeration over multisets exceeds the operation budget")
    total = 0
    for multiset in combinations_with_replacement(range(N), s):
        arrangements = math.factorial(s)
        for multiplicity in Counter(multiset).values():
            arrangements //= math.factorial(multiplicity)
        total += arrangements * arrangements
    return total


# ---------------------------------------------------------------------------
# Singular series and singular integrals
# ---------------------------------------------------------------------------


@dataclass
class SingularSeriesReport:
    kvec: Tuple[int, ...]
    p: float
    Qmax: int
    terms: List[float]
    partial_sums: List[float]
    decay_exponent: Optional[float]
    tail_estimate: Optional[float]

    @property
    def total(self) -> float:
        return self.partial_sums[-1]

    def to_dict(self) -> dict:
        return {
            "kvec": list(self.kvec),
            "p": self.p,
            "Qmax": self.Qmax,
            "total": self.total,
            "terms": self.terms,
            "partial_sums": self.partial_sums,
            "decay_exponent": self.decay_exponent,
            "tail_estimate": self.tail_estimate,
        }


def complete_sum_table(kvec: Sequence[int], q: int) -> np.ndarray:
    """S(a; q) = sum_{u mod q} e_q(a_1 u^{k_1} + ... + a_t u^{k_t}) for every a in (Z/q)^t."""
    t = len(kvec)
    hist = np.zeros((q,) * t, dtype=np.float64)
    residues = tuple(_powers_mod(q, k) for k in kvec)
    np.add.at(hist, residues, 1.0)
    return scipy.fft.ifftn(hist, workers=fft_workers()) * q**t


def _primitive_mask(q: int, t: int) -> np.ndarray:
    axis = np.arange(q, dtype=np.int64)
    g = np.full((q,) * t, q, dtype=np.int64)
    for i in range(t):
        shape = [1] * t
        shape[i] = q
        g = np.gcd(g, axis.reshape(shape))
    return g == 1


def _decay_fit(q: np.ndarray, terms: np.ndarray) -> Tuple[Optional[float], Optional[float]]:
    keep = (q >= 2) & (terms > 0)
    if keep.sum() < 3:
        return None, None
    slope, intercept = np.polyfit(np.log(q[keep]), np.log(terms[keep]), 1)
    return float(slope), float(intercept)


def singular_series_partial(kvec: Sequence[int], p: float, Qmax: int) -> SingularSeriesReport:
    """
    Partial sums of sum_q sum_{(a,q)=1} |S(a; q)/q|^p with per-q terms, a fitted
    decay exponent of the terms and a tail estimate beyond Qmax.
    """
    kvec = tuple(int(k) for k in kvec)
    t = len(kvec)
    if not 1 <= t <= 3:
        raise InvalidRange(f"singular series needs 1 <= t <= 3, got t={t}")
    if Qmax < 1 or Qmax > 10**3:
        raise InvalidRange(f"Qmax must lie in [1, 10^3], got {Qmax}")
    cost = sum(q**t * max(1, int(math.log2(q + 1))) for q in range(1, Qmax + 1))
    check_budget(cost, get_settings().operation_budget, "singular series")
    terms = []
    with track_performance("singular_series_partial", Qmax=Qmax, t=t):
        for q in range(1, Qmax + 1):
            S = complete_sum_table(kvec, q)
            mask = _primitive_mask(q, t)
            terms.append(float(pairwise_sum((np.abs(S[mask]) / q) ** p)))
    terms_arr = np.asarray(terms)
    partial = np.cumsum(terms_arr)
    slope, intercept = _decay_fit(np.arange(1, Qmax + 1, dtype=np.float64), terms_arr)
    tail = None
    if slope is not None:
        if slope < -1:
            tail = float(math.exp(intercept) * Qmax ** (slope + 1) / -(slope + 1))
        else:
            tail = math.inf
    return SingularSeriesReport(kvec, p, Qmax, terms, [float(v) for v in partial], slope, tail)


def window_integral(kvec: Sequence[int], xi, profile: Profile = Profile.QUINTIC_PLATEAU) -> np.ndarray:
    """
    J(xi) = int eta(x) e(xi_1 x^{k_1} + ... + xi_t x^{k_t}) dx for every row of xi.

    Panels on [-2,-1], [-1,1], [1,2] are sized so each covers at most one
    oscillation, then doubled until converged.
    """
    kvec = tuple(int(k) for k in kvec)
    xi = np.atleast_2d(np.asarray(xi, dtype=np.float64))
    if xi.shape[1] != len(kvec):
        raise DimensionMismatch(f"xi needs {len(kvec)} coordinates, got {xi.shape[1]}")
    breaks = (-2.0, -1.0, 1.0, 2.0)
    out = np.empty(len(xi), dtype=np.complex128)
    block = 4096
    for start in range(0, len(xi), block):
        chunk = xi[start : start + block]
        cycles = float(
            np.max(np.abs(chunk) @ np.array([k * 2.0 ** (k - 1) for k in kvec]), initial=0.0)
        )
        panels = np.array([1, 2, 1]) * (int(math.ceil(cycles)) + 1)

        def integrand(x, chunk=chunk):
            phase = np.zeros((len(chunk), len(x)))
            for i, k in enumerate(kvec):
                phase += np.mod(chunk[:, i : i + 1] * x[None, :] ** k, 1.0)
            return eta(profile, x)[None, :] * expi(phase)

        out[start : start + block] = adaptive_panels(integrand, breaks, panels, what="window integral")
    return out


def _quad(f, a: float, b: float, what: str) -> float:
    settings = get_settings()
    result = integrate.quad(f, a, b, limit=settings.quad_limit, full_output=1)
    value, abserr = result[0], result[1]
    if len(result) > 3 and abserr > 1e-6 * max(1.0, abs(value)):
        raise QuadratureFailure(
            f"{what}: {result[3]}", context={"value": value, "abserr": abserr}
        )
    return float(value)


def singular_integral_truncated(
    kvec: Sequence[int], p: float, R: float, profile: Profile = Profile.QUINTIC_PLATEAU
) -> float:
    """int_{|xi| <= R} |J(xi)|^p dxi for t <= 2 (the box |xi_i| <= R)."""
    kvec = tuple(int(k) for k in kvec)
    t = len(kvec)
    if not 1 <= t <= 2:
        raise InvalidRange(f"singular integral needs t <= 2, got t={t}")
    if not 0 < R <= 10**3:
        raise InvalidRange(f"R must lie in (0, 10^3], got {R}")
    # |J(-xi)| = |J(xi)| since eta is real
    with track_performance("singular_integral_truncated", t=t, R=R):
        if t == 1:
            def g(x):
                return float(np.abs(window_integral(kvec, [[x]], profile)[0]) ** p)

            return 2.0 * _quad(g, 0.0, R, "singular integral")

        def inner(x1):
            def h(x2):
                rows = np.stack([np.full_like(x2, x1), x2], axis=1)
                return np.abs(window_integral(kvec, rows, profile)) ** p

            start = int(math.ceil(R)) + 1
            return float(adaptive_panels(h, (-R, R), start, tol=1e-7, what="inner singular integral"))

        return 2.0 * _quad(inner, 0.0, R, "singular integral")
