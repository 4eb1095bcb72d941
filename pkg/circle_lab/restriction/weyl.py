"""
Weyl sums on the arcs: empirical minor-arc scans, the oscillatory integral
J(beta, gamma; N) and the Poisson resummation of T near a rational.
"""
import logging
import math
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from circle_lab.arcs import FareyFraction, best_rational
from circle_lab.arith import gaussian_sum, window_integral
from circle_lab.errors import InvalidRange, NotMajorArc
from circle_lab.expsum import eval_weyl, make_rng, pairwise_sum, weyl_theta_scan
from circle_lab.monitoring import track_performance
from circle_lab.settings import get_settings
from circle_lab.surfaces import WeightProfile, weyl_exponent

logger = logging.getLogger(__name__)

MAX_SCAN_N = 512
PHASE_BUDGET = 1e6
GROWTH_SLACK = 1.5
GROWTH_EPS = 0.05


def _minor_alphas(rng: np.random.Generator, samples: int, N: int, k: int) -> np.ndarray:
    """Uniform alphas whose best approximation with q <= N^{k-1} has q >= N."""
    Qmax = N ** (k - 1)
    accepted = []
    attempts = 0
    while len(accepted) < samples:
        attempts += 1
        if attempts > 1000 * samples:
            raise InvalidRange(
                "minor arc rejection sampling stalled", context={"N": N, "k": k, "samples": samples}
            )
        alpha = float(rng.random())
        frac, _ = best_rational(alpha, Qmax)
        if frac.q >= N:
            accepted.append(alpha)
    return np.asarray(accepted)


def weyl_minor_scan(
    k: int,
    N_list: Sequence[int],
    samples: int,
    seed: int = 0,
    tau: Optional[float] = None,
    n_theta: int = 64,
) -> dict:
    """
    max |T(alpha, theta)| / N^{1-tau} over sampled minor-arc alphas and a
    theta grid, per N, with the growth ratios between consecutive N.
    """
    if k < 2:
        raise InvalidRange(f"k must be >= 2, got {k}")
    N_list = sorted(int(N) for N in N_list)
    if not N_list or N_list[-1] > MAX_SCAN_N or N_list[0] < 2:
        raise InvalidRange(f"each N must lie in [2, {MAX_SCAN_N}], got {N_list}")
    tau = float(weyl_exponent(k)) if tau is None else float(tau)
    rng = make_rng(seed)
    rows = []
    with track_performance("weyl_minor_scan", k=k, samples=samples):
        for N in N_list:
            alphas = _minor_alphas(rng, samples, N, k)
            modulus = weyl_theta_scan(WeightProfile(N=N), k, alphas, n_theta)
            flat = int(np.argmax(modulus))
            i, j = np.unravel_index(flat, modulus.shape)
            top = float(modulus[i, j])
            rows.append(
                {
                    "N": N,
                    "max_abs": top,
                    "normalized": top / N ** (1.0 - tau),
                    "alpha": float(alphas[i]),
                    "theta": j / n_theta,
                }
            )
            logger.info("Weyl minor arc scan", extra=rows[-1])
    ratios = []
    for prev, cur in zip(rows, rows[1:]):
        allowed = GROWTH_SLACK * 2.0 ** (GROWTH_EPS * math.log2(cur["N"] / prev["N"]))
        ratio = cur["normalized"] / prev["normalized"]
        ratios.append({"from": prev["N"], "to": cur["N"], "ratio": ratio, "allowed": allowed})
    return {
        "k": k,
        "tau": tau,
        "samples": samples,
        "seed": seed,
        "n_theta": n_theta,
        "rows": rows,
        "ratios": ratios,
        "passes": all(r["ratio"] <= r["allowed"] for r in ratios),
    }


def oscillatory_integral(w: WeightProfile, k: int, beta: float, gamma: float, N: int) -> complex:
    """J(beta, gamma; N) = int eta(x) e(beta N^k x^k + gamma N x) dx."""
    if abs(beta) * float(N) ** k > PHASE_BUDGET:
        raise InvalidRange(
            f"|beta| N^k = {abs(beta) * float(N) ** k:.3g} exceeds {PHASE_BUDGET:g}",
            context={"beta": beta, "N": N, "k": k},
        )
    xi = [[float(beta) * float(N) ** k, float(gamma) * N]]
    return complex(window_integral((k, 1), xi, w.profile)[0])


def _check_major(k: int, N: int, frac: FareyFraction, beta: float) -> None:
    settings = get_settings()
    if frac.q > settings.poisson_q_ratio * N:
        raise NotMajorArc(
            f"q={frac.q} exceeds {settings.poisson_q_ratio:g} N", context={"q": frac.q, "N": N}
        )
    limit = settings.poisson_beta_constant / (frac.q * float(N) ** (k - 1))
    if abs(beta) > limit:
        raise NotMajorArc(
            f"|beta| = {abs(beta):.3g} exceeds {limit:.3g}", context={"beta": beta, "limit": limit}
        )


def poisson_majorarc_check(
    w: WeightProfile,
    k: int,
    N: int,
    frac: FareyFraction,
    beta: float,
    theta: float,
    m_cut: int,
) -> dict:
    """
    T(a/q + beta, theta) against
    sum_{b mod q} q^{-1} S(a, b; q) sum_{|m| <= m_cut} N J(beta, theta - b/q - m; N).
    """
    _check_major(k, N, frac, beta)
    if m_cut < 0:
        raise InvalidRange(f"m_cut must be >= 0, got {m_cut}")
    q = frac.q
    alpha = float(Fraction(frac.a, q) + Fraction(beta))
    lhs = eval_weyl(w, k, alpha, theta)

    b = np.repeat(np.arange(q), 2 * m_cut + 1)
    m = np.tile(np.arange(-m_cut, m_cut + 1), q)
    xi = np.stack(
        [np.full(len(b), float(beta) * float(N) ** k), (theta - b / q - m) * float(N)], axis=1
    )
    J = window_integral((k, 1), xi, w.profile).reshape(q, 2 * m_cut + 1)
    gauss = np.array([gaussian_sum(frac.a, int(bb), q, k) for bb in range(q)]) / q
    rhs = complex(pairwise_sum(gauss * (N * pairwise_sum(J, axis=-1))))
    error = abs(lhs - rhs)
    return {
        "k": k,
        "N": N,
        "a": frac.a,
        "q": q,
        "beta": float(beta),
        "theta": float(theta),
        "m_cut": m_cut,
        "lhs": [lhs.real, lhs.imag],
        "rhs": [rhs.real, rhs.imag],
        "error": error,
        "relative_to_N": error / N,
    }


def poisson_convergence_study(
    w: WeightProfile,
    k: int,
    N: int,
    frac: FareyFraction,
    beta: float,
    theta: float,
    cuts: Sequence[int] = (4, 8, 16),
) -> dict:
    """Truncation error as m_cut doubles; calibrates the Poisson tolerance."""
    rows = [poisson_majorarc_check(w, k, N, frac, beta, theta, int(c)) for c in cuts]
    errors = [row["error"] for row in rows]
    slack = 1e-9 * N
    monotone = all(b <= a + slack for a, b in zip(errors, errors[1:]))
    return {
        "k": k,
        "N": N,
        "a": frac.a,
        "q": frac.q,
        "cuts": [int(c) for c in cuts],
        "errors": errors,
        "monotone": monotone,
        "tolerance": max(errors[-1], slack),
    }
