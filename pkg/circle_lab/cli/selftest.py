"""
Identity checks of every module at desk scale.

Each check computes one quantity two independent ways, or against a value
known exactly, and reports whether they agree.
"""
import logging
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Tuple

import numpy as np

from circle_lab import arcs, arith, majorants
from circle_lab.expsum import CoefficientSequence, eval_extension, grid_sample, make_rng, nyquist_grid
from circle_lab.monitoring import track_performance_decorator
from circle_lab.restriction import (
    Variant,
    decomposition_grid,
    even_moment_exact,
    even_moment_fourier,
    kernel_decompose,
    moment_quadrature,
    poisson_majorarc_check,
)
from circle_lab.surfaces import SurfaceSystem, WeightProfile, exponent_table

logger = logging.getLogger(__name__)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def check_exponents() -> Tuple[bool, str]:
    profile = exponent_table(SurfaceSystem.kth_powers(3))
    got = (profile.truncated_threshold, profile.full_threshold, profile.zeta_bound)
    return got == (6, 18, Fraction(1, 8)), f"k=3 thresholds {[str(x) for x in got]}"


def check_grid_sampling() -> Tuple[bool, str]:
    sys = SurfaceSystem.kth_powers(3)
    a = CoefficientSequence.random_unit(sys, 8, seed=1)
    grid = nyquist_grid(sys, 8, 2)
    table = grid_sample(a, sys, grid)
    worst = 0.0
    for j in make_rng(1).integers(0, grid.dims[0], size=16):
        direct = eval_extension(a, sys, grid.point((int(j),)))
        worst = max(worst, abs(direct - table.values[int(j)]) / max(abs(direct), 1.0))
    return worst <= 1e-9, f"max relative error {worst:.3g}"


def check_ramanujan() -> Tuple[bool, str]:
    for q in range(1, 31):
        for n in range(-30, 31):
            direct = arith.ramanujan_sum_direct(q, n)
            if abs(arith.ramanujan_sum(q, n) - direct) > 1e-8:
                return False, f"c_{q}({n}) disagrees"
    return True, "c_q(n) agrees for q <= 30, |n| <= 30"


def check_gauss_sums() -> Tuple[bool, str]:
    worst = max(abs(abs(arith.gaussian_sum(1, 0, p, 2)) - math.sqrt(p)) for p in (3, 5, 7, 11, 13, 97))
    return worst <= 1e-9, f"max ||S(1,0;p)| - sqrt p| = {worst:.3g}"


def check_divisor_moment() -> Tuple[bool, str]:
    value = arith.divisor_moment(1, 2, 4)
    return value == 14, f"sum d(l, 2) over |l| <= 4 = {value}"


def check_mollifiers() -> Tuple[bool, str]:
    fam = arcs.MollifierFamily(k=3, N=16, c1=Fraction(1, 8))
    samples = make_rng(0).uniform(-2.0, 2.0, size=512) / fam.scale
    partition = max(arcs.partition_check(fam, Q, samples) for Q in fam.levels)
    flatness = float(np.max(np.abs(arcs.major_core_samples(fam, seed=0, fractions=20) - 1.0)))
    closed = arcs.mollifier_fourier(fam, 1, 0, 3)
    direct = arcs.mollifier_fourier_direct(fam, 1, 0, 3)
    transform = abs(closed - direct) / max(abs(closed), 1e-300)
    passed = partition <= 1e-14 and flatness <= 1e-12 and transform <= 1e-6 and fam.disjoint
    return passed, f"partition {partition:.3g}, flatness {flatness:.3g}, transform {transform:.3g}"


def check_majorant_transform() -> Tuple[bool, str]:
    params = majorants.MajorantParams(p=4.0, Q=2, N=16, k=3)
    closed = majorants.majorant_fourier(params, 3)
    direct = majorants.majorant_fourier_direct(params, 3)
    error = abs(closed - direct) / max(abs(closed), 1e-300)
    return error <= 1e-6, f"V^(3) closed form vs quadrature {error:.3g}"


def check_even_moment() -> Tuple[bool, str]:
    sys = SurfaceSystem.kth_powers(3)
    a = CoefficientSequence.all_ones(sys, 4)
    table = grid_sample(a, sys, nyquist_grid(sys, 4, 2))
    values = (
        even_moment_exact(a, sys, 2).value,
        moment_quadrature(table, 4).value,
        even_moment_fourier(table, 2).value,
    )
    passed = all(abs(v - 28) <= 1e-9 * 28 for v in values)
    return passed, f"int |F_a|^4 via three routes: {[round(v, 12) for v in values]}"


def check_decomposition() -> Tuple[bool, str]:
    sys = SurfaceSystem.kth_powers(3)
    fam = arcs.MollifierFamily(k=3, N=8)
    grid = decomposition_grid(sys, 8)
    errors = [
        kernel_decompose(WeightProfile(N=8), sys, fam, grid, variant).completeness_error()
        for variant in Variant
    ]
    return max(errors) <= 1e-10 * 8, f"completeness errors {[f'{e:.3g}' for e in errors]}"


def check_poisson_window() -> Tuple[bool, str]:
    report = poisson_majorarc_check(
        WeightProfile(N=64), 3, 64, arcs.FareyFraction(q=1, a=1), 0.0, 0.0, 8
    )
    return report["error"] <= 1e-6 * 64, f"q=1 window error {report['error']:.3g}"


CHECKS: List[Tuple[str, Callable[[], Tuple[bool, str]]]] = [
    ("surfaces.exponent_table", check_exponents),
    ("expsum.grid_sample", check_grid_sampling),
    ("arith.ramanujan_sum", check_ramanujan),
    ("arith.gaussian_sum", check_gauss_sums),
    ("arith.divisor_moment", check_divisor_moment),
    ("arcs.mollifiers", check_mollifiers),
    ("majorants.majorant_fourier", check_majorant_transform),
    ("restriction.even_moment", check_even_moment),
    ("restriction.kernel_decompose", check_decomposition),
    ("restriction.poisson_majorarc_check", check_poisson_window),
]


@track_performance_decorator("selftest")
def run_checks() -> List[CheckResult]:
    results = []
    for name, check in CHECKS:
        start = time.perf_counter()
        try:
            passed, detail = check()
        except Exception as e:
            logger.error("Self-test check raised", extra={"check": name, "error": str(e)})
            passed, detail = False, f"{type(e).__name__}: {e}"
        results.append(CheckResult(name, bool(passed), detail, time.perf_counter() - start))
        logger.info("Self-test check", extra={"check": name, "passed": bool(passed)})
    return results


def run_selftest() -> int:
    results = run_checks()
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<38} {r.detail} ({r.seconds:.2f}s)")
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 0 if failed == 0 else 1
