"""
Subcommand handlers.

Each handler maps one ExperimentConfig onto module operations and returns a
CommandResult: the report payload, optional CSV tables and a one-line
summary echoed to stdout.
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from circle_lab import arcs, arith, majorants
from circle_lab.cli.models import ExperimentConfig
from circle_lab.errors import InvalidRange
from circle_lab.expsum import (
    CoefficientSequence,
    FourierTable,
    TorusGrid,
    eval_extension,
    eval_weyl,
    grid_sample,
    kernel_grid_sample,
    make_rng,
    nyquist_grid,
)
from circle_lab.restriction import (
    CoefficientRule,
    decomposition_grid,
    even_moment_chain,
    even_moment_exact,
    even_moment_fourier,
    kernel_decompose,
    layer_cake_moment,
    level_set_exponent_fit,
    level_set_measure,
    moment_quadrature,
    piece_bound_scan,
    piece_fourier_check,
    poisson_convergence_study,
    poisson_majorarc_check,
    scaling_fit,
    tomas_stein_check,
    truncated_moment,
    weyl_minor_scan,
)
from circle_lab.settings import get_settings
from circle_lab.stores import load_table, save_table
from circle_lab.surfaces import Family, curve_exponent_ranges, exponent_table

logger = logging.getLogger(__name__)

Table = Tuple[Sequence[str], List[Sequence[Any]]]


@dataclass
class CommandResult:
    params: Dict[str, Any]
    values: Any
    summary: str
    fits: Optional[Any] = None
    tables: Dict[str, Table] = field(default_factory=dict)
    passed: bool = True


def _coefficients(cfg: ExperimentConfig, N: Optional[int] = None) -> CoefficientSequence:
    sys = cfg.surface()
    N = N or cfg.N
    if cfg.coefficients is CoefficientRule.RANDOM_UNIT:
        return CoefficientSequence.random_unit(sys, N, cfg.seed)
    return CoefficientSequence.all_ones(sys, N)


def _family(cfg: ExperimentConfig) -> arcs.MollifierFamily:
    if cfg.c1 is None:
        return arcs.MollifierFamily.from_settings(cfg.k, cfg.N)
    return arcs.MollifierFamily(k=cfg.k, N=cfg.N, c1=Fraction(cfg.c1).limit_denominator(10**6))


def _maybe_save(cfg: ExperimentConfig, table) -> Optional[str]:
    if cfg.save_table is None:
        return None
    return str(save_table(table, cfg.save_table))


def _sample(cfg: ExperimentConfig, a: CoefficientSequence, sys, grid: TorusGrid) -> FourierTable:
    """F_a on ``grid``, or the table saved at --table when one is given."""
    if cfg.table is None:
        return grid_sample(a, sys, grid)
    table = load_table(cfg.table)
    saved_N = table.provenance.get("N")
    if saved_N is not None and int(saved_N) != cfg.N:
        raise InvalidRange(
            f"table {cfg.table} was sampled at N={saved_N}, not N={cfg.N}",
            context={"table": str(cfg.table)},
        )
    logger.info("Loaded Fourier table", extra={"path": str(cfg.table), "dims": list(table.grid.dims)})
    return table


def _fmt(z: complex) -> str:
    return f"{z.real:.12g}{z.imag:+.12g}i"


# ---------------------------------------------------------------------------
# Exponential sums
# ---------------------------------------------------------------------------


def cmd_weylsum(cfg: ExperimentConfig) -> CommandResult:
    w = cfg.weight()
    rows = []
    for alpha in cfg.alpha:
        for theta in cfg.theta:
            value = eval_weyl(w, cfg.k, alpha, theta)
            rows.append((alpha, theta, value.real, value.imag, abs(value)))
    first = complex(rows[0][2], rows[0][3])
    values = [{"alpha": r[0], "theta": r[1], "T": [r[2], r[3]], "abs": r[4]} for r in rows]
    return CommandResult(
        params={"k": cfg.k, "N": cfg.N, "profile": cfg.profile.value},
        values=values,
        summary=f"T({rows[0][0]}, {rows[0][1]}) = {_fmt(first)}",
        tables={"weylsum": (("alpha", "theta", "re", "im", "abs"), rows)} if len(rows) > 1 else {},
    )


def cmd_extension(cfg: ExperimentConfig) -> CommandResult:
    sys = cfg.surface()
    a = _coefficients(cfg)
    value = eval_extension(a, sys, cfg.alpha)
    return CommandResult(
        params={"system": sys, "N": cfg.N, "coefficients": cfg.coefficients, "alpha": cfg.alpha},
        values={"F_a": [value.real, value.imag], "abs": abs(value), "l2_norm": a.l2_norm},
        summary=f"F_a({', '.join(str(x) for x in cfg.alpha)}) = {_fmt(value)}",
    )


def cmd_gridsample(cfg: ExperimentConfig) -> CommandResult:
    sys = cfg.surface()
    a = _coefficients(cfg)
    grid = nyquist_grid(sys, cfg.N, cfg.s or 1, offsets=cfg.offsets, oversample=cfg.oversample)
    table = grid_sample(a, sys, grid)
    points = make_rng(cfg.seed).integers(0, grid.dims, size=(min(cfg.samples, 64), grid.r))
    errors = []
    for index in points:
        index = tuple(int(i) for i in index)
        direct = eval_extension(a, sys, grid.point(index))
        errors.append(abs(direct - table.values[index]) / max(abs(direct), 1.0))
    values = {
        "grid": grid,
        "sup": table.sup(),
        "l2_norm": a.l2_norm,
        "spot_check_max_relative_error": float(max(errors)),
        "saved_to": _maybe_save(cfg, table),
    }
    return CommandResult(
        params={"system": sys, "N": cfg.N, "s": cfg.s or 1, "coefficients": cfg.coefficients},
        values=values,
        summary=f"grid {grid.dims}: sup|F_a| = {table.sup():.6g}, spot-check error {max(errors):.3g}",
    )


# ---------------------------------------------------------------------------
# Arcs, mollifiers and majorants
# ---------------------------------------------------------------------------


def cmd_arcs(cfg: ExperimentConfig) -> CommandResult:
    major, a, q = arcs.classify_arcs(cfg.alpha, cfg.Q, cfg.N, cfg.k)
    rows = [
        (alpha, bool(m), int(aa) if m else None, int(qq) if m else None)
        for alpha, m, aa, qq in zip(cfg.alpha, major, a, q)
    ]
    labels = [f"Major({r[2]},{r[3]})" if r[1] else "Minor" for r in rows]
    values = [{"alpha": r[0], "class": label} for r, label in zip(rows, labels)]
    return CommandResult(
        params={"k": cfg.k, "N": cfg.N, "Q": cfg.Q},
        values=values,
        summary=", ".join(labels),
        tables={"arcs": (("alpha", "major", "a", "q"), rows)},
    )


def cmd_mollifier(cfg: ExperimentConfig) -> CommandResult:
    fam = _family(cfg)
    mode = cfg.mode or "profile"
    params = {"k": fam.k, "N": fam.N, "c1": str(fam.c1), "mode": mode}
    if mode == "profile":
        start, end = fam.fundamental_domain()
        alphas = cfg.alpha or list(np.linspace(start, end, cfg.samples, endpoint=False))
        profile = arcs.mollifier_profile(fam, alphas)
        arc_rows = arcs.arc_table(fam)
        return CommandResult(
            params=params,
            values={"levels": list(fam.levels), "arcs": len(arc_rows), "disjoint": fam.disjoint},
            summary=f"{len(arc_rows)} arc translates over levels {list(fam.levels)}",
            tables={
                "mollifier_profile": (("alpha", "lambda", "rho"), profile),
                "arc_table": (("Q", "s", "a", "q", "center", "halfwidth"), arc_rows),
            },
        )
    if mode == "fourier":
        Q = cfg.Q or 1
        shift = cfg.shift if cfg.shift is not None else fam.shifts(Q)[0]
        scan = arcs.mollifier_fourier_scan(fam, Q, shift, cfg.n_max)
        n_values = range(0, min(cfg.n_max, 8) + 1)
        rows = []
        for n in n_values:
            closed = arcs.mollifier_fourier(fam, Q, shift, n)
            direct = arcs.mollifier_fourier_direct(fam, Q, shift, n)
            rows.append((n, closed.real, direct.real, abs(closed - direct)))
        rho = arcs.rho_fourier_scan(fam, cfg.n_max)
        worst = max(r[3] for r in rows)
        return CommandResult(
            params={**params, "Q": Q, "s": shift, "n_max": cfg.n_max},
            values={"scan": scan, "rho": rho, "max_quadrature_difference": worst},
            summary=f"Phi^ closed form vs quadrature: max difference {worst:.3g}",
            tables={"mollifier_fourier": (("n", "closed_form", "quadrature", "difference"), rows)},
        )
    if mode == "partition":
        rng = make_rng(cfg.seed)
        samples = rng.uniform(-2.0, 2.0, size=cfg.samples) / fam.scale
        deviations = {Q: arcs.partition_check(fam, Q, samples) for Q in fam.levels}
        lam = arcs.major_core_samples(fam, cfg.seed)
        flatness = float(np.max(np.abs(lam - 1.0)))
        return CommandResult(
            params=params,
            values={
                "partition_deviation": {str(Q): v for Q, v in deviations.items()},
                "core_flatness": flatness,
                "disjoint": arcs.disjointness_check(fam),
            },
            summary=f"partition deviation {max(deviations.values()):.3g}, core flatness {flatness:.3g}",
        )
    raise InvalidRange(f"mollifier mode must be profile, fourier or partition, got {mode!r}")


def cmd_majorant(cfg: ExperimentConfig) -> CommandResult:
    params = majorants.MajorantParams(p=cfg.p, Q=cfg.Q, N=cfg.N, k=cfg.k, **({"eps": cfg.eps} if cfg.eps else {}))
    w = cfg.weight()
    thetas = np.linspace(0.0, 1.0, cfg.samples, endpoint=False)
    profile = majorants.majorant_profile(params, w, thetas)
    domination = majorants.domination_check(params, w, cfg.samples, cfg.seed)
    bound = majorants.majorant_divisor_bound_scan(params, max(cfg.n_max, 1))
    return CommandResult(
        params=params,
        values={"domination": domination, "divisor_bound": bound},
        summary=f"C_major = {domination['C_major']}, C_p = {bound['C_p']:.4g}",
        tables={"majorant_profile": (("theta", "V", "F_p_scaled"), profile)},
    )


# ---------------------------------------------------------------------------
# Arithmetic
# ---------------------------------------------------------------------------


def cmd_repcount(cfg: ExperimentConfig) -> CommandResult:
    sys = cfg.surface()
    table = arith.representation_table(sys, cfg.s, cfg.N)
    values = {
        "targets": len(table),
        "total": table.total(),
        "max": int(table.counts.max()),
        "sum_squares": table.sum_squares(),
    }
    return CommandResult(
        params={"system": sys, "s": cfg.s, "N": cfg.N},
        values=values,
        summary=f"{len(table)} targets, sum R^2 = {values['sum_squares']}",
        tables={"repcount": ([f"u_{i + 1}" for i in range(sys.r)] + ["count"], table.rows())},
    )


def cmd_hypk(cfg: ExperimentConfig) -> CommandResult:
    report = arith.hypothesis_k_scan(cfg.k, cfg.s, cfg.X)
    rows = [(g["X"], g["max_R"]) for g in report["growth"]]
    return CommandResult(
        params={"k": cfg.k, "s": cfg.s, "X": cfg.X},
        values=report,
        summary=f"max R_{{{cfg.s},{cfg.k}}}(n) for n <= {cfg.X}: {report['max_R']}",
        tables={"hypk_growth": (("X", "max_R"), rows)},
    )


def cmd_vinogradov(cfg: ExperimentConfig) -> CommandResult:
    count = arith.vinogradov_count(cfg.s, cfg.k, cfg.N)
    diagonal = arith.vinogradov_diagonal(cfg.s, cfg.N)
    return CommandResult(
        params={"s": cfg.s, "k": cfg.k, "N": cfg.N},
        values={"J": count, "diagonal": diagonal},
        summary=f"J_{{{cfg.s},{cfg.k}}}({cfg.N}) = {count} (diagonal {diagonal})",
    )


def cmd_divisor(cfg: ExperimentConfig) -> CommandResult:
    mode = cfg.mode or "moment"
    if mode == "moment":
        value = arith.divisor_moment(cfg.B, cfg.Q, cfg.X)
        return CommandResult(
            params={"B": cfg.B, "Q": cfg.Q, "X": cfg.X, "mode": mode},
            values={"moment": value},
            summary=f"sum d(l, {cfg.Q})^{cfg.B} over |l| <= {cfg.X} = {value}",
        )
    if mode == "tail":
        if cfg.D is None:
            raise InvalidRange("divisor tail needs --D")
        count = arith.divisor_tail_count(cfg.D, cfg.Q, cfg.X)
        moment = arith.divisor_moment(cfg.B, cfg.Q, cfg.X)
        markov = moment / cfg.D**cfg.B
        return CommandResult(
            params={"B": cfg.B, "D": cfg.D, "Q": cfg.Q, "X": cfg.X, "mode": mode},
            values={"tail_count": count, "markov_bound": markov, "consistent": count <= markov},
            summary=f"#{{d(n, {cfg.Q}) >= {cfg.D}}} = {count} <= {markov:.6g}",
        )
    raise InvalidRange(f"divisor mode must be moment or tail, got {mode!r}")


def cmd_gauss(cfg: ExperimentConfig) -> CommandResult:
    value = arith.gaussian_sum(cfg.a, cfg.b, cfg.q, cfg.k)
    return CommandResult(
        params={"a": cfg.a, "b": cfg.b, "q": cfg.q, "k": cfg.k},
        values={"S": [value.real, value.imag], "abs": abs(value), "normalized": abs(value) / cfg.q},
        summary=f"S({cfg.a}, {cfg.b}; {cfg.q}) = {_fmt(value)}",
    )


def cmd_hua_scan(cfg: ExperimentConfig) -> CommandResult:
    report = arith.hua_constant_scan(cfg.k, cfg.qmax, cfg.eps)
    rows = [(q, r) for q, r in enumerate(report["per_q"], start=1)]
    return CommandResult(
        params={"k": cfg.k, "qmax": cfg.qmax, "eps": cfg.eps},
        values={key: report[key] for key in ("max_ratio", "argmax")},
        summary=f"Hua constant {report['max_ratio']:.6g} at {report['argmax']}",
        tables={"hua_scan": (("q", "ratio"), rows)},
    )


def cmd_singular(cfg: ExperimentConfig) -> CommandResult:
    mode = cfg.mode or "series"
    kvec = tuple(cfg.exponents)
    if mode == "series":
        report = arith.singular_series_partial(kvec, cfg.p, cfg.Qmax)
        rows = [(q, t, s) for q, (t, s) in enumerate(zip(report.terms, report.partial_sums), start=1)]
        return CommandResult(
            params={"kvec": kvec, "p": cfg.p, "Qmax": cfg.Qmax, "mode": mode},
            values=report,
            summary=f"partial singular series {report.total:.10g} (decay {report.decay_exponent})",
            tables={"singular_series": (("q", "term", "partial_sum"), rows)},
        )
    if mode == "integral":
        value = arith.singular_integral_truncated(kvec, cfg.p, cfg.R, cfg.profile)
        return CommandResult(
            params={"kvec": kvec, "p": cfg.p, "R": cfg.R, "mode": mode},
            values={"integral": value},
            summary=f"truncated singular integral {value:.10g}",
        )
    raise InvalidRange(f"singular mode must be series or integral, got {mode!r}")


# ---------------------------------------------------------------------------
# Restriction functionals
# ---------------------------------------------------------------------------


def _moment_grid(cfg: ExperimentConfig, p: float):
    sys = cfg.surface()
    even = float(p) == round(p) and int(round(p)) % 2 == 0
    s = int(round(p)) // 2 if even else int(np.ceil(p / 2.0))
    oversample = cfg.oversample if even else max(cfg.oversample, 2)
    return nyquist_grid(sys, cfg.N, s, offsets=cfg.offsets, oversample=oversample)


def _chain_holds(chain: Optional[dict]) -> bool:
    return chain is None or (chain["first_holds"] and chain["second_holds"])


def cmd_moments(cfg: ExperimentConfig) -> CommandResult:
    sys = cfg.surface()
    a = _coefficients(cfg)
    p = cfg.p
    even = float(p) == round(p) and int(round(p)) % 2 == 0
    values: Dict[str, Any] = {}
    if cfg.exact:
        if not even:
            raise InvalidRange(f"--exact needs an even integer p, got {p}")
        exact = even_moment_exact(a, sys, int(round(p)) // 2)
        values["exact"] = exact
        values["chain"] = even_moment_chain(a, sys, int(round(p)) // 2)
        headline = exact.exact if exact.exact is not None else exact.value
    table = _sample(cfg, a, sys, _moment_grid(cfg, p))
    quad = moment_quadrature(table, p)
    values["quadrature"] = quad
    if even:
        values["fourier"] = even_moment_fourier(table, int(round(p)) // 2)
    if not cfg.exact:
        headline = quad.value
    values["grid"] = table.grid
    values["saved_to"] = _maybe_save(cfg, table)
    return CommandResult(
        params={"system": sys, "N": cfg.N, "p": p, "coefficients": cfg.coefficients},
        values=values,
        summary=f"{headline}",
        passed=_chain_holds(values.get("chain")),
    )


def _oversampled_table(cfg: ExperimentConfig):
    sys = cfg.surface()
    a = _coefficients(cfg)
    oversample = max(cfg.oversample, get_settings().level_set_oversample)
    grid = nyquist_grid(sys, cfg.N, 1, offsets=cfg.offsets, oversample=oversample)
    return sys, a, _sample(cfg, a, sys, grid)


def cmd_levelset(cfg: ExperimentConfig) -> CommandResult:
    sys, a, table = _oversampled_table(cfg)
    if cfg.lam is not None:
        lam = cfg.lam
    elif cfg.eta is not None:
        lam = cfg.eta * cfg.N ** (sys.d / 2.0) * a.l2_norm
    elif cfg.lambda_frac is not None:
        lam = cfg.lambda_frac * table.sup()
    else:
        raise InvalidRange("levelset needs --lambda, --eta or --lambda-frac")
    report = level_set_measure(table, lam)
    return CommandResult(
        params={"system": sys, "N": cfg.N, "coefficients": cfg.coefficients},
        values=report,
        summary=f"m(E_{lam:.6g}) = {report.measure:.6g} (refinement delta {report.refinement_delta})",
    )


def cmd_truncated(cfg: ExperimentConfig) -> CommandResult:
    sys = cfg.surface()
    a = _coefficients(cfg)
    table = _sample(cfg, a, sys, _moment_grid(cfg, cfg.p))
    value = truncated_moment(table, cfg.p, cfg.lambda_cut)
    full = moment_quadrature(table, cfg.p, refine=False).value
    return CommandResult(
        params={"system": sys, "N": cfg.N, "p": cfg.p, "lambda_cut": cfg.lambda_cut},
        values={
            "truncated": value,
            "layer_cake": layer_cake_moment(table, cfg.p, cfg.lambda_cut),
            "full": full,
            "ratio": value / full if full else None,
        },
        summary=f"truncated moment {value:.10g} of {full:.10g}",
    )


def cmd_tomas_stein(cfg: ExperimentConfig) -> CommandResult:
    sys = cfg.surface()
    a = _coefficients(cfg)
    grid = decomposition_grid(sys, cfg.N)
    table_Fa = _sample(cfg, a, sys, grid)
    table_F = kernel_grid_sample(cfg.weight(), sys, TorusGrid(table_Fa.grid.dims))
    fractions = [cfg.lambda_frac] if cfg.lambda_frac is not None else [0.25, 0.5, 0.75]
    levels = [cfg.lam] if cfg.lam is not None else [f * table_Fa.sup() for f in fractions]
    reports = [tomas_stein_check(table_Fa, table_F, lam) for lam in levels]
    holds = all(r["holds"] for r in reports)
    return CommandResult(
        params={"system": sys, "N": cfg.N, "coefficients": cfg.coefficients},
        values={"checks": reports, "holds": holds, "grid": grid},
        summary=f"Tomas-Stein holds at {sum(r['holds'] for r in reports)}/{len(reports)} levels",
        passed=holds,
    )


def _decompose(cfg: ExperimentConfig, retain=None):
    sys = cfg.surface()
    fam = _family(cfg)
    grid = decomposition_grid(sys, cfg.N)
    return kernel_decompose(cfg.weight(), sys, fam, grid, cfg.variant, cfg.Q1, retain)


def cmd_decompose(cfg: ExperimentConfig) -> CommandResult:
    dcp = _decompose(cfg)
    summary = dcp.summary()
    bounds = piece_bound_scan(dcp)
    rows = [(r["Q"], r["s"], r["sup"], r["bound"], r["C"]) for r in bounds["pieces"]]
    return CommandResult(
        params={"variant": cfg.variant, "N": cfg.N, "k": cfg.k, "d": cfg.d, "Q1": cfg.Q1},
        values=summary,
        fits=bounds,
        summary=f"|F - (F_major + F_minor)| <= {summary['completeness_error']:.3g}",
        tables={"piece_bounds": (("Q", "s", "sup", "bound", "C"), rows)},
    )


def cmd_piece_check(cfg: ExperimentConfig) -> CommandResult:
    dcp = _decompose(cfg, retain=[(cfg.Q, cfg.shift)])
    check = piece_fourier_check(dcp, cfg.Q, cfg.shift, cfg.samples, cfg.seed)
    mean_hat = complex(dcp.piece_weight_hat(cfg.Q, cfg.shift, [0])[0])
    return CommandResult(
        params={"variant": cfg.variant, "N": cfg.N, "Q": cfg.Q, "s": cfg.shift},
        values={"fourier_check": check, "weight_hat_at_zero": abs(mean_hat)},
        fits=piece_bound_scan(dcp),
        summary=f"piece Fourier identity error {check['max_error']:.3g}",
        passed=bool(check["passes"]),
    )


def cmd_weyl_scan(cfg: ExperimentConfig) -> CommandResult:
    report = weyl_minor_scan(cfg.k, cfg.N_list, cfg.samples, cfg.seed, cfg.tau, cfg.n_theta)
    rows = [(r["N"], r["max_abs"], r["normalized"]) for r in report["rows"]]
    return CommandResult(
        params={"k": cfg.k, "N_list": cfg.N_list, "samples": cfg.samples, "tau": report["tau"]},
        values=report,
        summary=f"normalized maxima {[round(r[2], 4) for r in rows]}, passes={report['passes']}",
        passed=bool(report["passes"]),
        tables={"weyl_scan": (("N", "max_abs", "normalized"), rows)},
    )


def cmd_poisson_check(cfg: ExperimentConfig) -> CommandResult:
    frac = arcs.FareyFraction.from_pair(cfg.a, cfg.q)
    w = cfg.weight()
    theta = cfg.theta[0]
    check = poisson_majorarc_check(w, cfg.k, cfg.N, frac, cfg.beta, theta, cfg.m_cut)
    cuts = sorted({max(cfg.m_cut // 2, 1), cfg.m_cut, 2 * cfg.m_cut})
    study = poisson_convergence_study(w, cfg.k, cfg.N, frac, cfg.beta, theta, cuts)
    return CommandResult(
        params={"k": cfg.k, "N": cfg.N, "a": frac.a, "q": frac.q, "beta": cfg.beta, "theta": theta},
        values={"check": check, "study": study},
        summary=f"Poisson error {check['error']:.3g} at m_cut={cfg.m_cut}",
        tables={"poisson_study": (("m_cut", "error"), list(zip(study["cuts"], study["errors"])))},
    )


def cmd_scaling(cfg: ExperimentConfig) -> CommandResult:
    report = scaling_fit(cfg.surface(), cfg.p, cfg.N_list, cfg.coefficients, cfg.seed)
    rows = [(r["N"], r["moment"]) for r in report["rows"]]
    return CommandResult(
        params={"system": cfg.surface(), "p": cfg.p, "N_list": cfg.N_list},
        values=report["rows"],
        fits={key: report[key] for key in ("fit", "predicted_slope", "deviation")},
        summary=f"slope {report['fit']['slope']:.4f} (predicted {report['predicted_slope']})",
        tables={"scaling": (("N", "moment"), rows)},
    )


def cmd_levelset_fit(cfg: ExperimentConfig) -> CommandResult:
    report = level_set_exponent_fit(cfg.surface(), cfg.N_list, cfg.eta, cfg.eta_exponent)
    rows = [(r["N"], r["eta"], r["lambda"], r["measure"]) for r in report["rows"]]
    return CommandResult(
        params={"system": cfg.surface(), "N_list": cfg.N_list, "eta": cfg.eta, "eta_exponent": cfg.eta_exponent},
        values=report["rows"],
        fits={key: report[key] for key in ("fit", "predicted_slope", "deviation", "zeta")},
        summary=f"slope {report['fit']['slope']:.4f} (predicted {report['predicted_slope']})",
        tables={"levelset_fit": (("N", "eta", "lambda", "measure"), rows)},
    )


def cmd_exponents(cfg: ExperimentConfig) -> CommandResult:
    sys = cfg.surface()
    if sys.family is Family.MONOMIAL_CURVE:
        ranges = curve_exponent_ranges(sys.exponents)
        return CommandResult(
            params={"system": sys},
            values=ranges,
            summary=f"tau={ranges.tau}, truncated p>{ranges.truncated_threshold}, conjectured p>{ranges.conjectured}",
        )
    profile = exponent_table(sys, cfg.tau)
    return CommandResult(
        params={"system": sys, "tau": cfg.tau},
        values=profile,
        summary=(
            f"tau={profile.tau}, truncated p>{profile.truncated_threshold}, "
            f"full p>{profile.full_threshold}, zeta={profile.zeta_bound}"
        ),
    )


HANDLERS: Dict[str, Callable[[ExperimentConfig], CommandResult]] = {
    "weylsum": cmd_weylsum,
    "extension": cmd_extension,
    "gridsample": cmd_gridsample,
    "arcs": cmd_arcs,
    "mollifier": cmd_mollifier,
    "majorant": cmd_majorant,
    "repcount": cmd_repcount,
    "hypk": cmd_hypk,
    "vinogradov": cmd_vinogradov,
    "divisor": cmd_divisor,
    "gauss": cmd_gauss,
    "hua-scan": cmd_hua_scan,
    "singular": cmd_singular,
    "moments": cmd_moments,
    "levelset": cmd_levelset,
    "truncated": cmd_truncated,
    "tomas-stein": cmd_tomas_stein,
    "decompose": cmd_decompose,
    "piece-check": cmd_piece_check,
    "weyl-scan": cmd_weyl_scan,
    "poisson-check": cmd_poisson_check,
    "scaling": cmd_scaling,
    "levelset-fit": cmd_levelset_fit,
    "exponents": cmd_exponents,
}
