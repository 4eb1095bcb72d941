"""
circle-lab command line.

Usage:
    circle-lab <command> [--config run.json] [flags...]
    circle-lab --selftest

Flags override values from the JSON config file. Every run writes
report.json (with the fully resolved config), CSV tables for tabular
results and timings.json into --output-dir, and prints a one-line summary.
"""
import argparse
import json
import os
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional

from pydantic import ValidationError

from circle_lab.cli.commands import HANDLERS
from circle_lab.cli.models import COMMANDS, ExperimentConfig
from circle_lab.errors import CircleLabError, ToleranceCheckFailure
from circle_lab.logger import log_error, log_operation, log_performance
from circle_lab.monitoring import (
    capture_exception,
    get_monitoring_stats,
    initialize_sentry,
    performance_tracker,
    track_performance,
)
from circle_lab.restriction import CoefficientRule, Variant
from circle_lab.settings import reload_settings
from circle_lab.stores import ReportStore
from circle_lab.surfaces import Family, Profile
from circle_lab.version import __version__

# Settings fields a run may override, by environment variable
_ENV_OVERRIDES = {"threads": "CIRCLE_LAB_THREADS", "budget": "CIRCLE_LAB_BUDGET"}


def _flags() -> argparse.ArgumentParser:
    """Flags shared by every subcommand. Unset flags leave the config file alone."""
    parser = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS, allow_abbrev=False)
    parser.add_argument("--config", type=Path, help="JSON experiment config; flags override it")

    surface = parser.add_argument_group("surface")
    surface.add_argument("--family", type=Family, choices=list(Family))
    surface.add_argument("--k", type=int, help="degree")
    surface.add_argument("--d", type=int, help="paraboloid dimension")
    surface.add_argument("--exponents", type=int, nargs="+", help="monomial curve exponents k_1 < ... < k_t")
    surface.add_argument("--profile", type=Profile, choices=list(Profile))

    scales = parser.add_argument_group("scales and points")
    scales.add_argument("--N", type=int)
    scales.add_argument("--N-list", dest="N_list", type=int, nargs="+")
    scales.add_argument("--alpha", type=float, nargs="+")
    scales.add_argument("--theta", type=float, nargs="+")
    scales.add_argument("--p", type=float, help="moment exponent")
    scales.add_argument("--s", type=int, help="number of summands / half the even exponent")
    scales.add_argument("--lambda", dest="lam", type=float, help="absolute level")
    scales.add_argument("--lambda-frac", dest="lambda_frac", type=float, help="level as a fraction of sup|F_a|")
    scales.add_argument("--eta", type=float, help="normalized level eta")
    scales.add_argument("--eta-exponent", dest="eta_exponent", type=float, help="eta = N^-c")
    scales.add_argument("--lambda-cut", dest="lambda_cut", type=float)
    scales.add_argument("--exact", action="store_true", help="count representations instead of sampling")

    coeffs = parser.add_argument_group("coefficients")
    coeffs.add_argument("--all-ones", dest="coefficients", action="store_const", const=CoefficientRule.ALL_ONES)
    coeffs.add_argument(
        "--random-unit", dest="coefficients", action="store_const", const=CoefficientRule.RANDOM_UNIT
    )

    arcs = parser.add_argument_group("arcs and mollifiers")
    arcs.add_argument("--Q", type=int, help="dyadic level or arc parameter")
    arcs.add_argument("--shift", type=int, help="mollifier shift s")
    arcs.add_argument("--c1", type=float)
    arcs.add_argument("--Q1", type=int, help="highest retained level in the decomposition")
    arcs.add_argument("--variant", type=Variant, choices=list(Variant))
    arcs.add_argument("--mode", help="sub-mode of mollifier, divisor and singular")

    arith = parser.add_argument_group("arithmetic")
    arith.add_argument("--a", type=int)
    arith.add_argument("--b", type=int)
    arith.add_argument("--q", type=int)
    arith.add_argument("--B", type=int, help="divisor moment power")
    arith.add_argument("--D", type=float, help="divisor tail threshold")
    arith.add_argument("--X", type=int)
    arith.add_argument("--qmax", type=int)
    arith.add_argument("--Qmax", type=int)
    arith.add_argument("--R", type=float, help="singular integral box")
    arith.add_argument("--eps", type=float)
    arith.add_argument("--n-max", dest="n_max", type=int)

    scans = parser.add_argument_group("scans")
    scans.add_argument("--samples", type=int)
    scans.add_argument("--n-theta", dest="n_theta", type=int)
    scans.add_argument("--tau", type=float, help="Weyl exponent override")
    scans.add_argument("--beta", type=float)
    scans.add_argument("--m-cut", dest="m_cut", type=int)
    scans.add_argument("--oversample", type=int)
    scans.add_argument("--offsets", type=float, nargs="+")

    run = parser.add_argument_group("run")
    run.add_argument("--seed", type=int)
    run.add_argument("--threads", type=int, help="cap on FFT workers")
    run.add_argument("--budget", type=int, help="max grid points per torus grid")
    run.add_argument("--output-dir", dest="output_dir", type=Path)
    run.add_argument("--table", type=Path, help="load a saved Fourier table instead of sampling")
    run.add_argument("--save-table", dest="save_table", type=Path, help="dump the sampled Fourier table")
    return parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="circle-lab",
        description="Numerical laboratory for discrete restriction and the circle method",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--selftest", action="store_true", help="run the identity checks of every module")
    subparsers = parser.add_subparsers(dest="command", metavar="command")
    shared = _flags()
    for name in COMMANDS:
        subparsers.add_parser(name, parents=[shared], help=HANDLERS[name].__doc__)
    return parser


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    """Merge the JSON config file with explicit flags and validate."""
    data: Dict[str, Any] = {}
    flags = dict(vars(args))
    flags.pop("selftest", None)
    config_path = flags.pop("config", None)
    if config_path is not None:
        with open(config_path, encoding="utf-8") as f:
            data.update(json.load(f))
    data.update(flags)
    data["command"] = args.command
    return ExperimentConfig.model_validate(data)


@contextmanager
def settings_overrides(cfg: ExperimentConfig) -> Iterator[None]:
    """Apply --threads and --budget to the settings for the duration of a run."""
    saved = {}
    for field, var in _ENV_OVERRIDES.items():
        value = getattr(cfg, field)
        if value is not None:
            saved[var] = os.environ.get(var)
            os.environ[var] = str(value)
    if saved:
        reload_settings()
    try:
        yield
    finally:
        for var, old in saved.items():
            if old is None:
                os.environ.pop(var, None)
            else:
                os.environ[var] = old
        if saved:
            reload_settings()


def run(cfg: ExperimentConfig) -> int:
    """
    Execute one command, write its artifacts and echo the summary line.

    A failed tolerance check raises ToleranceCheckFailure after the
    artifacts are written.
    """
    log_operation(cfg.command, seed=cfg.seed, output_dir=str(cfg.output_dir))
    performance_tracker.reset()
    with settings_overrides(cfg):
        with track_performance(f"command:{cfg.command}"):
            result = HANDLERS[cfg.command](cfg)
        timing = performance_tracker.get_stats().get(f"command:{cfg.command}")
        if timing:
            log_performance(cfg.command, timing["max_ms"], seed=cfg.seed)
        store = ReportStore(cfg.output_dir)
        store.write_report(cfg.command, result.params, result.values, result.fits, cfg.resolved())
        for name, (header, rows) in result.tables.items():
            store.write_csv(name, header, rows)
        store.write_timings(get_monitoring_stats())
    print(result.summary)
    if not result.passed:
        raise ToleranceCheckFailure(
            f"{cfg.command} check failed: {result.summary}",
            context={"output_dir": str(cfg.output_dir)},
        )
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    initialize_sentry()

    if args.selftest:
        from circle_lab.cli.selftest import run_selftest

        return run_selftest()
    if args.command is None:
        parser.print_help(sys.stderr)
        return 2

    try:
        cfg = load_config(args)
    except ValidationError as e:
        print(f"circle-lab {args.command}: invalid config", file=sys.stderr)
        for error in e.errors():
            where = ".".join(str(part) for part in error["loc"]) or "config"
            print(f"  {where}: {error['msg']}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as e:
        print(f"circle-lab {args.command}: cannot read config: {e}", file=sys.stderr)
        return 2

    try:
        return run(cfg)
    except CircleLabError as e:
        log_error(e, {"command": cfg.command, **e.context})
        print(f"circle-lab {cfg.command}: {type(e).__name__}: {e.message}", file=sys.stderr)
        return e.exit_code
    except ValidationError as e:
        print(f"circle-lab {cfg.command}: {e}", file=sys.stderr)
        return 2
    except Exception as e:
        capture_exception(e, {"command": cfg.command})
        print(f"circle-lab {cfg.command}: internal error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
