"""Command-line entry point.

Subcommands:

    fedsysid run <config>       execute the experiment, write its CSV
    fedsysid diagnose <config>  excitation/bound diagnostics only, no federation
    fedsysid scaling <csv>      fit the error-vs-client-count slope from a CSV
    fedsysid validate <config>  schema-check the config without running

Flags: --config PATH (alternative to the positional), --out PATH (override
the config's output_path), --seeds LIST (comma-separated, overrides the
config), --threads N (speed only; results are identical at any thread
count).  The FEDSYSID_LOG environment variable sets log verbosity (DEBUG,
INFO, WARNING, ERROR).

Exit status: 0 on success, 2 for configuration/usage problems, 1 for runtime
failures.  Every failure prints exactly one machine-parsable line to stderr:
``error: <Kind>: <message>``.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
from typing import Optional, Sequence

from .config import ExperimentConfig, load_config
from .diagnostics import estimate_bmsb, evaluate_bound, gram_check
from .errors import (
    ClientDiverged,
    ConfigError,
    DegenerateExcitation,
    InsufficientData,
    RankDeficientGram,
    SimulationDiverged,
)
from .estimation import lse_pooled_average
from .harness import (
    base_system,
    point_params,
    read_records,
    run_experiment,
    sqrtM_scaling,
)
from .systems import make_client_fleet, make_heterogeneity, merge_batches, simulate_fleet

log = logging.getLogger("fedsysid")

_CONFIG_EXIT = 2
_RUNTIME_EXIT = 1


class _SingleLineParser(argparse.ArgumentParser):
    """Argparse that reports usage errors on one machine-parsable line."""

    def error(self, message: str):  # noqa: D102 - argparse hook
        raise ConfigError(f"arguments: {message}")


def _build_parser() -> argparse.ArgumentParser:
    parser = _SingleLineParser(prog="fedsysid", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_command(name: str, help_text: str) -> argparse.ArgumentParser:
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("config_path", nargs="?", help="config file path")
        cmd.add_argument("--config", dest="config_flag", help="config file path")
        return cmd

    run_cmd = add_config_command("run", "execute an experiment and write its CSV")
    run_cmd.add_argument("--out", help="override the config's output_path")
    run_cmd.add_argument("--seeds", help="comma-separated seed list override")
    run_cmd.add_argument(
        "--threads", type=int, default=1, help="worker threads (speed only)"
    )

    diag_cmd = add_config_command("diagnose", "run diagnostics without federation")
    diag_cmd.add_argument("--seeds", help="comma-separated seed list override")

    scaling_cmd = sub.add_parser("scaling", help="fit error vs client count")
    scaling_cmd.add_argument("csv_path", help="harness CSV to analyze")

    add_config_command("validate", "check a config file and exit")
    return parser


def _resolve_config_path(args: argparse.Namespace) -> str:
    path = args.config_flag or args.config_path
    if not path:
        raise ConfigError("arguments: a config file is required (positional or --config)")
    if args.config_flag and args.config_path and args.config_flag != args.config_path:
        raise ConfigError("arguments: conflicting config paths given")
    return path


def _parse_seed_list(raw: str) -> tuple[int, ...]:
    try:
        seeds = tuple(int(tok.strip()) for tok in raw.split(",") if tok.strip())
    except ValueError:
        raise ConfigError(f"seeds: expected comma-separated integers, got {raw!r}") from None
    if not seeds:
        raise ConfigError("seeds: empty list")
    return seeds


def _load(args: argparse.Namespace) -> ExperimentConfig:
    cfg = load_config(_resolve_config_path(args))
    seeds_override = getattr(args, "seeds", None)
    if seeds_override:
        cfg = dataclasses.replace(cfg, seeds=_parse_seed_list(seeds_override))
    return cfg


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = _load(args)
    if args.threads < 1:
        raise ConfigError(f"threads: must be >= 1, got {args.threads}")
    records = run_experiment(cfg, threads=args.threads, out_path=args.out)
    destination = args.out if args.out is not None else cfg.output_path
    print(f"wrote {len(records)} records to {destination}")
    return 0


def _cmd_diagnose(args: argparse.Namespace) -> int:
    cfg = _load(args)
    sweep_name, values = cfg.sweep()
    for value in values:
        for seed in cfg.seeds:
            params = point_params(cfg, sweep_name, value)
            base = base_system(cfg.system, seed)
            het = make_heterogeneity(base, float(params["epsilon"]), seed)
            fleet = make_client_fleet(base, het, int(params["M"]), seed)
            batches = simulate_fleet(
                fleet, int(params["N_i"]), cfg.resolved_T, seed
            )
            truths = [client.true_theta for client in fleet]
            prefix = f"{sweep_name}={value} seed={seed}"
            try:
                bmsb = estimate_bmsb(merge_batches(batches), seed=seed)
                gram = gram_check(batches, bmsb.s_phi, bmsb.p_phi, cfg.delta)
                pooled = lse_pooled_average(batches)
                report = evaluate_bound(
                    batches, pooled, truths, base.target_noise_std,
                    bmsb, cfg.delta, float(params["epsilon"]),
                )
            except (RankDeficientGram, DegenerateExcitation) as exc:
                print(f"{prefix} degenerate: {exc}")
                continue
            worst_client = min(c.lambda_min for c in gram.clients)
            print(
                f"{prefix} s_phi={bmsb.s_phi:.6g} p_phi={bmsb.p_phi:.6g} "
                f"lambda_min_client={worst_client:.6g} "
                f"lambda_min_pooled={gram.pooled_lambda_min:.6g} "
                f"pooled_threshold={gram.pooled_threshold:.6g} "
                f"gram_ok={gram.pooled_passes} "
                f"sample_size_ok={gram.sample_size_ok} "
                f"bound_value={report.bound_value:.6g} "
                f"observed_error={report.observed_error:.6g}"
            )
    return 0


def _cmd_scaling(args: argparse.Namespace) -> int:
    records = read_records(args.csv_path)
    report = sqrtM_scaling(records)
    print(f"slope={report.slope:.6g} r_squared={report.r_squared:.6g}")
    for point in report.points:
        print(
            f"M={point.M} inv_sqrt_M={point.inv_sqrt_M:.6g} "
            f"mean_final_error={point.mean_final_error:.6g}"
        )
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    cfg = _load(args)
    sweep_name, values = cfg.sweep()
    print(
        f"ok: system={cfg.system} sweep={sweep_name}={list(values)} "
        f"seeds={len(cfg.seeds)} rounds={cfg.resolved_rounds} id={cfg.config_id()}"
    )
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "diagnose": _cmd_diagnose,
    "scaling": _cmd_scaling,
    "validate": _cmd_validate,
}


def _configure_logging() -> None:
    level_name = os.environ.get("FEDSYSID_LOG", "WARNING").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(stream=sys.stderr, level=level, format="%(levelname)s %(message)s")


def _fail(exc: BaseException, code: int) -> int:
    message = " ".join(str(exc).split())
    print(f"error: {type(exc).__name__}: {message}", file=sys.stderr)
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    _configure_logging()
    try:
        args = _build_parser().parse_args(argv)
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        return _fail(exc, _CONFIG_EXIT)
    except (FileNotFoundError, OSError) as exc:
        return _fail(exc, _CONFIG_EXIT)
    except (
        SimulationDiverged,
        ClientDiverged,
        RankDeficientGram,
        DegenerateExcitation,
        InsufficientData,
    ) as exc:
        return _fail(exc, _RUNTIME_EXIT)
    except ValueError as exc:
        return _fail(exc, _RUNTIME_EXIT)


if __name__ == "__main__":
    sys.exit(main())
