"""Experiment driver: sweeps, seeding, CSV persistence, scaling fits.

One experiment = one config = one sweep over a single variable x a list of
master seeds.  Every run (sweep point, seed) derives all of its randomness
from substreams of that seed keyed by structural indices, never by the swept
value, so sweep points share common random numbers and their curves are
directly comparable.

The CSV schema is fixed:

    config_id,system,M,N_i,T,epsilon,K_i,alpha,batch_size,round,seed,
    max_error,mean_error,lambda_min_pooled,bound_value,observed_error

with one row per (sweep point, seed, round), sorted by (config_id,
swept value, seed, round).  Floats are rendered with 17 significant digits so
the file round-trips bit-exactly; diagnostics that failed on degenerate data
are recorded as nan, keeping such runs visible.
"""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .config import ExperimentConfig
from .diagnostics import estimate_bmsb, evaluate_bound, gram_check
from .errors import (
    ConfigError,
    DegenerateExcitation,
    InsufficientData,
    RankDeficientGram,
)
from .estimation import lse_pooled_average
from .federation import ClientState, run_federation
from .systems import (
    SystemModel,
    make_client_fleet,
    make_heterogeneity,
    make_pendulum_system,
    make_quadrotor_system,
    make_synthetic_system,
    merge_batches,
    simulate_fleet,
)

log = logging.getLogger("fedsysid")

CSV_HEADER = (
    "config_id", "system", "M", "N_i", "T", "epsilon", "K_i", "alpha",
    "batch_size", "round", "seed", "max_error", "mean_error",
    "lambda_min_pooled", "bound_value", "observed_error",
)


@dataclass(frozen=True)
class ExperimentRecord:
    """One CSV row: a round of one run, with the run's diagnostics attached."""

    config_id: str
    system: str
    M: int
    N_i: int
    T: int
    epsilon: float
    K_i: int
    alpha: float
    batch_size: Optional[int]
    round: int
    seed: int
    max_error: float
    mean_error: float
    lambda_min_pooled: float
    bound_value: float
    observed_error: float
    swept_value: float = float("nan")


@dataclass(frozen=True)
class ScalingPoint:
    """Seed-averaged final error at one client count."""

    M: int
    mean_final_error: float
    inv_sqrt_M: float


@dataclass(frozen=True)
class ScalingReport:
    """Log-log fit of final error against client count."""

    slope: float
    intercept: float
    r_squared: float
    points: tuple[ScalingPoint, ...]


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def base_system(name: str, seed: int) -> SystemModel:
    if name == "synthetic":
        return make_synthetic_system(seed=seed)
    if name == "pendulum":
        return make_pendulum_system()
    if name == "quadrotor":
        return make_quadrotor_system()
    raise ConfigError(f"unknown system {name!r}")


@dataclass(frozen=True)
class RunDiagnostics:
    """Diagnostics of one (sweep point, seed) run; nan fields mean degenerate."""

    lambda_min_pooled: float
    bound_value: float
    observed_error: float


def point_params(cfg: ExperimentConfig, sweep_name: str, value) -> dict:
    params = {
        "M": cfg.M if not isinstance(cfg.M, tuple) else None,
        "N_i": cfg.N_i if not isinstance(cfg.N_i, tuple) else None,
        "epsilon": cfg.epsilon if not isinstance(cfg.epsilon, tuple) else None,
        "K_i": cfg.K_i if not isinstance(cfg.K_i, tuple) else None,
    }
    params[sweep_name] = value
    return params


def run_point(
    cfg: ExperimentConfig, sweep_name: str, value, seed: int
) -> list[ExperimentRecord]:
    """Execute one (sweep point, seed) run and emit its per-round records."""
    params = point_params(cfg, sweep_name, value)
    m = int(params["M"])
    n_i = int(params["N_i"])
    eps = float(params["epsilon"])
    k_i = int(params["K_i"])
    t = cfg.resolved_T
    rounds = cfg.resolved_rounds

    base = base_system(cfg.system, seed)
    het = make_heterogeneity(base, eps, seed)
    fleet = make_client_fleet(base, het, m, seed)
    truths = [client.true_theta for client in fleet]
    batches = simulate_fleet(fleet, n_i, t, seed)
    theta0 = np.zeros_like(base.true_theta)
    clients = [
        ClientState(
            client_id=i,
            data=batches[i],
            local_theta=theta0,
            local_updates_K=k_i,
            learning_rate=cfg.alpha,
            batch_size=cfg.batch_size,
        )
        for i in range(m)
    ]
    state = run_federation(clients, theta0, rounds, truths, seed, cfg.norm)
    diag = _run_diagnostics(cfg, base, batches, truths, eps, seed)

    config_id = cfg.config_id()
    records = []
    for record in state.history:
        records.append(
            ExperimentRecord(
                config_id=config_id,
                system=cfg.system,
                M=m,
                N_i=n_i,
                T=t,
                epsilon=eps,
                K_i=k_i,
                alpha=cfg.alpha,
                batch_size=cfg.batch_size,
                round=record.round,
                seed=seed,
                max_error=record.max_error,
                mean_error=record.mean_error,
                lambda_min_pooled=diag.lambda_min_pooled,
                bound_value=diag.bound_value,
                observed_error=diag.observed_error,
                swept_value=float(value),
            )
        )
    return records


def _run_diagnostics(
    cfg: ExperimentConfig,
    base: SystemModel,
    batches,
    truths,
    eps: float,
    seed: int,
) -> RunDiagnostics:
    try:
        merged = merge_batches(batches)
        bmsb = estimate_bmsb(merged, seed=seed)
        gram = gram_check(batches, bmsb.s_phi, bmsb.p_phi, cfg.delta)
        pooled = lse_pooled_average(batches)
        report = evaluate_bound(
            batches, pooled, truths, base.target_noise_std, bmsb, cfg.delta, eps
        )
    except (RankDeficientGram, DegenerateExcitation) as exc:
        log.warning("diagnostics degenerate (seed %d): %s", seed, exc)
        nan = float("nan")
        return RunDiagnostics(nan, nan, nan)
    return RunDiagnostics(
        lambda_min_pooled=gram.pooled_lambda_min,
        bound_value=report.bound_value,
        observed_error=report.observed_error,
    )


def run_experiment(
    cfg: ExperimentConfig,
    threads: int = 1,
    out_path: Optional[str] = None,
) -> list[ExperimentRecord]:
    """Run the full sweep x seeds grid, write the CSV, return the records.

    Thread count affects speed only: runs are independent and records are
    sorted into canonical order before writing.  If a run fails, the records
    of every completed run are still flushed before the error propagates.
    """
    sweep_name, values = cfg.sweep()
    destination = out_path if out_path is not None else cfg.output_path
    work = [(value, seed) for value in values for seed in cfg.seeds]
    log.info(
        "experiment %s: sweeping %s over %s, %d seeds, %d runs",
        cfg.config_id(), sweep_name, values, len(cfg.seeds), len(work),
    )
    results: list[ExperimentRecord] = []
    failure: Optional[BaseException] = None
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [
                pool.submit(run_point, cfg, sweep_name, value, seed)
                for value, seed in work
            ]
            for future in futures:
                try:
                    results.extend(future.result())
                except Exception as exc:  # noqa: BLE001 - reported after flush
                    if failure is None:
                        failure = exc
    else:
        for value, seed in work:
            try:
                results.extend(run_point(cfg, sweep_name, value, seed))
            except Exception as exc:  # noqa: BLE001 - reported after flush
                failure = exc
                break
    results.sort(key=lambda r: (r.config_id, r.swept_value, r.seed, r.round))
    write_records(results, destination)
    if failure is not None:
        raise failure
    return results


def write_records(records: Sequence[ExperimentRecord], path: str) -> None:
    """Write records as CSV with bit-stable float formatting."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in records:
            writer.writerow(
                (
                    r.config_id,
                    r.system,
                    str(r.M),
                    str(r.N_i),
                    str(r.T),
                    _fmt(r.epsilon),
                    str(r.K_i),
                    _fmt(r.alpha),
                    "" if r.batch_size is None else str(r.batch_size),
                    str(r.round),
                    str(r.seed),
                    _fmt(r.max_error),
                    _fmt(r.mean_error),
                    _fmt(r.lambda_min_pooled),
                    _fmt(r.bound_value),
                    _fmt(r.observed_error),
                )
            )


def read_records(path: str) -> list[ExperimentRecord]:
    """Read a harness CSV back into records."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != CSV_HEADER:
            raise ConfigError(
                f"{path}: unexpected CSV header {reader.fieldnames}"
            )
        records = []
        for row in reader:
            records.append(
                ExperimentRecord(
                    config_id=row["config_id"],
                    system=row["system"],
                    M=int(row["M"]),
                    N_i=int(row["N_i"]),
                    T=int(row["T"]),
                    epsilon=float(row["epsilon"]),
                    K_i=int(row["K_i"]),
                    alpha=float(row["alpha"]),
                    batch_size=int(row["batch_size"]) if row["batch_size"] else None,
                    round=int(row["round"]),
                    seed=int(row["seed"]),
                    max_error=float(row["max_error"]),
                    mean_error=float(row["mean_error"]),
                    lambda_min_pooled=float(row["lambda_min_pooled"]),
                    bound_value=float(row["bound_value"]),
                    observed_error=float(row["observed_error"]),
                )
            )
    return records


def sqrtM_scaling(records: Sequence[ExperimentRecord]) -> ScalingReport:
    """Fit log(final seed-averaged error) against log(M) over an M-sweep.

    The fitted slope is the empirical rate exponent: errors decaying like
    1/sqrt(M) give slope -0.5, while a heterogeneity-dominated floor gives
    slope near 0.  The report also tabulates error against 1/sqrt(M).
    """
    if not records:
        raise InsufficientData("no records given")
    final_errors: dict[int, dict[int, tuple[int, float]]] = {}
    for r in records:
        per_seed = final_errors.setdefault(r.M, {})
        best = per_seed.get(r.seed)
        if best is None or r.round > best[0]:
            per_seed[r.seed] = (r.round, r.max_error)
    if len(final_errors) < 3:
        raise InsufficientData(
            f"need at least 3 distinct M values, got {sorted(final_errors)}"
        )
    points = []
    for m_value in sorted(final_errors):
        mean_err = float(
            np.mean([err for _, err in final_errors[m_value].values()])
        )
        if not (mean_err > 0) or not math.isfinite(mean_err):
            raise InsufficientData(
                f"mean final error at M={m_value} is {mean_err}; cannot fit logs"
            )
        points.append(
            ScalingPoint(
                M=m_value,
                mean_final_error=mean_err,
                inv_sqrt_M=1.0 / math.sqrt(m_value),
            )
        )
    log_m = np.log([p.M for p in points])
    log_e = np.log([p.mean_final_error for p in points])
    slope, intercept = np.polyfit(log_m, log_e, 1)
    predicted = slope * log_m + intercept
    ss_res = float(np.sum((log_e - predicted) ** 2))
    ss_tot = float(np.sum((log_e - np.mean(log_e)) ** 2))
    r_squared = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return ScalingReport(
        slope=float(slope),
        intercept=float(intercept),
        r_squared=r_squared,
        points=tuple(points),
    )
