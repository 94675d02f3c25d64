"""Reading and aggregating the experiment harness's CSV files.

The schema contract (column names, one row per sweep-point/seed/round,
17-significant-digit floats) is fixed by the experiment harness; this module
validates it strictly — a file with different columns is rejected, never
guessed at.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

CSV_HEADER = (
    "config_id", "system", "M", "N_i", "T", "epsilon", "K_i", "alpha",
    "batch_size", "round", "seed", "max_error", "mean_error",
    "lambda_min_pooled", "bound_value", "observed_error",
)

GROUP_COLUMNS = ("M", "N_i", "epsilon", "K_i")


class SchemaError(ValueError):
    """The CSV does not carry the harness schema."""


class EmptyDataError(ValueError):
    """No rows available for the requested figure."""


@dataclass(frozen=True)
class Row:
    """One CSV row, typed."""

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


def load_rows(path: str) -> list[Row]:
    """Read a harness CSV; reject any file whose header deviates."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = tuple(next(reader))
        except StopIteration:
            raise SchemaError(f"{path}: empty file, expected header row") from None
        if header != CSV_HEADER:
            missing = [c for c in CSV_HEADER if c not in header]
            raise SchemaError(
                f"{path}: unexpected header; missing columns: {missing or 'none'}, "
                f"got {list(header)}"
            )
        rows = []
        for lineno, record in enumerate(reader, start=2):
            if len(record) != len(CSV_HEADER):
                raise SchemaError(
                    f"{path}:{lineno}: expected {len(CSV_HEADER)} fields, "
                    f"got {len(record)}"
                )
            values = dict(zip(CSV_HEADER, record))
            try:
                rows.append(
                    Row(
                        config_id=values["config_id"],
                        system=values["system"],
                        M=int(values["M"]),
                        N_i=int(values["N_i"]),
                        T=int(values["T"]),
                        epsilon=float(values["epsilon"]),
                        K_i=int(values["K_i"]),
                        alpha=float(values["alpha"]),
                        batch_size=(
                            int(values["batch_size"]) if values["batch_size"] else None
                        ),
                        round=int(values["round"]),
                        seed=int(values["seed"]),
                        max_error=float(values["max_error"]),
                        mean_error=float(values["mean_error"]),
                        lambda_min_pooled=float(values["lambda_min_pooled"]),
                        bound_value=float(values["bound_value"]),
                        observed_error=float(values["observed_error"]),
                    )
                )
            except ValueError as exc:
                raise SchemaError(f"{path}:{lineno}: {exc}") from None
    return rows


def check_group(group: str) -> None:
    if group not in GROUP_COLUMNS:
        raise ValueError(
            f"group must be one of {', '.join(GROUP_COLUMNS)}, got {group!r}"
        )


def group_values(rows: Sequence[Row], group: str) -> list:
    """Distinct values of the grouping column, ascending."""
    check_group(group)
    return sorted({getattr(r, group) for r in rows})


@dataclass(frozen=True)
class Curve:
    """Seed-aggregated error against round for one group value."""

    value: float
    rounds: np.ndarray
    mean: np.ndarray
    std: np.ndarray


def error_curves(rows: Sequence[Row], group: str) -> list[Curve]:
    """One seed-averaged curve (with std band) per group value."""
    check_group(group)
    if not rows:
        raise EmptyDataError("no rows to plot")
    curves = []
    for value in group_values(rows, group):
        selected = [r for r in rows if getattr(r, group) == value]
        by_round: dict[int, list[float]] = {}
        for r in selected:
            by_round.setdefault(r.round, []).append(r.max_error)
        rounds = sorted(by_round)
        mean = np.array([float(np.mean(by_round[t])) for t in rounds])
        std = np.array([float(np.std(by_round[t])) for t in rounds])
        curves.append(Curve(value=value, rounds=np.array(rounds), mean=mean, std=std))
    return curves


@dataclass(frozen=True)
class FinalPoint:
    """Seed-aggregated final-round error at one group value."""

    value: float
    mean: float
    std: float
    n_seeds: int


def final_errors(rows: Sequence[Row], group: str) -> list[FinalPoint]:
    """Final-round error per group value, aggregated over seeds.

    Each seed contributes its last recorded round, so truncated runs still
    count at the round they reached.
    """
    check_group(group)
    if not rows:
        raise EmptyDataError("no rows to plot")
    points = []
    for value in group_values(rows, group):
        per_seed: dict[int, tuple[int, float]] = {}
        for r in rows:
            if getattr(r, group) != value:
                continue
            best = per_seed.get(r.seed)
            if best is None or r.round > best[0]:
                per_seed[r.seed] = (r.round, r.max_error)
        finals = [err for _, err in per_seed.values()]
        points.append(
            FinalPoint(
                value=value,
                mean=float(np.mean(finals)),
                std=float(np.std(finals)),
                n_seeds=len(finals),
            )
        )
    return points


@dataclass(frozen=True)
class PowerLawFit:
    """Least-squares fit of log(error) against log(group value)."""

    slope: float
    intercept: float
    r_squared: float


def fit_power_law(points: Sequence[FinalPoint]) -> PowerLawFit:
    """Fit the final errors to error = exp(intercept) * value^slope."""
    if len(points) < 2:
        raise EmptyDataError(
            f"need at least 2 group values for a power-law fit, got {len(points)}"
        )
    for p in points:
        if not (p.mean > 0 and math.isfinite(p.mean)) or not p.value > 0:
            raise ValueError(
                f"power-law fit needs positive values, got error {p.mean} "
                f"at group value {p.value}"
            )
    log_x = np.log([p.value for p in points])
    log_y = np.log([p.mean for p in points])
    slope, intercept = np.polyfit(log_x, log_y, 1)
    predicted = slope * log_x + intercept
    ss_res = float(np.sum((log_y - predicted) ** 2))
    ss_tot = float(np.sum((log_y - np.mean(log_y)) ** 2))
    r_squared = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return PowerLawFit(
        slope=float(slope), intercept=float(intercept), r_squared=r_squared
    )
