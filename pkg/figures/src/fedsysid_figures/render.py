"""Figure construction from aggregated CSV data.

Three figure kinds:

* ``error_vs_round`` — one seed-averaged error curve per group value with a
  shaded +-1 standard-deviation band; log-scaled y by default.
* ``error_vs_sqrtM`` — final seed-averaged error against the group value on
  log-log axes, with the fitted power law overlaid and its slope annotated
  (slope -0.5 is the 1/sqrt(M) reference rate).
* ``error_vs_local_updates`` — final seed-averaged error against the group
  value (meant for K_i) on a linear x-axis with +-1 std error bars.

Rendering is read-only over the rows, and deterministic: the same rows and
options produce an identical figure (a fixed SVG hash salt and stripped
date metadata keep even the bytes stable).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .csvdata import (
    EmptyDataError,
    Row,
    error_curves,
    final_errors,
    fit_power_law,
)

matplotlib.rcParams["svg.hashsalt"] = "fedsysid-figures"

KINDS = ("error_vs_round", "error_vs_sqrtM", "error_vs_local_updates")

_ERROR_LABEL = "estimation error (relative norm, max over clients)"

_GROUP_LABELS = {
    "M": "clients M (count)",
    "N_i": "trajectories per client N_i (count)",
    "epsilon": "heterogeneity bound epsilon (dimensionless)",
    "K_i": "local updates per round K_i (count)",
}


@dataclass(frozen=True)
class RenderResult:
    """A built figure plus the facts a caller can check programmatically."""

    figure: "plt.Figure"
    kind: str
    group: str
    curve_labels: tuple[str, ...]
    slope: Optional[float]
    n_rows: int


def _label(group: str, value) -> str:
    return f"{group}={value:g}"


def _new_axes():
    figure, axes = plt.subplots(figsize=(7.0, 4.5), layout="constrained")
    return figure, axes


def render_error_vs_round(
    rows: Sequence[Row], group: str, linear_y: bool = False
) -> RenderResult:
    curves = error_curves(rows, group)
    figure, axes = _new_axes()
    labels = []
    for curve in curves:
        label = _label(group, curve.value)
        labels.append(label)
        axes.plot(curve.rounds, curve.mean, label=label, linewidth=1.5)
        axes.fill_between(
            curve.rounds, curve.mean - curve.std, curve.mean + curve.std, alpha=0.2
        )
    if not linear_y:
        axes.set_yscale("log")
    axes.set_xlabel("communication round (count)")
    axes.set_ylabel(_ERROR_LABEL)
    axes.set_title(f"error per round, grouped by {group}")
    axes.legend()
    return RenderResult(
        figure=figure,
        kind="error_vs_round",
        group=group,
        curve_labels=tuple(labels),
        slope=None,
        n_rows=len(rows),
    )


def render_error_vs_sqrtM(
    rows: Sequence[Row], group: str = "M", linear_y: bool = False
) -> RenderResult:
    points = final_errors(rows, group)
    fit = fit_power_law(points)
    figure, axes = _new_axes()
    xs = np.array([p.value for p in points], dtype=float)
    means = np.array([p.mean for p in points])
    stds = np.array([p.std for p in points])
    label = "final error (seed mean +- 1 std)"
    axes.errorbar(
        xs, means, yerr=stds, fmt="o", capsize=3.0, label=label
    )
    grid = np.geomspace(xs.min(), xs.max(), 64)
    axes.plot(
        grid,
        np.exp(fit.intercept) * grid**fit.slope,
        linestyle="--",
        label=f"fitted slope = {fit.slope:.3f}",
    )
    axes.set_xscale("log")
    if not linear_y:
        axes.set_yscale("log")
    axes.annotate(
        f"fitted slope = {fit.slope:.3f} (1/sqrt reference: -0.5)",
        xy=(0.03, 0.05),
        xycoords="axes fraction",
    )
    axes.set_xlabel(_GROUP_LABELS[group])
    axes.set_ylabel(_ERROR_LABEL)
    axes.set_title(f"final error against {group} with power-law fit")
    axes.legend()
    return RenderResult(
        figure=figure,
        kind="error_vs_sqrtM",
        group=group,
        curve_labels=(label,),
        slope=fit.slope,
        n_rows=len(rows),
    )


def render_error_vs_local_updates(
    rows: Sequence[Row], group: str = "K_i", linear_y: bool = False
) -> RenderResult:
    points = final_errors(rows, group)
    figure, axes = _new_axes()
    xs = np.array([p.value for p in points], dtype=float)
    means = np.array([p.mean for p in points])
    stds = np.array([p.std for p in points])
    label = "final error (seed mean +- 1 std)"
    axes.errorbar(xs, means, yerr=stds, marker="o", capsize=3.0, label=label)
    if not linear_y:
        axes.set_yscale("log")
    axes.set_xlabel(_GROUP_LABELS[group])
    axes.set_ylabel(_ERROR_LABEL)
    axes.set_title(f"final error against {group} at a fixed round budget")
    axes.legend()
    return RenderResult(
        figure=figure,
        kind="error_vs_local_updates",
        group=group,
        curve_labels=(label,),
        slope=None,
        n_rows=len(rows),
    )


_RENDERERS = {
    "error_vs_round": render_error_vs_round,
    "error_vs_sqrtM": render_error_vs_sqrtM,
    "error_vs_local_updates": render_error_vs_local_updates,
}


def render(
    kind: str, rows: Sequence[Row], group: str, linear_y: bool = False
) -> RenderResult:
    """Build the requested figure kind from CSV rows."""
    if kind not in _RENDERERS:
        raise ValueError(f"kind must be one of {', '.join(KINDS)}, got {kind!r}")
    if not rows:
        raise EmptyDataError("no rows to plot")
    return _RENDERERS[kind](rows, group, linear_y=linear_y)


def save(result: RenderResult, out_path: str) -> None:
    """Write the figure; SVG/PDF outputs carry no timestamps, so identical
    input produces identical bytes."""
    lower = out_path.lower()
    if lower.endswith(".svg"):
        result.figure.savefig(out_path, format="svg", metadata={"Date": None})
    elif lower.endswith(".pdf"):
        result.figure.savefig(out_path, format="pdf", metadata={"CreationDate": None})
    else:
        result.figure.savefig(out_path, dpi=150)
    plt.close(result.figure)
