"""Closed-form least squares and normalized estimation error.

The pooled estimator solves each client's normal equations separately and
averages the results; it is the quantity the finite-sample bound in
``diagnostics`` controls, and the long-run target of the federated protocol
in the homogeneous single-client case.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import AggregationError, MetricUndefined, RankDeficientGram
from .systems import TrajectoryBatch

#: Relative eigenvalue floor below which a Gram matrix counts as singular.
_RANK_RTOL = 1e-12


@dataclass(frozen=True)
class ErrorRecord:
    """Normalized estimation errors for one communication round."""

    round: int
    per_client: tuple[float, ...]
    max_error: float = field(init=False)

    def __post_init__(self) -> None:
        if not self.per_client:
            raise AggregationError("error record needs at least one client entry")
        if any(e < 0 or not np.isfinite(e) for e in self.per_client):
            raise AggregationError(f"errors must be finite and >= 0: {self.per_client}")
        object.__setattr__(self, "max_error", max(self.per_client))

    @property
    def mean_error(self) -> float:
        return float(np.mean(self.per_client))


def gram_matrix(batch: TrajectoryBatch) -> np.ndarray:
    """The n_phi x n_phi regressor Gram matrix Phi Phi^T."""
    return batch.features @ batch.features.T


def lse_client(batch: TrajectoryBatch, ridge: float = 0.0) -> np.ndarray:
    """Least-squares estimate argmin_theta ||targets - theta.features||_F^2.

    Solves the normal equations through a factorization-based solve.  With
    ridge = 0 (the default) a numerically singular Gram matrix raises
    RankDeficientGram instead of returning garbage; a positive ridge is the
    explicit escape hatch for deliberately degenerate data.
    """
    if ridge < 0:
        raise ValueError(f"ridge must be non-negative, got {ridge}")
    gram = gram_matrix(batch)
    eigs = np.linalg.eigvalsh(gram)
    lambda_min = float(eigs[0])
    lambda_max = float(eigs[-1])
    if ridge == 0.0 and lambda_min <= _RANK_RTOL * max(1.0, lambda_max):
        raise RankDeficientGram(lambda_min)
    if ridge > 0.0:
        gram = gram + ridge * np.eye(gram.shape[0])
    # theta solves theta . G = targets . features^T; transpose to use the
    # symmetric solve G x = b.
    rhs = batch.features @ batch.targets.T
    return np.linalg.solve(gram, rhs).T


def lse_pooled_average(batches: Sequence[TrajectoryBatch], ridge: float = 0.0) -> np.ndarray:
    """Mean of per-client least-squares estimates.

    Each client is solved independently (no data pooling), then the estimates
    are averaged entry-wise.  Rank deficiency in any client is re-raised with
    that client's index attached.
    """
    if not batches:
        raise AggregationError("need at least one client batch")
    shapes = {(b.target_dim, b.n_phi) for b in batches}
    if len(shapes) != 1:
        raise AggregationError(f"client batches disagree on shape: {sorted(shapes)}")
    total = None
    for i, batch in enumerate(batches):
        try:
            theta_i = lse_client(batch, ridge)
        except RankDeficientGram as exc:
            raise RankDeficientGram(exc.lambda_min, client=i) from None
        total = theta_i if total is None else total + theta_i
    return total / len(batches)


def estimation_error(
    theta_hat: np.ndarray, theta_true: np.ndarray, norm: str = "spectral"
) -> float:
    """Normalized parameter error ||theta_hat - theta_true|| / ||theta_true||.

    The default norm is spectral (largest singular value), with Frobenius as
    a configurable alternative; both are scale-free in the same way, so the
    choice shifts absolute values but not scaling behavior.
    """
    theta_hat = np.asarray(theta_hat, dtype=float)
    theta_true = np.asarray(theta_true, dtype=float)
    if theta_hat.shape != theta_true.shape:
        raise ValueError(
            f"shape mismatch: {theta_hat.shape} vs {theta_true.shape}"
        )
    if norm == "spectral":
        ord_: object = 2
    elif norm == "frobenius":
        ord_ = "fro"
    else:
        raise ValueError(f"unknown norm {norm!r} (expected 'spectral' or 'frobenius')")
    denom = float(np.linalg.norm(theta_true, ord_))
    if denom == 0.0:
        raise MetricUndefined("true parameter matrix has zero norm")
    return float(np.linalg.norm(theta_hat - theta_true, ord_)) / denom
