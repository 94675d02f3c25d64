"""Federated estimation: broadcast, local gradient steps, server averaging.

One communication round broadcasts the global parameter matrix to every
client, lets client i run K_i local gradient steps on its private
least-squares objective, and averages the returned matrices.  Full-batch
steps use the raw sum-form update

    theta <- theta + alpha * (targets - theta.features) . features^T,

while mini-batch steps apply the same rule to a freshly sampled column subset
and rescale by the batch size (a per-column average gradient).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import AggregationError, ClientDiverged, ConfigError
from .estimation import ErrorRecord, estimation_error
from .rng import SEED_FED, SeedLike, as_key, substream
from .systems import TrajectoryBatch


@dataclass(eq=False)
class ClientState:
    """One client's private data and local optimizer settings."""

    client_id: int
    data: TrajectoryBatch
    local_theta: np.ndarray
    local_updates_K: int
    learning_rate: float
    batch_size: Optional[int] = None

    def __post_init__(self) -> None:
        self.local_theta = np.asarray(self.local_theta, dtype=float)
        if self.local_theta.shape != (self.data.target_dim, self.data.n_phi):
            raise ConfigError(
                f"client {self.client_id}: theta shape {self.local_theta.shape} does "
                f"not match data ({self.data.target_dim}, {self.data.n_phi})"
            )
        if self.local_updates_K < 1:
            raise ConfigError(f"client {self.client_id}: need K >= 1")
        if self.learning_rate <= 0:
            raise ConfigError(f"client {self.client_id}: learning rate must be > 0")
        if self.batch_size is not None and not (
            1 <= self.batch_size <= self.data.n_samples
        ):
            raise ConfigError(
                f"client {self.client_id}: batch_size {self.batch_size} outside "
                f"[1, {self.data.n_samples}]"
            )


@dataclass(eq=False)
class FederationState:
    """Protocol state after some number of completed rounds."""

    round: int
    global_theta: np.ndarray
    clients: list[ClientState]
    history: list[ErrorRecord] = field(default_factory=list)


def client_update(
    client: ClientState, global_theta: np.ndarray, seed: SeedLike
) -> np.ndarray:
    """Run one client's K local gradient steps from the broadcast model.

    The broadcast matrix is copied, never mutated.  Mini-batch columns are
    sampled uniformly without replacement, reshuffled on every local step,
    from the substream owned by ``seed`` — so results are independent of
    scheduling.  Overflowing parameter entries raise ClientDiverged, which
    signals a too-large learning rate rather than a recoverable condition.
    """
    theta = np.array(global_theta, dtype=float)
    features = client.data.features
    targets = client.data.targets
    if theta.shape != (targets.shape[0], features.shape[0]):
        raise ConfigError(
            f"broadcast theta shape {theta.shape} does not match client data "
            f"({targets.shape[0]}, {features.shape[0]})"
        )
    n = client.data.n_samples
    alpha = client.learning_rate
    use_minibatch = client.batch_size is not None and client.batch_size < n
    rng = substream(*as_key(seed)) if use_minibatch else None
    for step in range(1, client.local_updates_K + 1):
        if use_minibatch:
            idx = rng.choice(n, size=client.batch_size, replace=False)
            f_step = features[:, idx]
            t_step = targets[:, idx]
            scale = alpha / client.batch_size
        else:
            f_step = features
            t_step = targets
            scale = alpha
        # Overflow here is not an error condition: the isfinite check below
        # converts it into a ClientDiverged with the offending step.
        with np.errstate(over="ignore", invalid="ignore"):
            theta = theta + scale * (t_step - theta @ f_step) @ f_step.T
        if not np.all(np.isfinite(theta)):
            raise ClientDiverged(client.client_id, step)
    return theta


def aggregate(locals_: Sequence[np.ndarray]) -> np.ndarray:
    """Entry-wise arithmetic mean of the clients' local parameter matrices.

    Each entry is summed with exact compensated summation, so the result is
    bit-identical under any permutation of the input list.
    """
    if len(locals_) == 0:
        raise AggregationError("cannot aggregate an empty update list")
    mats = [np.asarray(m, dtype=float) for m in locals_]
    shape = mats[0].shape
    if any(m.shape != shape for m in mats):
        raise AggregationError(
            f"shape mismatch in aggregation: {[m.shape for m in mats]}"
        )
    stacked = np.stack(mats)
    out = np.empty(shape)
    for i in range(shape[0]):
        for j in range(shape[1]):
            out[i, j] = math.fsum(stacked[:, i, j]) / len(mats)
    return out


def run_federation(
    fleet_data: list[ClientState],
    theta0: np.ndarray,
    rounds: int,
    true_thetas: Sequence[np.ndarray],
    seed: SeedLike,
    norm: str = "spectral",
) -> FederationState:
    """Execute the full protocol for the given number of rounds.

    Every round: broadcast the global matrix, run each client's local steps,
    aggregate in ascending client-id order, then record the per-client
    normalized errors of the new global matrix against the true parameters.
    Client divergence is re-raised with the offending round attached.
    """
    if rounds < 1:
        raise ConfigError(f"need rounds >= 1, got {rounds}")
    if len(true_thetas) != len(fleet_data):
        raise ConfigError(
            f"{len(true_thetas)} true matrices for {len(fleet_data)} clients"
        )
    clients = sorted(fleet_data, key=lambda c: c.client_id)
    if len({c.client_id for c in clients}) != len(clients):
        raise ConfigError("client ids must be unique")
    order = np.argsort([c.client_id for c in fleet_data])
    truths = [np.asarray(true_thetas[i], dtype=float) for i in order]
    key = as_key(seed)
    global_theta = np.array(theta0, dtype=float)
    history: list[ErrorRecord] = []
    for r in range(rounds):
        updates = []
        for client in clients:
            try:
                updated = client_update(
                    client, global_theta, (*key, SEED_FED, r, client.client_id)
                )
            except ClientDiverged as exc:
                raise ClientDiverged(exc.client_id, exc.step, round_index=r) from None
            client.local_theta = updated
            updates.append(updated)
        global_theta = aggregate(updates)
        errors = tuple(
            estimation_error(global_theta, truth, norm) for truth in truths
        )
        history.append(ErrorRecord(round=r + 1, per_client=errors))
    return FederationState(
        round=rounds, global_theta=global_theta, clients=clients, history=history
    )
