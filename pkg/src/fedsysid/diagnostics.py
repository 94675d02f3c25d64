"""Empirical checks of the excitation and finite-sample theory.

Four instruments:

* ``estimate_bmsb`` — a direction-sampling proxy for the small-ball
  excitation condition: in every probed unit direction v, the regressors
  should satisfy |v.phi| >= s_phi with frequency >= p_phi.  The true
  condition is conditional on the past filtration; the proxy probes the
  unconditional distribution, which is exactly the "energy in every
  direction" content being validated, not a proof check.
* ``gram_check`` — per-client and pooled minimum-eigenvalue lower bounds
  (1/2) s_phi^2 N_i T, plus the sample-size precondition
  N_i T >= (4/p_phi) (n_phi log 9 + log(M/delta)).
* ``noise_crossterm_check`` — spectral norm of the noise/regressor product
  against 4 sigma_w sqrt(N_i T (n_x + n_phi + log(2M/delta))).
* ``evaluate_bound`` — the end-to-end error bound
  C1 sqrt((n_x + n_phi + log(2M/delta)) / (T sum_i N_i)) + C2 epsilon with
  C1 = 8 sigma_w / s_phi^2 and C2 = b_phi / s_phi^2 + 1/2, compared against
  the realized pooled-estimator error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, DegenerateExcitation
from .rng import SEED_DIRECTIONS, SeedLike, as_key, substream
from .systems import TrajectoryBatch


@dataclass(frozen=True)
class BmsbEstimate:
    """Empirical small-ball parameters of a regressor batch."""

    s_phi: float
    p_phi: float
    n_directions: int
    n_samples: int

    def __post_init__(self) -> None:
        if not (self.s_phi > 0):
            raise DegenerateExcitation(
                f"small-ball radius must be positive, got {self.s_phi}"
            )
        if not (0 < self.p_phi <= 1):
            raise DegenerateExcitation(
                f"small-ball probability must lie in (0, 1], got {self.p_phi}"
            )


@dataclass(frozen=True)
class GramClientReport:
    """Excitation report for one client's Gram matrix."""

    lambda_min: float
    threshold: float
    passes: bool
    n_samples: int


@dataclass(frozen=True)
class GramReport:
    """Per-client and pooled Gram lower-bound checks."""

    clients: tuple[GramClientReport, ...]
    pooled_lambda_min: float
    pooled_threshold: float
    pooled_passes: bool
    required_samples: float
    sample_size_ok: bool


@dataclass(frozen=True)
class CrosstermReport:
    """Noise/regressor cross-term norm against its theoretical ceiling.

    ``bound_value`` uses the dimension-count form (n_x + n_phi); the
    ``bound_value_bphi`` variant substitutes the empirical max column energy
    b_phi for n_x + n_phi, for feature maps whose columns carry more energy
    than their dimension count suggests.
    """

    observed_norm: float
    bound_value: float
    bound_value_bphi: float
    passes: bool
    passes_bphi: bool


@dataclass(frozen=True)
class BoundReport:
    """Finite-sample bound evaluation for a pooled estimate."""

    C1: float
    C2: float
    b_phi: float
    delta: float
    bound_value: float
    observed_error: float
    sigma_w: float
    epsilon: float


def exceedance_fraction(
    batch: TrajectoryBatch, direction: np.ndarray, threshold: float
) -> float:
    """Fraction of columns with |direction . phi| >= threshold."""
    direction = np.asarray(direction, dtype=float)
    norm = np.linalg.norm(direction)
    if norm == 0:
        raise ConfigError("probe direction must be nonzero")
    projections = np.abs((direction / norm) @ batch.features)
    return float(np.mean(projections >= threshold))


def estimate_bmsb(
    batch: TrajectoryBatch,
    n_directions: int = 256,
    quantile: float = 0.25,
    seed: SeedLike = 0,
    directions: Optional[np.ndarray] = None,
) -> BmsbEstimate:
    """Estimate small-ball parameters by probing random unit directions.

    For each unit direction v, take the ``quantile`` point of the empirical
    |v.phi| distribution over columns; s_phi is that value minimized over
    directions, and p_phi is the worst-direction frequency of |v.phi| >=
    s_phi (at least 1 - quantile by construction).  An explicitly supplied
    ``directions`` matrix (rows are probes, normalized here) replaces the
    seeded draw — useful for probing known weak directions.

    Raises DegenerateExcitation when some probed direction carries no energy
    at the requested quantile (s_phi = 0), including the all-zero batch.
    """
    if batch.n_samples < 2:
        raise ConfigError("need at least 2 regressor columns")
    if not (0 < quantile < 1):
        raise ConfigError(f"quantile must be in (0, 1), got {quantile}")
    if directions is None:
        if n_directions < 1:
            raise ConfigError(f"need n_directions >= 1, got {n_directions}")
        rng = substream(*as_key(seed), SEED_DIRECTIONS)
        directions = rng.standard_normal((n_directions, batch.n_phi))
    else:
        directions = np.asarray(directions, dtype=float)
        if directions.ndim != 2 or directions.shape[1] != batch.n_phi:
            raise ConfigError(
                f"directions must be (k, {batch.n_phi}), got {directions.shape}"
            )
    norms = np.linalg.norm(directions, axis=1, keepdims=True)
    if np.any(norms == 0):
        raise ConfigError("probe directions must be nonzero")
    unit = directions / norms
    projections = np.abs(unit @ batch.features)  # (n_directions, n_samples)
    per_direction = np.quantile(projections, quantile, axis=1)
    s_phi = float(np.min(per_direction))
    if s_phi <= 0:
        raise DegenerateExcitation(
            "a probed direction has no regressor energy at the requested quantile"
        )
    p_phi = float(np.min(np.mean(projections >= s_phi, axis=1)))
    return BmsbEstimate(
        s_phi=s_phi,
        p_phi=p_phi,
        n_directions=unit.shape[0],
        n_samples=batch.n_samples,
    )


def gram_check(
    batches: Sequence[TrajectoryBatch],
    s_phi: float,
    p_phi: float,
    delta: float,
) -> GramReport:
    """Check Gram minimum eigenvalues against (1/2) s_phi^2 N_i T.

    Also evaluates the sample-size precondition N_i T >= (4/p_phi)
    (n_phi log 9 + log(M/delta)) for the smallest client.  Failed checks are
    reported as data, never raised: a run that violates the excitation bound
    is a finding, not a crash.
    """
    if not batches:
        raise ConfigError("need at least one batch")
    if s_phi <= 0:
        raise ConfigError(f"s_phi must be positive, got {s_phi}")
    if not (0 < p_phi <= 1):
        raise ConfigError(f"p_phi must lie in (0, 1], got {p_phi}")
    if not (0 < delta < 1):
        raise ConfigError(f"delta must lie in (0, 1), got {delta}")
    n_phi = batches[0].n_phi
    if any(b.n_phi != n_phi for b in batches):
        raise ConfigError("batches disagree on feature dimension")
    m = len(batches)
    clients = []
    pooled = np.zeros((n_phi, n_phi))
    for batch in batches:
        gram = batch.features @ batch.features.T
        pooled += gram
        lam = float(np.linalg.eigvalsh(gram)[0])
        threshold = 0.5 * s_phi**2 * batch.n_samples
        clients.append(
            GramClientReport(
                lambda_min=lam,
                threshold=threshold,
                passes=lam >= threshold,
                n_samples=batch.n_samples,
            )
        )
    pooled_lambda_min = float(np.linalg.eigvalsh(pooled)[0])
    total = sum(b.n_samples for b in batches)
    pooled_threshold = 0.5 * s_phi**2 * total
    required = (4.0 / p_phi) * (n_phi * math.log(9.0) + math.log(m / delta))
    return GramReport(
        clients=tuple(clients),
        pooled_lambda_min=pooled_lambda_min,
        pooled_threshold=pooled_threshold,
        pooled_passes=pooled_lambda_min >= pooled_threshold,
        required_samples=required,
        sample_size_ok=min(b.n_samples for b in batches) >= required,
    )


def noise_crossterm_check(
    noise: np.ndarray,
    features: np.ndarray,
    sigma_w: float,
    delta: float,
    M: int,
) -> CrosstermReport:
    """Compare ||W Phi^T||_2 with 4 sigma_w sqrt(N T (n_x + n_phi + log(2M/delta)))."""
    noise = np.asarray(noise, dtype=float)
    features = np.asarray(features, dtype=float)
    if noise.ndim != 2 or features.ndim != 2:
        raise ConfigError("noise and features must be matrices")
    if noise.shape[1] != features.shape[1]:
        raise ConfigError(
            f"column mismatch: noise {noise.shape[1]} vs features {features.shape[1]}"
        )
    if sigma_w <= 0:
        raise ConfigError(f"sigma_w must be positive, got {sigma_w}")
    if not (0 < delta < 1):
        raise ConfigError(f"delta must lie in (0, 1), got {delta}")
    if M < 1:
        raise ConfigError(f"M must be at least 1, got {M}")
    n_x = noise.shape[0]
    n_phi = features.shape[0]
    n_samples = features.shape[1]
    observed = float(np.linalg.norm(noise @ features.T, 2))
    log_term = math.log(2.0 * M / delta)
    bound = 4.0 * sigma_w * math.sqrt(n_samples * (n_x + n_phi + log_term))
    b_phi = float(np.max(np.sum(features**2, axis=0)))
    bound_bphi = 4.0 * sigma_w * math.sqrt(n_samples * (b_phi + log_term))
    return CrosstermReport(
        observed_norm=observed,
        bound_value=bound,
        bound_value_bphi=bound_bphi,
        passes=observed <= bound,
        passes_bphi=observed <= bound_bphi,
    )


def max_feature_energy(batches: Sequence[TrajectoryBatch]) -> float:
    """Empirical b_phi: the largest column energy ||phi||_2^2 over all data."""
    if not batches:
        raise ConfigError("need at least one batch")
    return max(float(np.max(np.sum(b.features**2, axis=0))) for b in batches)


def evaluate_bound(
    batches: Sequence[TrajectoryBatch],
    theta_bar: np.ndarray,
    true_thetas: Sequence[np.ndarray],
    sigma_w: float,
    bmsb: BmsbEstimate,
    delta: float,
    epsilon: float,
) -> BoundReport:
    """Assemble the finite-sample bound and the realized estimator error.

    ``theta_bar`` is the pooled estimate, ``true_thetas`` the per-client
    ground truths; the observed error is max_i ||theta_bar - theta_i*||_2
    (absolute, since the bound is not normalized).  ``sigma_w`` must be the
    noise standard deviation in target units.
    """
    if len(true_thetas) != len(batches):
        raise ConfigError(
            f"{len(true_thetas)} true matrices for {len(batches)} batches"
        )
    if not (0 < delta < 1):
        raise ConfigError(f"delta must lie in (0, 1), got {delta}")
    if epsilon < 0:
        raise ConfigError(f"epsilon must be non-negative, got {epsilon}")
    if sigma_w < 0:
        raise ConfigError(f"sigma_w must be non-negative, got {sigma_w}")
    if bmsb.s_phi <= 0:
        raise DegenerateExcitation("bound undefined for zero small-ball radius")
    theta_bar = np.asarray(theta_bar, dtype=float)
    m = len(batches)
    n_x = batches[0].target_dim
    n_phi = batches[0].n_phi
    total_samples = sum(b.n_samples for b in batches)
    c1 = 8.0 * sigma_w / bmsb.s_phi**2
    b_phi = max_feature_energy(batches)
    c2 = b_phi / bmsb.s_phi**2 + 0.5
    bound = (
        c1 * math.sqrt((n_x + n_phi + math.log(2.0 * m / delta)) / total_samples)
        + c2 * epsilon
    )
    observed = max(
        float(np.linalg.norm(theta_bar - np.asarray(t, dtype=float), 2))
        for t in true_thetas
    )
    return BoundReport(
        C1=c1,
        C2=c2,
        b_phi=b_phi,
        delta=delta,
        bound_value=bound,
        observed_error=observed,
        sigma_w=sigma_w,
        epsilon=epsilon,
    )
