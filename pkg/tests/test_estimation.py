"""Least squares and the normalized error metric.

Independent oracles: a hand-rolled Gauss-Jordan elimination for the normal
equations (the library uses a LAPACK factorization solve), and power
iteration for the spectral norm (the library uses SVD).
"""

import numpy as np
import pytest

from fedsysid.errors import AggregationError, MetricUndefined, RankDeficientGram
from fedsysid.estimation import (
    ErrorRecord,
    estimation_error,
    gram_matrix,
    lse_client,
    lse_pooled_average,
)
from fedsysid.rng import substream
from fedsysid.systems import TrajectoryBatch, make_synthetic_system, simulate_batch


def _batch(features, targets):
    features = np.asarray(features, dtype=float)
    targets = np.asarray(targets, dtype=float)
    return TrajectoryBatch(features, targets, n_traj=1, traj_len=features.shape[1])


def _solve_by_elimination(features, targets):
    # Gauss-Jordan with partial pivoting on the augmented normal equations
    # [G | F Y^T]; returns theta with theta G = Y F^T.  Pure row operations,
    # no library solver.
    gram = features @ features.T
    rhs = features @ targets.T
    n = gram.shape[0]
    aug = np.hstack([gram.astype(float), rhs.astype(float)])
    for col in range(n):
        pivot = col + int(np.argmax(np.abs(aug[col:, col])))
        aug[[col, pivot]] = aug[[pivot, col]]
        aug[col] = aug[col] / aug[col, col]
        for row in range(n):
            if row != col:
                aug[row] = aug[row] - aug[row, col] * aug[col]
    return aug[:, n:].T


def _spectral_norm_power_iteration(matrix, iters=500):
    # Largest singular value via power iteration on A^T A from a fixed,
    # non-degenerate start vector.
    a = np.asarray(matrix, dtype=float)
    v = np.linspace(1.0, 2.0, a.shape[1])
    v /= np.linalg.norm(v)
    for _ in range(iters):
        w = a.T @ (a @ v)
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        v = w / norm
    return float(np.sqrt(v @ (a.T @ (a @ v))))


# ---------------------------------------------------------------------------
# gram_matrix / lse_client
# ---------------------------------------------------------------------------


def test_gram_matrix_hand_check():
    batch = _batch([[1.0, 2.0], [0.0, 1.0]], [[0.0, 0.0]])
    assert np.array_equal(gram_matrix(batch), [[5.0, 2.0], [2.0, 1.0]])


def test_lse_scalar_hand_check():
    # Single regressor, columns [1, 1], targets [1, 3]: theta = (1+3)/2 = 2.
    batch = _batch([[1.0, 1.0]], [[1.0, 3.0]])
    assert np.allclose(lse_client(batch), [[2.0]], atol=1e-15)


def test_lse_exact_recovery_noise_free():
    sys = make_synthetic_system(seed=5, noise_std=0.0)
    batch = simulate_batch(sys, 10, 5, seed=1)
    theta_hat = lse_client(batch)
    assert np.max(np.abs(theta_hat - sys.true_theta)) < 1e-10


def test_lse_matches_elimination_oracle():
    rng = substream(23)
    features = rng.standard_normal((4, 30))
    targets = rng.standard_normal((2, 30))
    theta_lib = lse_client(_batch(features, targets))
    theta_ref = _solve_by_elimination(features, targets)
    assert np.allclose(theta_lib, theta_ref, atol=1e-10)


def test_lse_is_residual_minimizer():
    rng = substream(29)
    features = rng.standard_normal((3, 25))
    targets = rng.standard_normal((2, 25))
    batch = _batch(features, targets)
    theta_hat = lse_client(batch)
    best = np.linalg.norm(targets - theta_hat @ features)
    for k in range(5):
        perturbed = theta_hat + 1e-3 * substream(31, k).standard_normal((2, 3))
        assert np.linalg.norm(targets - perturbed @ features) > best


def test_lse_rank_deficiency_raises():
    # Second regressor row is identically zero: Gram is singular.
    batch = _batch([[1.0, 2.0, 3.0], [0.0, 0.0, 0.0]], [[1.0, 1.0, 1.0]])
    with pytest.raises(RankDeficientGram) as exc_info:
        lse_client(batch)
    assert exc_info.value.lambda_min <= 1e-12


def test_lse_ridge_rescues_rank_deficiency():
    batch = _batch([[1.0, 2.0, 3.0], [0.0, 0.0, 0.0]], [[1.0, 1.0, 1.0]])
    ridge = 1e-6
    theta = lse_client(batch, ridge=ridge)
    # Direct check against the regularized normal equations.
    gram = gram_matrix(batch) + ridge * np.eye(2)
    rhs = batch.features @ batch.targets.T
    assert np.allclose(theta @ gram, rhs.T, atol=1e-12)


def test_lse_rejects_negative_ridge():
    batch = _batch([[1.0, 1.0]], [[1.0, 3.0]])
    with pytest.raises(ValueError):
        lse_client(batch, ridge=-1e-9)


# ---------------------------------------------------------------------------
# lse_pooled_average
# ---------------------------------------------------------------------------


def test_pooled_average_of_identical_clients_is_the_client_estimate():
    sys = make_synthetic_system(seed=5, noise_std=1.0)
    batch = simulate_batch(sys, 5, 5, seed=2)
    single = lse_client(batch)
    pooled = lse_pooled_average([batch, batch, batch])
    assert np.allclose(pooled, single, atol=1e-12)


def test_pooled_average_is_entrywise_mean():
    rng = substream(37)
    batches = [
        _batch(rng.standard_normal((3, 20)), rng.standard_normal((2, 20)))
        for _ in range(3)
    ]
    expected = sum(lse_client(b) for b in batches) / 3
    assert np.allclose(lse_pooled_average(batches), expected, atol=1e-12)


def test_pooled_average_reports_offending_client():
    good = _batch(np.eye(2), np.ones((1, 2)))
    bad = _batch([[1.0, 2.0], [0.0, 0.0]], [[1.0, 1.0]])
    with pytest.raises(RankDeficientGram) as exc_info:
        lse_pooled_average([good, bad])
    assert exc_info.value.client == 1


def test_pooled_average_rejects_empty_and_mismatched():
    with pytest.raises(AggregationError):
        lse_pooled_average([])
    a = _batch(np.eye(2), np.ones((1, 2)))
    b = _batch(np.eye(3), np.ones((1, 3)))
    with pytest.raises(AggregationError):
        lse_pooled_average([a, b])


# ---------------------------------------------------------------------------
# estimation_error
# ---------------------------------------------------------------------------


def test_error_zero_for_exact_estimate():
    theta = substream(41).standard_normal((2, 3))
    assert estimation_error(theta, theta) == 0.0


def test_error_doubling_gives_one():
    theta = substream(43).standard_normal((2, 3))
    assert np.isclose(estimation_error(2.0 * theta, theta), 1.0, atol=1e-12)


def test_spectral_error_matches_power_iteration_oracle():
    rng = substream(47)
    theta_true = rng.standard_normal((3, 5))
    theta_hat = theta_true + rng.standard_normal((3, 5))
    expected = _spectral_norm_power_iteration(
        theta_hat - theta_true
    ) / _spectral_norm_power_iteration(theta_true)
    got = estimation_error(theta_hat, theta_true, norm="spectral")
    assert np.isclose(got, expected, atol=1e-8)


def test_spectral_error_invariant_under_rotation():
    rng = substream(53)
    theta_true = rng.standard_normal((3, 5))
    theta_hat = theta_true + rng.standard_normal((3, 5))
    q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    base = estimation_error(theta_hat, theta_true)
    rotated = estimation_error(q @ theta_hat, q @ theta_true)
    assert np.isclose(base, rotated, atol=1e-12)


def test_frobenius_error_matches_hand_sum():
    theta_true = np.array([[3.0, 0.0], [0.0, 4.0]])
    theta_hat = np.array([[3.0, 1.0], [2.0, 4.0]])
    # ||diff||_F = sqrt(1 + 4) and ||true||_F = 5.
    expected = np.sqrt(5.0) / 5.0
    got = estimation_error(theta_hat, theta_true, norm="frobenius")
    assert np.isclose(got, expected, atol=1e-15)


def test_error_rejects_zero_truth_and_bad_inputs():
    with pytest.raises(MetricUndefined):
        estimation_error(np.ones((1, 2)), np.zeros((1, 2)))
    with pytest.raises(ValueError):
        estimation_error(np.ones((1, 2)), np.ones((2, 2)))
    with pytest.raises(ValueError):
        estimation_error(np.ones((1, 2)), np.ones((1, 2)), norm="nuclear")


# ---------------------------------------------------------------------------
# ErrorRecord
# ---------------------------------------------------------------------------


def test_error_record_max_and_mean():
    rec = ErrorRecord(round=3, per_client=(0.5, 0.1, 0.3))
    assert rec.max_error == 0.5
    assert np.isclose(rec.mean_error, 0.3)


def test_error_record_rejects_bad_entries():
    with pytest.raises(AggregationError):
        ErrorRecord(round=1, per_client=())
    with pytest.raises(AggregationError):
        ErrorRecord(round=1, per_client=(0.1, -0.2))
    with pytest.raises(AggregationError):
        ErrorRecord(round=1, per_client=(float("nan"),))
