"""Federated identification of linearly-parameterized nonlinear dynamics.

The library simulates fleets of heterogeneous clients whose dynamics share a
nonlinear feature map, runs the federated averaging protocol over their local
least-squares objectives, and empirically validates the excitation conditions
and finite-sample error bound that govern the pooled estimator.
"""

from .config import ExperimentConfig, load_config, parse_config_text
from .diagnostics import (
    BmsbEstimate,
    BoundReport,
    CrosstermReport,
    GramReport,
    estimate_bmsb,
    evaluate_bound,
    exceedance_fraction,
    gram_check,
    max_feature_energy,
    noise_crossterm_check,
)
from .errors import (
    AggregationError,
    ClientDiverged,
    ConfigError,
    DegenerateExcitation,
    InsufficientData,
    MetricUndefined,
    RankDeficientGram,
    SimulationDiverged,
)
from .estimation import (
    ErrorRecord,
    estimation_error,
    gram_matrix,
    lse_client,
    lse_pooled_average,
)
from .federation import (
    ClientState,
    FederationState,
    aggregate,
    client_update,
    run_federation,
)
from .harness import (
    CSV_HEADER,
    ExperimentRecord,
    ScalingReport,
    read_records,
    run_experiment,
    sqrtM_scaling,
    write_records,
)
from .systems import (
    FeatureMap,
    HeterogeneitySpec,
    NoiseSpec,
    QuadrotorGains,
    SystemModel,
    TrajectoryBatch,
    make_client_fleet,
    make_heterogeneity,
    make_pendulum_system,
    make_quadrotor_system,
    make_synthetic_system,
    merge_batches,
    simulate_batch,
    simulate_fleet,
)

__version__ = "0.1.0"

__all__ = [
    "AggregationError",
    "BmsbEstimate",
    "BoundReport",
    "ClientDiverged",
    "ClientState",
    "ConfigError",
    "CrosstermReport",
    "CSV_HEADER",
    "DegenerateExcitation",
    "ErrorRecord",
    "ExperimentConfig",
    "ExperimentRecord",
    "FeatureMap",
    "FederationState",
    "GramReport",
    "HeterogeneitySpec",
    "InsufficientData",
    "MetricUndefined",
    "NoiseSpec",
    "QuadrotorGains",
    "RankDeficientGram",
    "ScalingReport",
    "SimulationDiverged",
    "SystemModel",
    "TrajectoryBatch",
    "aggregate",
    "client_update",
    "estimate_bmsb",
    "estimation_error",
    "evaluate_bound",
    "exceedance_fraction",
    "gram_check",
    "gram_matrix",
    "load_config",
    "lse_client",
    "lse_pooled_average",
    "make_client_fleet",
    "make_heterogeneity",
    "make_pendulum_system",
    "make_quadrotor_system",
    "make_synthetic_system",
    "max_feature_energy",
    "merge_batches",
    "noise_crossterm_check",
    "parse_config_text",
    "read_records",
    "run_experiment",
    "run_federation",
    "simulate_batch",
    "simulate_fleet",
    "sqrtM_scaling",
    "write_records",
]
