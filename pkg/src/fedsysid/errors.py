"""Exception types raised across the library.

Every failure mode callers are expected to handle has its own class so that
experiment drivers can distinguish bad configuration from numerical blow-ups
from degenerate data.
"""


class ConfigError(ValueError):
    """Invalid dimensions, non-positive physical constants, or bad config keys."""


class SimulationDiverged(RuntimeError):
    """A trajectory left the configured state envelope."""

    def __init__(self, trajectory: int, step: int, max_abs: float):
        self.trajectory = trajectory
        self.step = step
        self.max_abs = max_abs
        super().__init__(
            f"trajectory {trajectory} diverged at step {step} "
            f"(max |state entry| = {max_abs:.3e})"
        )


class ClientDiverged(RuntimeError):
    """A client's local update overflowed (learning rate too large)."""

    def __init__(self, client_id: int, step: int, round_index: int | None = None):
        self.client_id = client_id
        self.step = step
        self.round_index = round_index
        where = f"client {client_id}, local step {step}"
        if round_index is not None:
            where += f", round {round_index}"
        super().__init__(f"parameter overflow at {where}; reduce the learning rate")


class AggregationError(ValueError):
    """Empty update list or mismatched shapes at the server."""


class RankDeficientGram(RuntimeError):
    """The regressor Gram matrix is numerically singular and no ridge was given."""

    def __init__(self, lambda_min: float, client: int | None = None):
        self.lambda_min = lambda_min
        self.client = client
        where = "" if client is None else f" (client {client})"
        super().__init__(
            f"Gram matrix is rank deficient{where}: lambda_min = {lambda_min:.3e}"
        )


class DegenerateExcitation(RuntimeError):
    """Feature data carries no energy in some direction; small-ball radius is zero."""


class MetricUndefined(ValueError):
    """Normalized error requested against a zero true-parameter matrix."""


class InsufficientData(ValueError):
    """Not enough sweep points or records for the requested fit."""
