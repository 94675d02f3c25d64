"""Experiment configuration: flat key-value files with a strict schema.

A config file is plain text, one ``key = value`` per line; blank lines and
lines starting with ``#`` are ignored.  Comma-separated values form a list.
Exactly one of the sweepable keys (M, N_i, epsilon, K_i) may be a list; it
becomes the experiment's swept variable.

Schema (units in parentheses):

    system       required; one of: synthetic, pendulum, quadrotor
    alpha        required; local-step learning rate (> 0)
    M            client count, sweepable (default 1)
    N_i          trajectories per client, sweepable (default 10)
    T            steps per trajectory (default: 5; quadrotor 10)
    epsilon      heterogeneity bound, sweepable (dimensionless, default 0.0)
    K_i          local update steps per round, sweepable (default 1)
    batch_size   mini-batch columns per local step (omit for full batch)
    rounds       communication rounds R (default: synthetic 2000,
                 pendulum 500 full-batch / 1000 mini-batch, quadrotor 500)
    seeds        master seeds, one run per seed (default 0..9)
    norm         error norm: spectral (default) or frobenius
    delta        confidence parameter in (0, 1) for diagnostics (default 0.05)
    output_path  CSV destination (default results.csv)

Unknown keys are rejected, never ignored.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Optional, Union

from .errors import ConfigError

SYSTEMS = ("synthetic", "pendulum", "quadrotor")
NORMS = ("spectral", "frobenius")
SWEEPABLE = ("M", "N_i", "epsilon", "K_i")

_DEFAULT_T = {"synthetic": 5, "pendulum": 5, "quadrotor": 10}


def _default_rounds(system: str, batch_size: Optional[int]) -> int:
    if system == "synthetic":
        return 2000
    if system == "pendulum":
        return 1000 if batch_size is not None else 500
    return 500


IntOrList = Union[int, tuple[int, ...]]
FloatOrList = Union[float, tuple[float, ...]]


@dataclass(frozen=True)
class ExperimentConfig:
    """A validated experiment description."""

    system: str
    alpha: float
    M: IntOrList = 1
    N_i: IntOrList = 10
    T: Optional[int] = None
    epsilon: FloatOrList = 0.0
    K_i: IntOrList = 1
    batch_size: Optional[int] = None
    rounds: Optional[int] = None
    seeds: tuple[int, ...] = tuple(range(10))
    norm: str = "spectral"
    delta: float = 0.05
    output_path: str = "results.csv"

    def __post_init__(self) -> None:
        if self.system not in SYSTEMS:
            raise ConfigError(
                f"system: expected one of {', '.join(SYSTEMS)}, got {self.system!r}"
            )
        if not self.alpha > 0:
            raise ConfigError(f"alpha: must be > 0, got {self.alpha}")
        if self.norm not in NORMS:
            raise ConfigError(
                f"norm: expected one of {', '.join(NORMS)}, got {self.norm!r}"
            )
        if not (0 < self.delta < 1):
            raise ConfigError(f"delta: must lie in (0, 1), got {self.delta}")
        swept = [name for name in SWEEPABLE if isinstance(getattr(self, name), tuple)]
        if len(swept) > 1:
            raise ConfigError(
                f"at most one of {', '.join(SWEEPABLE)} may be a sweep list, "
                f"got lists for: {', '.join(swept)}"
            )
        for name in ("M", "N_i", "K_i"):
            for v in _as_list(getattr(self, name)):
                if v < 1:
                    raise ConfigError(f"{name}: counts must be >= 1, got {v}")
        for v in _as_list(self.epsilon):
            if v < 0:
                raise ConfigError(f"epsilon: must be >= 0, got {v}")
        if self.T is not None and self.T < 1:
            raise ConfigError(f"T: must be >= 1, got {self.T}")
        if self.rounds is not None and self.rounds < 1:
            raise ConfigError(f"rounds: must be >= 1, got {self.rounds}")
        if self.batch_size is not None and self.batch_size < 1:
            raise ConfigError(f"batch_size: must be >= 1, got {self.batch_size}")
        if not self.seeds:
            raise ConfigError("seeds: need at least one seed")
        if any(s < 0 for s in self.seeds):
            raise ConfigError(f"seeds: must be non-negative, got {self.seeds}")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError(f"seeds: duplicates not allowed, got {self.seeds}")

    @property
    def resolved_T(self) -> int:
        return self.T if self.T is not None else _DEFAULT_T[self.system]

    @property
    def resolved_rounds(self) -> int:
        if self.rounds is not None:
            return self.rounds
        return _default_rounds(self.system, self.batch_size)

    def sweep(self) -> tuple[str, tuple[float, ...]]:
        """The swept variable's name and values (a singleton when nothing sweeps)."""
        for name in SWEEPABLE:
            value = getattr(self, name)
            if isinstance(value, tuple):
                return name, value
        return "M", (self.M,)

    def config_id(self) -> str:
        """Stable 8-hex-digit identity of everything that affects results.

        The output path is excluded: writing the same experiment elsewhere
        is still the same experiment.
        """
        parts = []
        for name in sorted(
            (
                "system", "alpha", "M", "N_i", "T", "epsilon", "K_i",
                "batch_size", "rounds", "seeds", "norm", "delta",
            )
        ):
            value = getattr(self, name)
            if name == "T":
                value = self.resolved_T
            if name == "rounds":
                value = self.resolved_rounds
            if isinstance(value, tuple):
                rendered = ",".join(repr(v) for v in value)
            else:
                rendered = repr(value)
            parts.append(f"{name}={rendered}")
        digest = hashlib.sha256("\n".join(parts).encode()).hexdigest()
        return digest[:8]


def _as_list(value) -> tuple:
    return value if isinstance(value, tuple) else (value,)


def _parse_int(key: str, token: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {token!r}") from None


def _parse_float(key: str, token: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {token!r}") from None
    if value != value:  # NaN
        raise ConfigError(f"{key}: NaN is not a valid value")
    return value


def _split(raw: str) -> list[str]:
    return [tok.strip() for tok in raw.split(",") if tok.strip()]


def _coerce(key: str, raw: str):
    tokens = _split(raw)
    if not tokens:
        raise ConfigError(f"{key}: empty value")
    if key in ("M", "N_i", "K_i"):
        values = tuple(_parse_int(key, t) for t in tokens)
        return values if len(values) > 1 else values[0]
    if key == "epsilon":
        values = tuple(_parse_float(key, t) for t in tokens)
        return values if len(values) > 1 else values[0]
    if key == "seeds":
        return tuple(_parse_int(key, t) for t in tokens)
    if key in ("T", "rounds", "batch_size"):
        if len(tokens) != 1:
            raise ConfigError(f"{key}: expected a single value, got {raw!r}")
        return _parse_int(key, tokens[0])
    if key in ("alpha", "delta"):
        if len(tokens) != 1:
            raise ConfigError(f"{key}: expected a single value, got {raw!r}")
        return _parse_float(key, tokens[0])
    if key in ("system", "norm", "output_path"):
        if len(tokens) != 1:
            raise ConfigError(f"{key}: expected a single value, got {raw!r}")
        return tokens[0]
    raise ConfigError(f"unknown key {key!r}")


_ALL_KEYS = (
    "system", "alpha", "M", "N_i", "T", "epsilon", "K_i",
    "batch_size", "rounds", "seeds", "norm", "delta", "output_path",
)


def parse_config_text(text: str) -> ExperimentConfig:
    """Parse and validate a config document; reject unknown/duplicate keys."""
    values: dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if key not in _ALL_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _coerce(key, raw.strip())
    for required in ("system", "alpha"):
        if required not in values:
            raise ConfigError(f"{required}: required key is missing")
    return ExperimentConfig(**values)


def load_config(path: str) -> ExperimentConfig:
    """Read and validate a config file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from None
    return parse_config_text(text)
