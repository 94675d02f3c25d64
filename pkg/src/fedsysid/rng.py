"""Deterministic random-stream derivation.

Every stochastic ingredient of an experiment (nominal system draws, fleet
heterogeneity scalars, trajectory noise, mini-batch shuffles) pulls from its
own substream derived from the master seed plus structural tags.  Substreams
depend only on their key, never on execution order or thread count, which is
what makes repeated runs byte-identical: adding clients, trajectories, or
sweep points never perturbs the draws of existing ones.

Key discipline: numpy's SeedSequence zero-pads entropy shorter than four
words, so keys that differ only in trailing zeros (up to length four) land on
the same stream.  Distinctness therefore never rests on key length alone:
every key drawn by this library carries a structural tag directly after the
master seed, the tags are pairwise distinct, and each tag is used at a fixed
arity.  Free-form indices (clients, trajectories, rounds) only ever appear
after a tag, never in the tag position.  Custom seed tuples passed into the
simulation APIs should follow the same rule: do not place values in the 100s
range used by the tags below right after the master seed.
"""

from __future__ import annotations

from typing import Sequence, Union

import numpy as np

# Structural tags.  Arbitrary but frozen: changing any of them changes every
# experiment's draws.
SEED_SYSTEM = 101         # nominal system matrices
SEED_DIRECTIONS = 102     # probe directions for small-ball diagnostics
SEED_FLEET = 103          # per-client heterogeneity scalars
SEED_DATA = 104           # trajectory initial states, dither, process noise
SEED_FED = 105            # mini-batch shuffles inside federated rounds
SEED_HETEROGENEITY = 106  # fleet-wide perturbation direction matrices

SeedLike = Union[int, Sequence[int]]


def as_key(seed: SeedLike) -> tuple[int, ...]:
    """Normalize a seed (single int or sequence of ints) to a key tuple."""
    if isinstance(seed, (int, np.integer)):
        key = (int(seed),)
    else:
        key = tuple(int(s) for s in seed)
    if not key or any(s < 0 for s in key):
        raise ValueError(f"seed components must be non-negative ints, got {seed!r}")
    return key


def substream(*key: int) -> np.random.Generator:
    """Return the generator owned by a structural key.

    The key feeds a SeedSequence, so distinct tuples give statistically
    independent streams and the same tuple always gives the same stream.
    """
    parts = [int(k) for k in key]
    if not parts or any(p < 0 for p in parts):
        raise ValueError(f"seed components must be non-negative ints, got {key!r}")
    return np.random.default_rng(parts)
