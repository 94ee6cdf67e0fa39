"""Deterministic per-iteration random number generation.

Every stochastic draw in the package flows through a generator obtained
here, so results are a pure function of the configured base seed. Each
Monte-Carlo iteration gets its own stream derived from (base_seed, k),
which makes iteration results independent of execution order.
"""

from __future__ import annotations

import os

import numpy as np

_SEED_ENV_VAR = "UQF_SEED"
_MASK64 = (1 << 64) - 1


def iteration_rng(base_seed: int, iteration: int) -> np.random.Generator:
    """Generator for one MC iteration, decorrelated from all others."""
    return np.random.default_rng(np.random.SeedSequence([base_seed & _MASK64, iteration]))


def resolve_seed(explicit: int | None) -> int:
    """Pick the run seed: explicit flag, then UQF_SEED, then 0."""
    if explicit is not None:
        return explicit
    env = os.environ.get(_SEED_ENV_VAR)
    if env is not None:
        return int(env)
    return 0
