"""Deterministic seed derivation: counter-keyed child streams.

Child streams are identified by (master entropy, spawn key path); extending
the key path never collides with sibling paths, so replicas can be run in
any order or process layout and still reproduce bit-identical draws.
"""
from __future__ import annotations

import numpy as np

__all__ = ["child_seed", "child_rng"]


def child_seed(seed, *key: int) -> np.random.SeedSequence:
    """Derive a child SeedSequence by appending `key` to the spawn path.

    `seed` may be an int or an existing SeedSequence.
    """
    if isinstance(seed, np.random.SeedSequence):
        return np.random.SeedSequence(
            entropy=seed.entropy, spawn_key=tuple(seed.spawn_key) + tuple(key)
        )
    return np.random.SeedSequence(entropy=seed, spawn_key=tuple(key))


def child_rng(seed, *key: int) -> np.random.Generator:
    return np.random.default_rng(child_seed(seed, *key))
