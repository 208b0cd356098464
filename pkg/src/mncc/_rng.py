"""Deterministic per-replicate random stream derivation.

Every Monte-Carlo loop in this package derives one independent stream per
replicate from ``(master_seed, index path)``.  Results therefore do not
depend on execution order or on how replicates are distributed over
threads, and rerunning with the same seed is bit-identical.
"""

from __future__ import annotations

import numpy as np

__all__ = ["child_seed", "child_rng", "derived_int_seed"]


def child_seed(seed: int, *path: int) -> np.random.SeedSequence:
    """SeedSequence for the stream addressed by ``path`` under ``seed``."""
    return np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(p) for p in path))


def child_rng(seed: int, *path: int) -> np.random.Generator:
    """Generator for the stream addressed by ``path`` under ``seed``."""
    return np.random.default_rng(child_seed(seed, *path))


def derived_int_seed(seed: int, *path: int) -> int:
    """Collapse a child stream address into a plain integer seed."""
    return int(child_seed(seed, *path).generate_state(1, np.uint64)[0])
