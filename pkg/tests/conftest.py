"""Shared fixtures: batches of finite configuration-model realizations.

The two session-scoped batches are the expensive part of the suite; both
the acceptance criteria and the per-module Monte Carlo checks read from
them, so the graphs are built once.
"""
from __future__ import annotations

import pytest

from fppnet.verify import collect_finite_batch

DEFAULT_SEED = 20260809


@pytest.fixture(scope="session")
def batch3000():
    return collect_finite_batch(
        tau=1.5, n=3000, graphs=200, pairs=50, master_seed=DEFAULT_SEED
    )


@pytest.fixture(scope="session")
def batch1000():
    return collect_finite_batch(
        tau=1.5, n=1000, graphs=200, pairs=50, master_seed=DEFAULT_SEED
    )
