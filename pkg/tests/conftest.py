"""Shared helpers for the test suite.

The frozen acceptance suite lives here so unit tests and the acceptance
gate exercise the same seeded instances.
"""

from __future__ import annotations

import numpy as np
import pytest

from boolflow import BooleanProblem, InstanceSpec, random_poly
from boolflow.harness import instance_seed_for_cell
from boolflow.seeding import derive_rng

# Master seed of the frozen acceptance suite.
FROZEN_MASTER_SEED = 20260809

# Cells of the delta-epsilon scaling suite (dense instances, zero starts).
FROZEN_CELLS = tuple((n, d) for n in (2, 4, 6) for d in (4, 5, 6))


def frozen_spec(n: int, d: int, sparsity: float = 1.0) -> InstanceSpec:
    seed = instance_seed_for_cell(FROZEN_MASTER_SEED, n, d)
    return InstanceSpec(n=n, d=d, sparsity=sparsity, seed=seed)


def frozen_instance(n: int, d: int, sparsity: float = 1.0):
    return random_poly(frozen_spec(n, d, sparsity))


def frozen_problem(n: int, d: int, sparsity: float = 1.0) -> BooleanProblem:
    return BooleanProblem.from_pm1(frozen_instance(n, d, sparsity))


def drawn_sparsity(seed: int) -> float:
    """The harness' per-instance sparsity draw in [0.5, 1]."""
    return 0.5 + 0.5 * float(derive_rng(seed, 1).random())


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
