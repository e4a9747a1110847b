"""Shared fixtures."""
from typing import Callable

import numpy as np
import pytest
from scipy import special

from heterosim.measurement import make_random
from heterosim.models import Scenario
from heterosim.utils.rng import make_rng


@pytest.fixture
def rng() -> np.random.Generator:
    return make_rng(12345)


@pytest.fixture
def logistic_data() -> Callable[..., tuple[np.ndarray, np.ndarray]]:
    """Factory for (design, y) drawn from a known logistic model."""

    def _make(
        n: int = 500, beta: tuple[float, ...] = (1.0,), alpha: float = 0.0, seed: int = 0
    ) -> tuple[np.ndarray, np.ndarray]:
        gen = make_rng(seed)
        x = gen.standard_normal((n, len(beta)))
        p = special.expit(alpha + x @ np.asarray(beta))
        y = (gen.random(n) < p).astype(np.int8)
        return x, y

    return _make


@pytest.fixture
def homogeneous_scenario() -> Scenario:
    model = make_random(0.5)
    return Scenario(
        id="homogeneous",
        family="single",
        deriv_models=(model,),
        valid_models=(model,),
        n_deriv=400,
        n_valid=400,
    )
