"""Shared helpers: seeded random physical Gaussian states."""

import numpy as np
import pytest

from cpfkit import GaussianState


def random_physical_state(rng: np.random.Generator, n_modes: int) -> GaussianState:
    """A random mixed state: V = I + A A^T is symmetric and >= I, hence physical."""
    a = rng.normal(scale=0.7, size=(2 * n_modes, 2 * n_modes))
    cm = np.eye(2 * n_modes) + a @ a.T
    mean = rng.normal(scale=1.5, size=2 * n_modes)
    return GaussianState(mean, cm)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
