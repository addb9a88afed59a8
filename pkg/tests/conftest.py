"""Shared synthetic stores. Everything here runs offline."""

import numpy as np
import pytest

from realcl.embedstore import SynthSpec, generate_synthetic


@pytest.fixture(scope="session")
def small_store():
    """10 classes, well separated, small dim: fast scenario/memory tests."""
    return generate_synthetic(
        SynthSpec(num_classes=10, dim=16, train_per_class=30, test_per_class=10,
                  mean_radius=10.0, noise_sigma=1.0, seed=11)
    )


@pytest.fixture(scope="session")
def twenty_class_store():
    """20-class store used by the scenario property suite."""
    return generate_synthetic(
        SynthSpec(num_classes=20, dim=8, train_per_class=25, test_per_class=5,
                  mean_radius=10.0, noise_sigma=1.0, seed=23)
    )


@pytest.fixture(scope="session")
def separable_store():
    """Full-width separable store for training tests (512-d, ratio 10)."""
    return generate_synthetic(
        SynthSpec(num_classes=10, dim=512, train_per_class=500, test_per_class=100,
                  mean_radius=10.0, noise_sigma=1.0, seed=3)
    )


@pytest.fixture()
def rng():
    return np.random.default_rng(0)
