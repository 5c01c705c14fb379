import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from mfsrbf.logic.srbf import TrainingSet  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: statistical or full-campaign tests")


@pytest.fixture
def line_samples():
    """Noisy samples of a straight line on [0, 1]."""
    x = np.linspace(0.0, 1.0, 20)
    rng = np.random.default_rng(7)
    return TrainingSet(x, 2.0 * x - 1.0 + 0.05 * rng.standard_normal(x.size))


@pytest.fixture
def smooth_1d():
    x = np.linspace(0.0, 1.0, 9)
    return TrainingSet(x, np.sin(3.0 * x))


class StubModel:
    """Acquisition stand-in with analytic mean and uncertainty."""

    def __init__(self, mean, uncertainty=None):
        self._mean = mean
        self._unc = uncertainty or (lambda X: np.zeros(len(X)))

    def predict_many(self, X):
        X = np.atleast_2d(X)
        return self._mean(X), self._unc(X)


@pytest.fixture
def stub_model():
    return StubModel
