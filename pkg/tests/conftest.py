"""Shared fixtures: benchmark-grid covariance matrices and small helpers."""
import numpy as np
import pytest

from vqlsgp import gp

# Published hyperparameter fixtures used by several tests: the kernel
# comparison pair for the 16-point grid.
RBF_FIT = gp.Hyperparameters(amplitude=1.4489, length_scale=0.4322,
                             noise_variance=0.01)
MT_FIT = gp.Hyperparameters(amplitude=0.9083, length_scale=1.2417,
                            taper_range=0.64, noise_variance=0.01)
MT_FIT_ALT = gp.Hyperparameters(amplitude=0.9015, length_scale=2.5394,
                                taper_range=0.64, noise_variance=0.01)


@pytest.fixture(scope="session")
def train_grid():
    return np.linspace(-1.0, 2.2, 16)


@pytest.fixture(scope="session")
def k_hat_mt(train_grid):
    spec = gp.KernelSpec(family="mt", hyper=MT_FIT)
    return gp.covariance_matrix(train_grid, train_grid, spec) + 0.01 * np.eye(16)


@pytest.fixture(scope="session")
def k_hat_rbf(train_grid):
    spec = gp.KernelSpec(family="rbf", hyper=RBF_FIT)
    return gp.covariance_matrix(train_grid, train_grid, spec) + 0.01 * np.eye(16)


def random_spd(rng, dim, shift=None):
    m = rng.normal(size=(dim, dim))
    return m @ m.T + (shift if shift is not None else dim) * np.eye(dim)
