"""
Fixtures partagées
"""

import numpy as np
import pytest

from backend.datasets import Dataset
from backend.experiment_runner import ExperimentConfig
from backend.ode_engine import SolverConfig


@pytest.fixture
def tight_solver():
    """Tolérances serrées pour les comparaisons à des solutions exactes"""
    return SolverConfig(rtol=1e-9, atol=1e-12, dt_init=1e-5, dt_min=1e-12, dt_max=0.01)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def blobs():
    """Dix classes bien séparées en dimension 10"""
    gen = np.random.default_rng(7)
    labels = np.arange(1000) % 10
    inputs = 3.0 * np.eye(10)[labels] + 0.3 * gen.standard_normal((1000, 10))
    return Dataset(inputs, labels, 10, 'blobs')


@pytest.fixture
def tiny_circles_config(tmp_path):
    """Expérience minuscule sur les cercles (quelques secondes de calcul)"""
    return ExperimentConfig.model_validate({
        'name': 'tiny',
        'dataset': {'name': 'circles', 'n_train': 40, 'n_test': 20, 'seed': 3},
        'network': {'layer_widths': [2, 8, 2], 'bias_unit': True},
        'eval': {'test_size': 10, 'checkpoint_every': 20, 'eval_every': 20},
        'num_samples': 40,
        'seed': 0,
        'output_dir': str(tmp_path / 'runs'),
    })
