"""
Backend modules for the continuous-time learning simulator.
"""

from .errors import (CTNetError, ConfigurationError, DatasetFormatError, DivergenceError,
                     IntegrationError, ScheduleExhaustedError, StepBudgetError)
from .ode_engine import SolverConfig, SolverStats, integrate, tsit5_step
from .presentation import PresentationSchedule, ScheduleParams, dither_labels, presentation_order
from .datasets import Dataset, load_mnist_7x7, make_circles
from .state import NetworkState, StateLayout
from .error_routing import RoutingStrategy, alignment_metrics, route_errors
from .network_core import ContinuousNetwork, NetworkConfig, dynamics_rhs, evaluate, quasi_static_update
from .overlap_analysis import (TimingScenario, closed_form_update, kernel_curve, overlap_budget,
                               plasticity_threshold, triangular_limit)
from .baseline_mlp import BaselineConfig, BaselineMLP, train_baseline
from .experiment_runner import (ExperimentConfig, ExperimentRunner, RunRecord, compare_with_baseline,
                                run_single, run_sweep)
from .record_writer import RecordWriter

__all__ = [
    'CTNetError',
    'ConfigurationError',
    'DatasetFormatError',
    'DivergenceError',
    'IntegrationError',
    'ScheduleExhaustedError',
    'StepBudgetError',
    'SolverConfig',
    'SolverStats',
    'integrate',
    'tsit5_step',
    'PresentationSchedule',
    'ScheduleParams',
    'dither_labels',
    'presentation_order',
    'Dataset',
    'load_mnist_7x7',
    'make_circles',
    'NetworkState',
    'StateLayout',
    'RoutingStrategy',
    'alignment_metrics',
    'route_errors',
    'ContinuousNetwork',
    'NetworkConfig',
    'dynamics_rhs',
    'evaluate',
    'quasi_static_update',
    'TimingScenario',
    'closed_form_update',
    'kernel_curve',
    'overlap_budget',
    'plasticity_threshold',
    'triangular_limit',
    'BaselineConfig',
    'BaselineMLP',
    'train_baseline',
    'ExperimentConfig',
    'ExperimentRunner',
    'RunRecord',
    'compare_with_baseline',
    'run_single',
    'run_sweep',
    'RecordWriter',
]
