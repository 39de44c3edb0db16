import os
import re

import numpy as np
import pytest

from backend.datasets import Dataset, MNIST_FILES
from backend.errors import ConfigurationError, StepBudgetError
from backend.experiment_runner import (DatasetRef, ExperimentConfig, ExperimentRunner, RunRecord,
                                       SolverStatsRecord, compare_with_baseline, decode_record, encode_record,
                                       run_single, run_sweep, summarize_sweep, sweep_jobs, with_parameters)
from backend.ode_engine import SolverConfig
from config import Config, TestingConfig


def with_sweep(cfg, sweep, **extra):
    return ExperimentConfig.model_validate({**cfg.model_dump(), 'sweep': sweep, **extra})


# ============================================================================
# EXÉCUTION UNIQUE
# ============================================================================

def test_no_training_gives_single_checkpoint(tiny_circles_config):
    record = run_single(tiny_circles_config.model_copy(update={'num_samples': 0}))
    assert record.status == 'ok'
    assert len(record.checkpoints) == 1
    first = record.checkpoints[0]
    assert first.sample == 0 and first.train_accuracy is None
    assert 0.0 <= first.test_accuracy <= 1.0
    assert record.final_test_accuracy == first.test_accuracy


def test_run_record_fields(tiny_circles_config):
    outcome = ExperimentRunner(tiny_circles_config).run()
    record = outcome.record
    assert outcome.failure is None
    assert re.fullmatch(r'[0-9a-f]{64}', record.config_hash)
    assert [c.sample for c in record.checkpoints] == [0, 20, 40]
    times = [c.sim_time for c in record.checkpoints]
    assert times == sorted(times) and times[0] == 0.0 and times[-1] > 0.0
    for c in record.checkpoints[1:]:
        assert 0.0 <= c.train_accuracy <= 1.0
        assert 0.0 <= c.test_accuracy <= 1.0
        assert len(c.weight_norms_W) == 2 and len(c.alignment_v_w) == 1
    assert record.solver.accepted > 0
    assert record.solver.steps == record.solver.accepted + record.solver.rejected
    assert record.dataset['name'] == 'circles' and record.dataset['test_size'] == 10
    assert outcome.state.is_finite()
    assert decode_record(encode_record(record)) == record


def test_runs_are_reproducible(tiny_circles_config):
    a = run_single(tiny_circles_config)
    b = run_single(tiny_circles_config)
    assert a.checkpoints == b.checkpoints
    assert a.final_test_accuracy == b.final_test_accuracy


def test_step_budget_failure_is_recorded(tiny_circles_config):
    cfg = tiny_circles_config.model_copy(update={'solver': SolverConfig(max_steps=5)})
    outcome = ExperimentRunner(cfg).run()
    assert outcome.record.status == 'failed'
    assert isinstance(outcome.failure, StepBudgetError)
    assert outcome.record.final_test_accuracy is None
    assert 'Budget' in outcome.record.error


@pytest.mark.parametrize('routing', ['tied', 'fa', 'dfa'])
def test_constrained_routings_run(tiny_circles_config, routing):
    data = tiny_circles_config.model_dump()
    data['network']['routing'] = {'kind': routing}
    outcome = ExperimentRunner(ExperimentConfig.model_validate(data)).run()
    assert outcome.record.status == 'ok'
    if routing == 'tied':
        np.testing.assert_array_equal(outcome.state.V[0], outcome.state.W[1].T)


def test_trace_windows_collect_rows(tiny_circles_config):
    data = tiny_circles_config.model_dump()
    data['eval']['trace_windows'] = [[0.0, 0.2]]
    outcome = ExperimentRunner(ExperimentConfig.model_validate(data)).run()
    frame = outcome.traces_frame()
    assert len(frame) > 0
    assert frame['t'].between(0.0, 0.2).all()
    assert {'z_out_0', 'z_out_1', 'w_norm_1', 'w_norm_2'} <= set(frame.columns)


def test_empty_test_set_rejected(tiny_circles_config):
    train, _ = tiny_circles_config.dataset.load()
    empty = Dataset(np.zeros((0, 2)), np.zeros(0, dtype=int), 2)
    with pytest.raises(ConfigurationError):
        ExperimentRunner(tiny_circles_config, train, empty)


def test_config_hash_ignores_output_dir(tiny_circles_config):
    moved = tiny_circles_config.model_copy(update={'output_dir': '/elsewhere'})
    assert moved.config_hash() == tiny_circles_config.config_hash()
    reseeded = tiny_circles_config.model_copy(update={'seed': 9})
    assert reseeded.config_hash() != tiny_circles_config.config_hash()


def test_dataset_dimensions_must_match_network():
    with pytest.raises(ValueError):
        ExperimentConfig.model_validate({'dataset': {'name': 'circles'},
                                         'network': {'layer_widths': [49, 10, 10]}})


# ============================================================================
# CACHE DES CERCLES
# ============================================================================

def test_circles_cache_follows_generation_parameters(tmp_path):
    small = DatasetRef(name='circles', path=str(tmp_path), n_train=40, n_test=20)
    train, _ = small.load()
    assert len(train) == 40

    larger, _ = DatasetRef(name='circles', path=str(tmp_path), n_train=200, n_test=20).load()
    assert len(larger) == 200
    noisy, _ = DatasetRef(name='circles', path=str(tmp_path), n_train=40, n_test=20,
                          noise_std=0.2).load()
    assert not np.allclose(noisy.inputs, train.inputs)
    assert len(list(tmp_path.glob('circles_*_train.csv'))) == 3

    again, _ = small.load()
    np.testing.assert_allclose(again.inputs, train.inputs)


def test_train_limit_applies_to_cached_circles(tmp_path):
    full = DatasetRef(name='circles', path=str(tmp_path), n_train=200, n_test=20)
    full.load()
    limited, test = DatasetRef(name='circles', path=str(tmp_path), n_train=200, n_test=20,
                               train_limit=5).load()
    assert len(limited) == 5
    assert len(test) == 20
    assert len(list(tmp_path.glob('circles_*_train.csv'))) == 1


def test_circles_cache_uses_profile_folder(tmp_path, monkeypatch):
    monkeypatch.setenv('CTNET_ENV', 'testing')
    monkeypatch.setattr(TestingConfig, 'CACHE_DIR', str(tmp_path / 'cache'))
    ref = DatasetRef(name='circles', n_train=40, n_test=20, cache=True)
    assert ref.cache_dir == str(tmp_path / 'cache')
    ref.load()
    assert (tmp_path / 'cache' / f'circles_{ref.circles_key()}_train.csv').exists()
    assert DatasetRef(name='circles', n_train=40, n_test=20).cache_dir is None


# ============================================================================
# PARAMÈTRES DE BALAYAGE
# ============================================================================

def test_delay_ratio_uses_cell_sample_time(tiny_circles_config):
    cfg = with_parameters(tiny_circles_config, [('delay_ratio', 0.5), ('sample_time', 0.02)])
    assert cfg.schedule.sample_time == 0.02
    assert cfg.schedule.delay == pytest.approx(0.01)


def test_compound_parameters(tiny_circles_config):
    deeper = with_parameters(tiny_circles_config, [('hidden_layers', 2)])
    assert deeper.network.layer_widths == (2, 8, 8, 2)
    slow = with_parameters(tiny_circles_config, [('tau_plas', 5.0), ('tau_dec', 500.0)])
    assert (slow.network.tau_plas_W, slow.network.tau_plas_V) == (5.0, 5.0)
    assert (slow.network.tau_dec_W, slow.network.tau_dec_V) == (500.0, 500.0)
    assert with_parameters(tiny_circles_config, [('num_samples', 12.0)]).num_samples == 12


@pytest.mark.parametrize('assignment', [('sample_time', -1.0), ('hidden_layers', 1.5),
                                        ('unknown', 1.0), ('buffer_time', 1.0)])
def test_invalid_sweep_values_rejected(tiny_circles_config, assignment):
    with pytest.raises(ConfigurationError):
        with_parameters(tiny_circles_config, [assignment])


def test_invalid_sweep_rejected_at_load(tiny_circles_config):
    with pytest.raises(ValueError):
        with_sweep(tiny_circles_config, {'axes': [{'parameter': 'sample_time', 'values': [0.05, -0.01]}]})
    with pytest.raises(ValueError):
        with_sweep(tiny_circles_config, {'axes': [{'parameter': 'delay', 'values': [0.0]}] * 2})


def test_sweep_jobs_seed_repeats(tiny_circles_config):
    cfg = with_sweep(tiny_circles_config,
                     {'axes': [{'parameter': 'delay', 'values': [0.0, 0.01]},
                               {'parameter': 'tau_plas', 'values': [5.0, 10.0, 20.0]}],
                      'fixed': {'sample_time': 0.04}},
                     repeats=2, seed=7)
    jobs = sweep_jobs(cfg)
    assert len(jobs) == 12
    assert [job.seed for job, _ in jobs[:2]] == [7, 8]
    assert all(job.schedule.sample_time == 0.04 for job, _ in jobs)
    assert jobs[-1][1] == {'delay': 0.01, 'tau_plas': 20.0}


def test_summary_counts_failures():
    def record(delay, status, acc):
        return RunRecord(config_hash='0' * 64, name='x', seed=0, status=status, checkpoints=[],
                         solver=SolverStatsRecord(), wall_time=0.0, final_test_accuracy=acc,
                         parameters={'delay': delay})

    table = summarize_sweep([record(0.01, 'ok', 0.6), record(0.0, 'ok', 0.8), record(0.0, 'ok', 0.6),
                             record(0.01, 'failed', None)], ['delay'])
    assert list(table['delay']) == [0.0, 0.01]
    assert list(table['n']) == [2, 1]
    assert list(table['n_failed']) == [0, 1]
    assert table.loc[0, 'mean_accuracy'] == pytest.approx(0.7)
    assert table.loc[0, 'std_accuracy'] == pytest.approx(0.1)


def test_single_cell_sweep_matches_single_run(tiny_circles_config):
    cfg = with_sweep(tiny_circles_config, {'axes': [{'parameter': 'delay', 'values': [0.0]}]})
    result = run_sweep(cfg, workers=1, show_progress=False)
    direct = run_single(with_parameters(tiny_circles_config, [('delay', 0.0)]))
    assert len(result.records) == 1
    assert result.records[0].checkpoints == direct.checkpoints
    assert result.records[0].parameters == {'delay': 0.0}
    assert result.table.loc[0, 'mean_accuracy'] == pytest.approx(direct.final_test_accuracy)


def test_failed_cells_do_not_stop_sweep(tiny_circles_config):
    cfg = with_sweep(tiny_circles_config, {'axes': [{'parameter': 'num_samples', 'values': [0, 20]}]},
                     solver={'max_steps': 400})
    result = run_sweep(cfg, workers=1, show_progress=False)
    assert len(result.records) == 2
    assert int(result.table['n'].sum() + result.table['n_failed'].sum()) == 2


def test_sweep_defaults_follow_testing_profile(tiny_circles_config, monkeypatch):
    monkeypatch.setenv('CTNET_ENV', 'testing')

    def no_pool(*args, **kwargs):
        raise AssertionError("le profil de test impose un seul processus")

    monkeypatch.setattr('backend.experiment_runner.ProcessPoolExecutor', no_pool)
    cfg = with_sweep(tiny_circles_config.model_copy(update={'num_samples': 0}),
                     {'axes': [{'parameter': 'delay', 'values': [0.0, 0.01]}]})
    result = run_sweep(cfg)
    assert len(result.records) == 2


@pytest.mark.slow
def test_parallel_sweep_matches_serial(tiny_circles_config):
    cfg = with_sweep(tiny_circles_config, {'axes': [{'parameter': 'delay', 'values': [0.0, 0.01]}]})
    serial = run_sweep(cfg, workers=1, show_progress=False)
    parallel = run_sweep(cfg, workers=2, show_progress=False)
    assert serial.table.equals(parallel.table)
    assert [r.checkpoints for r in serial.records] == [r.checkpoints for r in parallel.records]


# ============================================================================
# COMPARAISON À LA RÉFÉRENCE
# ============================================================================

def test_comparison_table(tiny_circles_config):
    table = compare_with_baseline(tiny_circles_config.model_copy(update={'repeats': 2}))
    assert list(table['model']) == ['continuous', 'discrete']
    assert set(table.columns) >= {'train_mean', 'train_std', 'test_mean', 'test_std', 'n'}
    assert list(table['n']) == [2, 2]
    assert table['layer_widths'].iloc[0] == '2 8 2'


def test_comparison_needs_data(tiny_circles_config):
    data = tiny_circles_config.model_dump()
    data['dataset']['n_train'] = 0
    with pytest.raises(ConfigurationError):
        compare_with_baseline(ExperimentConfig.model_validate(data))


# ============================================================================
# CAMPAGNES LONGUES
# ============================================================================

@pytest.mark.slow
def test_feedback_alignment_grows_on_circles(tmp_path):
    improved = 0
    for seed in range(3):
        cfg = ExperimentConfig.model_validate({
            'dataset': {'name': 'circles', 'n_train': 400, 'n_test': 100, 'seed': seed},
            'network': {'layer_widths': [2, 16, 2], 'bias_unit': True, 'routing': 'kp'},
            'eval': {'test_size': 50, 'checkpoint_every': 200, 'eval_every': 400},
            'num_samples': 400,
            'seed': seed,
            'output_dir': str(tmp_path),
        })
        record = run_single(cfg)
        assert record.status == 'ok'
        first, last = record.checkpoints[0], record.checkpoints[-1]
        if last.alignment_v_w[0] > first.alignment_v_w[0]:
            improved += 1
    assert improved >= 2


def _mnist_available() -> bool:
    names = [MNIST_FILES['train_images'], MNIST_FILES['test_images']]
    return all(os.path.exists(os.path.join(Config.MNIST_DIR, n)) or
               os.path.exists(os.path.join(Config.MNIST_DIR, n[:-3])) for n in names)


@pytest.mark.slow
@pytest.mark.skipif(not _mnist_available(), reason="fichiers MNIST absents")
def test_mnist_late_error_degrades_learning(tmp_path):
    base = {
        'dataset': {'name': 'mnist7x7', 'train_limit': 2000},
        'network': {'layer_widths': [49, 49, 10]},
        'eval': {'test_size': 300, 'checkpoint_every': 500, 'eval_every': 2000, 'alignment': False},
        'num_samples': 2000,
        'output_dir': str(tmp_path),
    }
    aligned = run_single(ExperimentConfig.model_validate(base))
    late = run_single(ExperimentConfig.model_validate({**base, 'schedule': {'delay': 0.05}}))
    assert aligned.status == late.status == 'ok'
    assert aligned.final_test_accuracy > 0.5
    assert aligned.final_test_accuracy > late.final_test_accuracy
