import math

import pytest

from backend.config_loader import (build_experiment_config, deep_merge, load_experiment_config, nest,
                                   parse_overrides, parse_value, read_config_file)
from backend.errors import ConfigurationError
from presets import EXPERIMENT_PRESETS, build_preset, preset_values


CIRCLES = {'dataset': {'name': 'circles'}, 'network': {'layer_widths': [2, 8, 2]}}


@pytest.mark.parametrize('raw, expected', [
    ('0.5', 0.5),
    ('3', 3),
    ('[1, 2]', [1, 2]),
    ('1,2,3', [1, 2, 3]),
    ('0.1, 0.2', [0.1, 0.2]),
    ('true', True),
    ('kp', 'kp'),
    ('"quoted"', 'quoted'),
    ('{"kind": "dfa"}', {'kind': 'dfa'}),
])
def test_parse_value(raw, expected):
    assert parse_value(raw) == expected


def test_parse_value_special_cases():
    assert parse_value(None) is None
    assert math.isinf(parse_value('inf'))
    assert parse_value('  circles ') == 'circles'


def test_nest_and_merge():
    tree = nest({'network.tau_prop': 0.02, 'network.routing.kind': 'fa', 'seed': 3})
    assert tree == {'network': {'tau_prop': 0.02, 'routing': {'kind': 'fa'}}, 'seed': 3}
    merged = deep_merge({'network': {'tau_prop': 0.01, 'bias_unit': True}}, tree)
    assert merged['network'] == {'tau_prop': 0.02, 'bias_unit': True, 'routing': {'kind': 'fa'}}
    with pytest.raises(ConfigurationError):
        nest({'seed': 1, 'seed.value': 2})


def test_read_config_file(tmp_path):
    path = tmp_path / 'experiment.cfg'
    path.write_text(
        "# expérience de test\n"
        "name = fromfile\n"
        "dataset.name = circles\n"
        "network.layer_widths = 2, 8, 2\n"
        "network.tau_prop = 0.02\n"
    )
    tree = read_config_file(str(path))
    assert tree['name'] == 'fromfile'
    assert tree['network'] == {'layer_widths': [2, 8, 2], 'tau_prop': 0.02}


def test_missing_config_file():
    with pytest.raises(ConfigurationError):
        read_config_file('/nonexistent/experiment.cfg')


def test_parse_overrides():
    assert parse_overrides(['schedule.delay=0.025', 'name=x=y']) == {'schedule': {'delay': 0.025},
                                                                     'name': 'x=y'}
    with pytest.raises(ConfigurationError):
        parse_overrides(['seed'])


def test_layers_apply_in_priority_order(tmp_path):
    path = tmp_path / 'experiment.cfg'
    path.write_text("seed = 2\nnetwork.tau_prop = 0.02\nschedule.delay = 0.01\n")
    base = deep_merge(CIRCLES, {'seed': 1, 'network': {'tau_prop': 0.005}})
    cfg = load_experiment_config(str(path), base, {'seed': 3})
    assert cfg.seed == 3
    assert cfg.network.tau_prop == 0.02
    assert cfg.schedule.delay == 0.01
    assert cfg.network.layer_widths == (2, 8, 2)


@pytest.mark.parametrize('override', [
    {'network': {'tau_prop': -1.0}},
    {'network': {'routing': {'kind': 'dfa', 'error_source': 'layerwise'}}},
    {'schedule': {'buffer_time': 0.1}},
    {'num_samples': -5},
    {'unknown_section': {}},
])
def test_invalid_configs_raise_configuration_error(override):
    with pytest.raises(ConfigurationError):
        build_experiment_config(CIRCLES, override)


@pytest.mark.parametrize('name', sorted(EXPERIMENT_PRESETS))
def test_every_preset_builds(name):
    cfg = build_preset(name)
    assert cfg.name == name


def test_preset_overrides_and_unknown_preset():
    cfg = build_preset('circles-baseline', num_samples=10, seed=4)
    assert cfg.num_samples == 10 and cfg.seed == 4
    assert cfg.network.routing.kind == 'kp'
    with pytest.raises(ConfigurationError):
        preset_values('mnist-unknown')


@pytest.mark.parametrize('name', ['mnist-2h-delay-sweep', 'tau-grid-2h', 'mnist-2h-baseline'])
def test_two_hidden_layer_mnist_presets(name):
    cfg = build_preset(name)
    assert cfg.network.layer_widths == (49, 49, 32, 10)
    one_layer = build_preset(name.replace('-2h', ''))
    assert one_layer.network.layer_widths == (49, 49, 10)
    assert cfg.sweep == one_layer.sweep
    assert cfg.network.routing == one_layer.network.routing


def test_mnist_baseline_pairs_with_layerwise_routing():
    cfg = build_preset('mnist-baseline')
    assert cfg.network.routing.kind == 'kp'
    assert cfg.network.routing.error_source == 'layerwise'
