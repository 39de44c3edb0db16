"""
Préréglages d'expériences (budgets réduits, exécutables sur un poste de travail)
"""

from typing import Any, Dict

from backend.config_loader import build_experiment_config, deep_merge
from backend.errors import ConfigurationError
from backend.experiment_runner import ExperimentConfig

T = 0.05

_MNIST_1H = {
    'dataset': {'name': 'mnist7x7'},
    'network': {'layer_widths': [49, 49, 10]},
    'schedule': {'sample_time': T},
    'num_samples': 5000,
    'eval': {'test_size': 500, 'eval_every': 1000},
}

_MNIST_2H = deep_merge(_MNIST_1H, {'network': {'layer_widths': [49, 49, 32, 10]}})

_CIRCLES = {
    'dataset': {'name': 'circles', 'n_train': 2000, 'n_test': 500},
    'network': {'bias_unit': True},
    'schedule': {'sample_time': T},
    'eval': {'test_size': 500, 'eval_every': 500},
}

_DIRECT = {'network': {'routing': {'kind': 'kp', 'error_source': 'direct'}}}
_LAYERWISE = {'network': {'routing': {'kind': 'kp', 'error_source': 'layerwise'}}}

_DELAY_SWEEP = {
    'num_samples': 3000,
    'repeats': 3,
    'sweep': {'axes': [
        {'parameter': 'delay', 'values': [-0.075, -0.05, -0.025, 0.0, 0.025, 0.05, 0.075]},
        {'parameter': 'sample_time', 'values': [0.01, 0.025, 0.05, 0.1, 0.25]},
    ]},
}

_TAU_GRID = {
    'num_samples': 3000,
    'repeats': 3,
    'sweep': {'axes': [
        {'parameter': 'tau_prop', 'values': [0.001, 0.005, 0.01, 0.02, 0.05]},
        {'parameter': 'tau_plas', 'values': [0.1, 0.5, 1.45, 2.0, 5.0, 10.0]},
    ]},
}


EXPERIMENT_PRESETS: Dict[str, Dict[str, Any]] = {
    # routage direct à V appris, Δ = 0 : apprentissage réussi
    'mnist-direct': deep_merge(deep_merge(_MNIST_1H, _DIRECT), {
        'name': 'mnist-direct',
    }),
    # même montage, Δ = 1.5 T : aucun recouvrement, précision au hasard
    'mnist-direct-late': deep_merge(deep_merge(_MNIST_1H, _DIRECT), {
        'name': 'mnist-direct-late',
        'schedule': {'delay': 1.5 * T},
    }),
    # carte retard × durée d'échantillon, routage direct (1 puis 2 couches cachées)
    'mnist-delay-sweep': deep_merge(deep_merge(_MNIST_1H, _DIRECT), {
        'name': 'mnist-delay-sweep', **_DELAY_SWEEP,
    }),
    'mnist-2h-delay-sweep': deep_merge(deep_merge(_MNIST_2H, _DIRECT), {
        'name': 'mnist-2h-delay-sweep', **_DELAY_SWEEP,
    }),
    # seuil de plasticité : τ_plas balayé à T = 50 ms, routage couche par couche
    'tau-plas-threshold': deep_merge(deep_merge(_MNIST_1H, _LAYERWISE), {
        'name': 'tau-plas-threshold',
        'repeats': 3,
        'sweep': {'axes': [{'parameter': 'tau_plas', 'values': [0.1, 0.5, 2.0, 10.0]}]},
    }),
    # grille τ_prop × τ_plas (1 puis 2 couches cachées)
    'tau-grid': deep_merge(deep_merge(_MNIST_1H, _LAYERWISE), {
        'name': 'tau-grid', **_TAU_GRID,
    }),
    'tau-grid-2h': deep_merge(deep_merge(_MNIST_2H, _LAYERWISE), {
        'name': 'tau-grid-2h', **_TAU_GRID,
    }),
    # alignement Kolen–Pollack sur les cercles
    'circles-kp-alignment': deep_merge(deep_merge(_CIRCLES, _LAYERWISE), {
        'name': 'circles-kp-alignment',
        'network': {'layer_widths': [2, 24, 2]},
        'num_samples': 4000,
        'repeats': 3,
        'eval': {'checkpoint_every': 200},
    }),
    # fragilité en profondeur : 1 à 3 couches cachées, Δ = T/2
    'circles-depth': deep_merge(deep_merge(_CIRCLES, _LAYERWISE), {
        'name': 'circles-depth',
        'network': {'layer_widths': [2, 24, 2]},
        'num_samples': 4000,
        'repeats': 3,
        'sweep': {
            'axes': [
                {'parameter': 'hidden_layers', 'values': [1, 2, 3]},
                {'parameter': 'sample_time', 'values': [0.025, 0.05, 0.1, 0.2]},
            ],
            'fixed': {'delay_ratio': 0.5},
        },
    }),
    # comparaisons à la référence discrète
    'circles-baseline': deep_merge(deep_merge(_CIRCLES, _LAYERWISE), {
        'name': 'circles-baseline',
        'network': {'layer_widths': [2, 24, 24, 2]},
        'num_samples': 4000,
        'repeats': 3,
    }),
    'mnist-baseline': deep_merge(deep_merge(_MNIST_1H, _LAYERWISE), {
        'name': 'mnist-baseline',
        'repeats': 3,
    }),
    'mnist-2h-baseline': deep_merge(deep_merge(_MNIST_2H, _LAYERWISE), {
        'name': 'mnist-2h-baseline',
        'repeats': 3,
    }),
}


def preset_values(name: str) -> Dict[str, Any]:
    """Valeurs brutes d'un préréglage (à fusionner avec un fichier ou des surcharges)"""
    if name not in EXPERIMENT_PRESETS:
        raise ConfigurationError(
            f"Préréglage '{name}' inconnu (choix : {', '.join(sorted(EXPERIMENT_PRESETS))})"
        )
    return EXPERIMENT_PRESETS[name]


def build_preset(name: str, **overrides: Any) -> ExperimentConfig:
    """Construit la configuration d'un préréglage, avec surcharges de premier niveau"""
    return build_experiment_config(preset_values(name), overrides)
