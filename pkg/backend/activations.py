"""
Fonctions d'activation et leurs dérivées
"""

from typing import Callable, Dict, Tuple

import numpy as np


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def relu_prime(x: np.ndarray) -> np.ndarray:
    return (x > 0).astype(float)


def linear(x: np.ndarray) -> np.ndarray:
    return x


def linear_prime(x: np.ndarray) -> np.ndarray:
    return np.ones_like(x)


ACTIVATIONS: Dict[str, Tuple[Callable, Callable]] = {
    'relu': (relu, relu_prime),
    'linear': (linear, linear_prime),
}


def get_activation(name: str) -> Tuple[Callable, Callable]:
    """Retourne (sigma, sigma') pour un identifiant d'activation"""
    if name not in ACTIVATIONS:
        raise ValueError(f"Activation '{name}' non reconnue (choix : {', '.join(ACTIVATIONS)})")
    return ACTIVATIONS[name]
