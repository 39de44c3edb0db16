"""
Métriques partagées : similarités, normes, précision glissante
"""

from typing import List, Optional, Sequence

import numpy as np


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> Optional[float]:
    """Cosinus entre deux tableaux aplatis ; None si l'un est de norme nulle"""
    a = np.ravel(a)
    b = np.ravel(b)
    if a.shape != b.shape:
        return None
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return None
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


def weight_norms(matrices: Sequence[np.ndarray]) -> List[float]:
    """Norme de Frobenius de chaque matrice"""
    return [float(np.linalg.norm(m)) for m in matrices]


class MovingAccuracy:
    """Moyenne glissante exponentielle des prédictions correctes/incorrectes"""

    def __init__(self, window: int = 100):
        if window < 1:
            raise ValueError("La fenêtre de moyenne glissante doit être >= 1")
        self.window = window
        self.alpha = 1.0 / window
        self.value = None
        self.count = 0

    def update(self, correct: bool) -> float:
        hit = 1.0 if correct else 0.0
        self.count += 1
        if self.value is None:
            self.value = hit
        elif self.count <= self.window:
            # moyenne arithmétique tant que la fenêtre n'est pas remplie
            self.value += (hit - self.value) / self.count
        else:
            self.value += self.alpha * (hit - self.value)
        return self.value

    @property
    def accuracy(self) -> Optional[float]:
        return self.value
