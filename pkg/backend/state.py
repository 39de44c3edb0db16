"""
État plat du réseau : activités z, poids avant W, poids de retour V
"""

from dataclasses import dataclass
from functools import cached_property
from typing import List, Sequence, Tuple

import numpy as np

from .activations import get_activation


@dataclass(frozen=True)
class StateLayout:
    """
    Disposition du vecteur d'état

    Ordre : [z_1..z_L, vec(W_1)..vec(W_L), vec(V_1)..vec(V_L)], matrices en
    ordre ligne (C). La couche l (1..L) est rangée à l'indice l-1.
    """
    z_shapes: Tuple[Tuple[int], ...]
    w_shapes: Tuple[Tuple[int, int], ...]
    v_shapes: Tuple[Tuple[int, int], ...]

    @classmethod
    def build(cls, layer_widths: Sequence[int], source_widths: Sequence[int],
              bias_unit: bool = False) -> 'StateLayout':
        widths = list(layer_widths)
        fan_in = [widths[0] + (1 if bias_unit else 0)] + widths[1:-1]
        return cls(
            z_shapes=tuple((d,) for d in widths[1:]),
            w_shapes=tuple((d_out, d_in) for d_out, d_in in zip(widths[1:], fan_in)),
            v_shapes=tuple((d, s) for d, s in zip(widths[1:], source_widths)),
        )

    @property
    def num_layers(self) -> int:
        return len(self.z_shapes)

    @cached_property
    def offsets(self) -> List[int]:
        sizes = [int(np.prod(s)) for s in self.z_shapes + self.w_shapes + self.v_shapes]
        return [int(v) for v in np.cumsum([0] + sizes)]

    @cached_property
    def size(self) -> int:
        return self.offsets[-1]

    @property
    def z_size(self) -> int:
        return sum(s[0] for s in self.z_shapes)

    def views(self, vector: np.ndarray) -> Tuple[List[np.ndarray], List[np.ndarray], List[np.ndarray]]:
        """Découpe un vecteur d'état en vues (sans copie)"""
        offsets = self.offsets
        shapes = self.z_shapes + self.w_shapes + self.v_shapes
        blocks = [vector[offsets[k]:offsets[k + 1]].reshape(shape) for k, shape in enumerate(shapes)]
        L = self.num_layers
        return blocks[:L], blocks[L:2 * L], blocks[2 * L:]


@dataclass
class NetworkState:
    """Instantané de l'état du réseau à l'instant t"""
    t: float
    z: List[np.ndarray]
    W: List[np.ndarray]
    V: List[np.ndarray]
    layout: StateLayout

    def flatten(self) -> np.ndarray:
        return np.concatenate([a.ravel() for a in self.z + self.W + self.V])

    @classmethod
    def unflatten(cls, layout: StateLayout, vector: np.ndarray, t: float = 0.0) -> 'NetworkState':
        vector = np.array(vector, dtype=float, copy=True).reshape(-1)
        if vector.size != layout.size:
            raise ValueError(f"Vecteur d'état de taille {vector.size}, attendu {layout.size}")
        z, W, V = layout.views(vector)
        return cls(float(t), z, W, V, layout)

    def copy(self) -> 'NetworkState':
        return NetworkState.unflatten(self.layout, self.flatten(), self.t)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.flatten())))


def equilibrium_activities(W: Sequence[np.ndarray], activations: Sequence[str],
                           x: np.ndarray, bias_unit: bool = False) -> Tuple[List[np.ndarray], List[np.ndarray]]:
    """
    Point fixe des activités pour une entrée constante : z_l = σ_l(W_l z_{l-1})

    Returns:
        (pré-activations, activités) par couche
    """
    prev = np.append(x, 1.0) if bias_unit else np.asarray(x, dtype=float)
    pres, zs = [], []
    for W_l, name in zip(W, activations):
        sigma, _ = get_activation(name)
        pre = W_l @ prev
        prev = sigma(pre)
        pres.append(pre)
        zs.append(prev)
    return pres, zs
