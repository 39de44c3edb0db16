"""
Routage de l'erreur : lien rigide (limite SGD), FA, DFA et Kolen–Pollack
"""

import logging
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from .activations import get_activation
from .errors import ConfigurationError
from .metrics import cosine_similarity
from .state import NetworkState, equilibrium_activities

logger = logging.getLogger(__name__)

RoutingKind = Literal['tied', 'fa', 'dfa', 'kp']
ErrorSource = Literal['layerwise', 'direct']

# Source d'erreur imposée par type de routage (None : libre)
_FORCED_SOURCE = {'tied': 'layerwise', 'fa': 'layerwise', 'dfa': 'direct', 'kp': None}
_TRAINABLE_V = {'tied': False, 'fa': False, 'dfa': False, 'kp': True}


class RoutingStrategy(BaseModel):
    """
    Règle de production des signaux d'erreur ε_l et contraintes sur V

    - tied : V_l = W_{l+1}ᵀ (limite rétropropagation)
    - fa   : V fixes, erreur transmise couche par couche
    - dfa  : V fixes, erreur de sortie diffusée à toutes les couches
    - kp   : V plastiques ; `error_source='direct'` donne le routage direct à V appris
    """

    model_config = ConfigDict(frozen=True, extra='forbid')

    kind: RoutingKind = 'kp'
    error_source: ErrorSource = 'layerwise'
    v_trainable: bool = True

    def __init__(self, kind: Optional[RoutingKind] = None, /, **data: Any) -> None:
        if kind is not None:
            data['kind'] = kind
        super().__init__(**data)

    @model_validator(mode='before')
    @classmethod
    def _resolve_defaults(cls, data: Any) -> Any:
        if isinstance(data, str):
            data = {'kind': data}
        if not isinstance(data, dict):
            return data
        data = dict(data)
        kind = data.get('kind', 'kp')
        forced = _FORCED_SOURCE.get(kind)
        if forced is not None:
            if data.get('error_source', forced) != forced:
                raise ValueError(f"Le routage '{kind}' impose error_source='{forced}'")
            data['error_source'] = forced
        trainable = _TRAINABLE_V.get(kind, True)
        if data.get('v_trainable', trainable) != trainable:
            raise ValueError(f"Le routage '{kind}' impose v_trainable={trainable}")
        data['v_trainable'] = trainable
        return data

    @property
    def is_direct(self) -> bool:
        return self.error_source == 'direct'

    def source_widths(self, layer_widths: Sequence[int]) -> List[int]:
        """d_src(l) pour l = 1..L : largeur du signal d'erreur reçu par chaque couche"""
        widths = list(layer_widths)
        L = len(widths) - 1
        out = widths[-1]
        if self.is_direct:
            return [out] * L
        return [widths[i + 2] if i < L - 1 else out for i in range(L)]


def propagate(strategy: RoutingStrategy,
              W: Sequence[np.ndarray],
              V: Sequence[np.ndarray],
              e_L: np.ndarray,
              gates: Optional[Sequence[np.ndarray]] = None) -> Tuple[List[np.ndarray], List[np.ndarray]]:
    """
    Calcule les erreurs routées ε_l et les commandes modulatrices m_l = V_l ε_l

    Args:
        strategy: Stratégie de routage
        W, V: Poids avant et de retour par couche (indice l-1)
        e_L: Erreur de la couche de sortie
        gates: Facteurs σ'(pre_l) multipliant m_l (optionnel)

    Returns:
        (ε, m), listes indexées comme W
    """
    L = len(W)
    eps: List[np.ndarray] = [None] * L
    mod: List[np.ndarray] = [None] * L

    # V_L est l'identité : la sortie reçoit e_L directement
    eps[L - 1] = e_L
    mod[L - 1] = e_L * gates[L - 1] if gates is not None else e_L
    for i in range(L - 2, -1, -1):
        if strategy.is_direct:
            eps[i] = e_L
        else:
            eps[i] = mod[i + 1]
        feedback = W[i + 1].T if strategy.kind == 'tied' else V[i]
        m = feedback @ eps[i]
        mod[i] = m * gates[i] if gates is not None else m
    return eps, mod


def route_errors(strategy: RoutingStrategy, state: NetworkState, e_L: np.ndarray) -> List[np.ndarray]:
    """ε_l pour chaque couche, calculés à partir de l'état courant"""
    e_L = np.asarray(e_L, dtype=float)
    if e_L.shape != state.z[-1].shape:
        raise ConfigurationError(
            f"Erreur de sortie de forme {e_L.shape}, attendu {state.z[-1].shape}"
        )
    eps, _ = propagate(strategy, state.W, state.V, e_L)
    return eps


def effective_feedback(strategy: RoutingStrategy, W: Sequence[np.ndarray],
                       V: Sequence[np.ndarray], index: int) -> np.ndarray:
    """Matrice de retour effectivement utilisée par la couche `index` (indice l-1)"""
    if index == len(W) - 1:
        return V[index]
    return W[index + 1].T if strategy.kind == 'tied' else V[index]


def initial_feedback(strategy: RoutingStrategy, W: Sequence[np.ndarray],
                     v_shapes: Sequence[Tuple[int, int]], mode: str, value: float,
                     scale: float, rng: np.random.Generator) -> List[np.ndarray]:
    """Valeurs initiales de V ; V_L = identité"""
    V = []
    for i, shape in enumerate(v_shapes):
        if i == len(v_shapes) - 1:
            V.append(np.eye(shape[0], shape[1]))
        elif strategy.kind == 'tied':
            V.append(W[i + 1].T.copy())
        elif mode == 'random':
            V.append(rng.normal(0.0, scale / np.sqrt(shape[1]), size=shape))
        else:
            V.append(np.full(shape, float(value)))
    return V


def apply_constraints(strategy: RoutingStrategy, state: NetworkState,
                      reference_V: Optional[Sequence[np.ndarray]] = None) -> NetworkState:
    """
    Applique les contraintes de V entre deux pas (modifie `state` en place)

    tied : V_l ← W_{l+1}ᵀ ; fa/dfa : V ← valeurs initiales ; kp : rien.
    """
    L = len(state.W)
    if strategy.kind == 'tied':
        for i in range(L - 1):
            state.V[i][...] = state.W[i + 1].T
    elif strategy.kind in ('fa', 'dfa'):
        if reference_V is None:
            raise ConfigurationError(f"Routage '{strategy.kind}' : V de référence manquant")
        for i in range(L - 1):
            state.V[i][...] = reference_V[i]
    state.V[L - 1][...] = np.eye(*state.V[L - 1].shape)
    return state


def _alignment_target(strategy: RoutingStrategy, W: Sequence[np.ndarray], index: int) -> np.ndarray:
    # routage couche par couche : W_{l+1}ᵀ ; routage direct : (W_L ... W_{l+1})ᵀ
    if not strategy.is_direct:
        return W[index + 1].T
    chain = W[-1]
    for j in range(len(W) - 2, index, -1):
        chain = chain @ W[j]
    return chain.T


def alignment_metrics(strategy: RoutingStrategy,
                      state: NetworkState,
                      activations: Sequence[str],
                      bias_unit: bool = False,
                      inputs: Optional[np.ndarray] = None,
                      errors: Optional[np.ndarray] = None,
                      seed: int = 0,
                      num_draws: int = 16,
                      sigma_prime_gate: bool = False) -> Dict[str, List[Optional[float]]]:
    """
    Alignements par couche cachée

    - 'v_w' : cosinus entre V_l et la transposée des poids avant qui lui correspond
    - 'gradient' : cosinus entre la mise à jour quasi statique de la stratégie et
      celle du lien rigide sur le même état, sommées sur des tirages. Les deux
      suivent `sigma_prime_gate` : sans facteur σ' la référence n'est le gradient
      exact que pour des couches linéaires.

    Une norme nulle donne None (alignement absent, pas 0).
    """
    L = len(state.W)
    if L < 2:
        raise ConfigurationError("L'alignement exige au moins une couche cachée")

    v_w = [cosine_similarity(effective_feedback(strategy, state.W, state.V, i),
                             _alignment_target(strategy, state.W, i)) for i in range(L - 1)]

    rng = np.random.default_rng(seed)
    if inputs is None:
        d_in = state.W[0].shape[1] - (1 if bias_unit else 0)
        inputs = rng.standard_normal((num_draws, d_in))
    if errors is None:
        errors = rng.standard_normal((len(inputs), state.W[-1].shape[0]))

    primes = [get_activation(name)[1] for name in activations]
    reference = RoutingStrategy(kind='tied')

    routed = [np.zeros_like(w) for w in state.W]
    tied = [np.zeros_like(w) for w in state.W]
    for x, e in zip(inputs, errors):
        pres, zs = equilibrium_activities(state.W, activations, x, bias_unit)
        prevs = [np.append(x, 1.0) if bias_unit else np.asarray(x, dtype=float)] + zs[:-1]
        gates = [p(pre) for p, pre in zip(primes, pres)] if sigma_prime_gate else None
        _, m_rule = propagate(strategy, state.W, state.V, e, gates)
        _, m_true = propagate(reference, state.W, state.V, e, gates)
        for i in range(L):
            routed[i] += np.outer(m_rule[i], prevs[i])
            tied[i] += np.outer(m_true[i], prevs[i])

    gradient = [cosine_similarity(routed[i], tied[i]) for i in range(L - 1)]
    return {'v_w': v_w, 'gradient': gradient}
