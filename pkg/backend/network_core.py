"""
Réseau en temps continu : inférence et apprentissage comme un seul système d'EDO couplées

    ż_l = (−z_l + σ_l(W_l z_{l−1})) / τ_prop
    Ẇ_l = −W_l / τ^W_dec + m_l z_{l−1}ᵀ / τ^W_plas,      m_l = V_l ε_l
    V̇_l = −V_l / τ^V_dec + (W_l z_{l−1}) ε_lᵀ / τ^V_plas

Le signal d'enseignement de sortie est e_L = y − z_L (direction de descente
de la perte quadratique), de sorte que les termes de plasticité positifs apprennent.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from config import Config
from .activations import ACTIVATIONS, get_activation
from .error_routing import RoutingStrategy, apply_constraints, initial_feedback, propagate
from .errors import ConfigurationError
from .ode_engine import SolverConfig, SolverStats, StepOutcome, integrate
from .presentation import PresentationSchedule
from .state import NetworkState, StateLayout, equilibrium_activities

logger = logging.getLogger(__name__)

Signal = Callable[[float], np.ndarray]


class InitW(BaseModel):
    """Initialisation des poids avant (normale de Xavier)"""
    model_config = ConfigDict(frozen=True, extra='forbid')

    scheme: Literal['xavier_normal'] = 'xavier_normal'
    gain: float = Field(1.0, gt=0)
    seed: int = 0


class InitV(BaseModel):
    """Initialisation des poids de retour : constante (0.1 par défaut) ou aléatoire"""
    model_config = ConfigDict(frozen=True, extra='forbid')

    mode: Literal['constant', 'random'] = 'constant'
    value: float = Config.V_INIT
    scale: float = Field(1.0, gt=0)


class NetworkConfig(BaseModel):
    """Architecture, constantes de temps et routage d'un réseau"""

    model_config = ConfigDict(frozen=True, extra='forbid', ser_json_inf_nan='constants')

    layer_widths: Tuple[int, ...] = (49, 49, 10)
    activations: Optional[Tuple[str, ...]] = None
    tau_prop: float = Field(Config.TAU_PROP, gt=0)
    tau_plas_W: float = Field(Config.TAU_PLAS, gt=0)
    tau_plas_V: float = Field(Config.TAU_PLAS, gt=0)
    tau_dec_W: float = Field(Config.TAU_DEC, gt=0)
    tau_dec_V: float = Field(Config.TAU_DEC, gt=0)
    routing: RoutingStrategy = RoutingStrategy()
    init_W: InitW = InitW()
    init_V: InitV = InitV()
    noise_std: float = Field(0.0, ge=0)
    noise_bin: float = Field(1e-3, gt=0)
    noise_seed: int = Field(0, ge=0)
    sigma_prime_gate: bool = False
    bias_unit: bool = False

    @field_validator('layer_widths')
    @classmethod
    def _check_widths(cls, widths):
        if len(widths) < 2:
            raise ValueError("Il faut au moins une couche d'entrée et une couche de sortie")
        if any(w < 1 for w in widths):
            raise ValueError(f"Largeurs de couche invalides : {widths}")
        return widths

    @model_validator(mode='after')
    def _check_network(self):
        L = len(self.layer_widths) - 1
        if self.activations is not None:
            if len(self.activations) != L:
                raise ValueError(f"{len(self.activations)} activations pour {L} couches")
            unknown = [a for a in self.activations if a not in ACTIVATIONS]
            if unknown:
                raise ValueError(f"Activations inconnues : {unknown}")

        # ordre τ_prop < τ_plas < τ_dec : averti, jamais interdit (balayages de constantes)
        plas = min(self.tau_plas_W, self.tau_plas_V)
        if not (self.tau_prop < plas and max(self.tau_plas_W, self.tau_plas_V)
                < min(self.tau_dec_W, self.tau_dec_V)):
            logger.warning("⚠️ Séparation des échelles de temps non respectée "
                           "(τ_prop=%g, τ_plas=(%g, %g), τ_dec=(%g, %g))",
                           self.tau_prop, self.tau_plas_W, self.tau_plas_V,
                           self.tau_dec_W, self.tau_dec_V)
        return self

    @property
    def num_layers(self) -> int:
        return len(self.layer_widths) - 1

    @property
    def resolved_activations(self) -> Tuple[str, ...]:
        """ReLU sur les couches cachées, sortie linéaire, sauf indication contraire"""
        if self.activations is not None:
            return self.activations
        return ('relu',) * (self.num_layers - 1) + ('linear',)

    def layout(self) -> StateLayout:
        return StateLayout.build(self.layer_widths, self.routing.source_widths(self.layer_widths),
                                 self.bias_unit)


@dataclass(frozen=True)
class NeuronConstants:
    """Constantes d'un neurone isolé"""
    tau_prop: float = Config.TAU_PROP
    tau_plas_W: float = Config.TAU_PLAS
    tau_plas_V: float = Config.TAU_PLAS
    tau_dec_W: float = Config.TAU_DEC
    tau_dec_V: float = Config.TAU_DEC
    activation: str = 'linear'

    @classmethod
    def from_config(cls, cfg: NetworkConfig, layer_index: int) -> 'NeuronConstants':
        return cls(cfg.tau_prop, cfg.tau_plas_W, cfg.tau_plas_V, cfg.tau_dec_W, cfg.tau_dec_V,
                   cfg.resolved_activations[layer_index])


@dataclass
class EvaluationResult:
    """Résultat d'une évaluation à dynamique figée"""
    accuracy: float
    predictions: np.ndarray
    labels: np.ndarray
    final_z: np.ndarray


def per_neuron_rhs(w: np.ndarray, v: np.ndarray, x: np.ndarray, e: np.ndarray, z: float,
                   constants: NeuronConstants = NeuronConstants()) -> Tuple[float, np.ndarray, np.ndarray]:
    """
    Dynamique d'un neurone isolé

    Returns:
        (ż, ẇ, v̇)
    """
    w, v, x, e = (np.asarray(a, dtype=float) for a in (w, v, x, e))
    if w.shape != x.shape:
        raise ConfigurationError(f"w {w.shape} et x {x.shape} de formes différentes")
    if v.shape != e.shape:
        raise ConfigurationError(f"v {v.shape} et e {e.shape} de formes différentes")
    sigma, _ = get_activation(constants.activation)
    drive = float(w @ x)
    z_dot = (-z + float(sigma(np.array(drive)))) / constants.tau_prop
    w_dot = -w / constants.tau_dec_W + float(v @ e) * x / constants.tau_plas_W
    v_dot = -v / constants.tau_dec_V + drive * e / constants.tau_plas_V
    return z_dot, w_dot, v_dot


class ContinuousNetwork:
    """Réseau multicouche dont les activités et les poids évoluent ensemble"""

    def __init__(self, cfg: NetworkConfig):
        self.cfg = cfg
        self.strategy = cfg.routing
        self.layout = cfg.layout()
        self.activations = cfg.resolved_activations
        self._sigmas = [get_activation(a)[0] for a in self.activations]
        self._primes = [get_activation(a)[1] for a in self.activations]
        L = cfg.num_layers
        self._v_plastic = [self.strategy.v_trainable and i < L - 1 for i in range(L)]
        self._z_splits = list(np.cumsum([s[0] for s in self.layout.z_shapes])[:-1])

    # ------------------------------------------------------------------
    # États
    # ------------------------------------------------------------------

    def initial_state(self, seed: Optional[int] = None) -> NetworkState:
        """z = 0, W ~ Xavier normale, V selon `init_V` ; V_L = identité"""
        cfg = self.cfg
        rng = np.random.default_rng(cfg.init_W.seed if seed is None else seed)
        W = []
        for shape in self.layout.w_shapes:
            std = cfg.init_W.gain * math.sqrt(2.0 / (shape[0] + shape[1]))
            W.append(rng.normal(0.0, std, size=shape))
        V = initial_feedback(self.strategy, W, self.layout.v_shapes, cfg.init_V.mode,
                             cfg.init_V.value, cfg.init_V.scale, rng)
        z = [np.zeros(s) for s in self.layout.z_shapes]
        state = NetworkState.unflatten(self.layout, NetworkState(0.0, z, W, V, self.layout).flatten())
        return apply_constraints(self.strategy, state, V)

    def check_state(self, state: NetworkState):
        if state.layout != self.layout:
            raise ConfigurationError(
                "Les formes de l'état ne correspondent pas au réseau "
                f"(W {state.layout.w_shapes} / {self.layout.w_shapes}, "
                f"V {state.layout.v_shapes} / {self.layout.v_shapes})"
            )

    def equilibrium(self, W: Sequence[np.ndarray], x: np.ndarray) -> List[np.ndarray]:
        """Activités au point fixe pour une entrée constante"""
        _, zs = equilibrium_activities(W, self.activations, x, self.cfg.bias_unit)
        return zs

    def predict(self, W: Sequence[np.ndarray], x: np.ndarray) -> int:
        return int(np.argmax(self.equilibrium(W, x)[-1]))

    def _input(self, x: np.ndarray) -> np.ndarray:
        return np.append(x, 1.0) if self.cfg.bias_unit else x

    def _noise(self, t: float) -> np.ndarray:
        # bruit blanc approché : gaussienne constante par intervalle de largeur noise_bin
        cfg = self.cfg
        k = int(math.floor(abs(t) / cfg.noise_bin))
        rng = np.random.default_rng((cfg.noise_seed, k))
        return rng.standard_normal(self.layout.z_size) * (cfg.noise_std / math.sqrt(cfg.noise_bin))

    # ------------------------------------------------------------------
    # Champs de vecteurs
    # ------------------------------------------------------------------

    def rhs(self,
            schedule: Optional[PresentationSchedule] = None,
            input_fn: Optional[Signal] = None,
            error_fn: Optional[Signal] = None,
            plastic: bool = True,
            decay: bool = True) -> Callable[[float, np.ndarray], np.ndarray]:
        """
        Construit le champ de vecteurs du système complet

        Args:
            schedule: Flux d'entrées et d'étiquettes (retardées)
            input_fn: Remplace le flux d'entrée (ex. entrée constante)
            error_fn: Fournit e_L directement au lieu de y(t − Δ) − z_L
            plastic: False fige W et V (dérivées nulles)
            decay: False supprime les termes de décroissance
        """
        if input_fn is None:
            if schedule is None:
                raise ConfigurationError("Ni flux de présentation ni entrée fournie")
            input_fn = schedule.input_at
        label_fn = schedule.label_at if (schedule is not None and error_fn is None) else None
        if plastic and error_fn is None and label_fn is None:
            raise ConfigurationError("Aucune source d'erreur pour la plasticité")

        cfg, layout, strategy = self.cfg, self.layout, self.strategy
        L = cfg.num_layers
        inv_prop = 1.0 / cfg.tau_prop
        inv_plas_W, inv_plas_V = 1.0 / cfg.tau_plas_W, 1.0 / cfg.tau_plas_V
        dec_W = 1.0 / cfg.tau_dec_W if decay else 0.0
        dec_V = 1.0 / cfg.tau_dec_V if decay else 0.0
        sigmas, primes, v_plastic = self._sigmas, self._primes, self._v_plastic
        noisy = cfg.noise_std > 0
        frozen_tail = np.zeros(layout.size - layout.z_size)

        def f(t: float, y: np.ndarray) -> np.ndarray:
            zs, Ws, Vs = layout.views(y)
            prev = self._input(input_fn(t))
            prevs, pres, dz = [], [], []
            for i in range(L):
                pre = Ws[i] @ prev
                dz.append((sigmas[i](pre) - zs[i]) * inv_prop)
                prevs.append(prev)
                pres.append(pre)
                prev = zs[i]
            dz = np.concatenate(dz)
            if noisy:
                dz = dz + self._noise(t)
            if not plastic:
                return np.concatenate([dz, frozen_tail])

            e_L = error_fn(t) if error_fn is not None else label_fn(t) - zs[-1]
            gates = [p(pre) for p, pre in zip(primes, pres)] if cfg.sigma_prime_gate else None
            eps, mod = propagate(strategy, Ws, Vs, e_L, gates)

            parts = [dz]
            for i in range(L):
                d_w = np.outer(mod[i], prevs[i]) * inv_plas_W
                parts.append((d_w - Ws[i] * dec_W if dec_W else d_w).ravel())
            for i in range(L):
                if v_plastic[i]:
                    d_v = np.outer(pres[i], eps[i]) * inv_plas_V
                    parts.append((d_v - Vs[i] * dec_V if dec_V else d_v).ravel())
                else:
                    parts.append(np.zeros(Vs[i].size))
            return np.concatenate(parts)

        return f

    def inference_rhs(self, W: Sequence[np.ndarray], input_fn: Signal) -> Callable[[float, np.ndarray], np.ndarray]:
        """Dynamique d'inférence seule (ż), W figés ; l'état est la concaténation des z_l"""
        inv_prop = 1.0 / self.cfg.tau_prop
        sigmas, splits = self._sigmas, self._z_splits
        W = [np.array(w, copy=True) for w in W]

        def f(t: float, z: np.ndarray) -> np.ndarray:
            zs = np.split(z, splits)
            prev = self._input(input_fn(t))
            out = []
            for i, W_l in enumerate(W):
                out.append((sigmas[i](W_l @ prev) - zs[i]) * inv_prop)
                prev = zs[i]
            return np.concatenate(out)

        return f

    # ------------------------------------------------------------------
    # Évaluation et mise à jour quasi statique
    # ------------------------------------------------------------------

    def evaluate(self, state: NetworkState, test_stream: PresentationSchedule,
                 solver: Optional[SolverConfig] = None,
                 stats: Optional[SolverStats] = None) -> EvaluationResult:
        """
        Évaluation à dynamique figée (Ẇ = V̇ = 0, ε ≡ 0)

        La prédiction de chaque échantillon est l'argmax de z_L à la fin de son
        plateau. L'état passé n'est pas modifié.
        """
        self.check_state(state)
        f = self.inference_rhs(state.W, test_stream.input_at)
        readouts = test_stream.readout_times()
        n = test_stream.num_samples
        d_out = self.cfg.layer_widths[-1]
        predictions = np.full(n, -1, dtype=int)
        cursor = [0]
        tol = 1e-12 * max(1.0, abs(float(readouts[-1])))

        def observer(outcome: StepOutcome):
            while cursor[0] < n and outcome.t_new >= readouts[cursor[0]] - tol:
                predictions[cursor[0]] = int(np.argmax(outcome.state_new[-d_out:]))
                cursor[0] += 1

        t0, t1 = test_stream.t_start, float(readouts[-1])
        z0 = np.concatenate([z.copy() for z in state.z])
        z_final = integrate(f, t0, t1, z0, test_stream.breakpoints(t0, t1), solver, observer, stats)

        labels = np.argmax(test_stream.labels, axis=1)
        accuracy = float(np.mean(predictions == labels))
        logger.debug("Évaluation figée : %d échantillons, précision %.4f", n, accuracy)
        return EvaluationResult(accuracy, predictions, labels, z_final)

    def quasi_static_update(self, state: NetworkState, x: np.ndarray, e: np.ndarray,
                            window: float, solver: Optional[SolverConfig] = None) -> List[np.ndarray]:
        """
        Terme de plasticité moyenné sur une fenêtre de présentation (décroissance exclue)

        Les activités partent de leur équilibre pour x ; entrée et erreur de sortie
        sont maintenues constantes pendant `window`. Retourne (W(T) − W(0))·τ^W_plas/T,
        comparable aux mises à jour m_l z_{l−1}ᵀ des règles analytiques.
        """
        self.check_state(state)
        x = np.asarray(x, dtype=float)
        e = np.asarray(e, dtype=float)
        start = state.copy()
        for z_l, z_eq in zip(start.z, self.equilibrium(start.W, x)):
            z_l[...] = z_eq
        f = self.rhs(input_fn=lambda t: x, error_fn=lambda t: e, decay=False)
        y_T = integrate(f, 0.0, window, start.flatten(), cfg=solver)
        _, W_T, _ = self.layout.views(y_T)
        scale = self.cfg.tau_plas_W / window
        return [(W_T[i] - start.W[i]) * scale for i in range(self.cfg.num_layers)]


# ============================================================================
# INTERFACE FONCTIONNELLE
# ============================================================================

@lru_cache(maxsize=32)
def build_network(cfg: NetworkConfig) -> ContinuousNetwork:
    return ContinuousNetwork(cfg)


def dynamics_rhs(cfg: NetworkConfig, schedule: PresentationSchedule, t: float, s: np.ndarray) -> np.ndarray:
    """Dérivée du vecteur d'état complet à l'instant t"""
    return build_network(cfg).rhs(schedule)(t, np.asarray(s, dtype=float))


def evaluate(cfg: NetworkConfig, state: NetworkState, test_stream: PresentationSchedule,
             solver: Optional[SolverConfig] = None) -> EvaluationResult:
    return build_network(cfg).evaluate(state, test_stream, solver)


def quasi_static_update(cfg: NetworkConfig, state: NetworkState, x: np.ndarray, e: np.ndarray,
                        window: float, solver: Optional[SolverConfig] = None) -> List[np.ndarray]:
    return build_network(cfg).quasi_static_update(state, x, e, window, solver)
