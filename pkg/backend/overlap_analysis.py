"""
Noyau de recouvrement : mise à jour synaptique attendue selon le décalage entrée / erreur

Une présentation d'entrée occupe [0, T], l'erreur correspondante [Δ, Δ + T].
La dynamique de plasticité passe-bas pondère chaque instant de coïncidence par
k(t) = exp(−(T − t)/τ_plas), lu à la fin de la présentation.
"""

import logging
import math
import warnings
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field
from scipy import integrate as sp_integrate

from .errors import ConfigurationError
from .network_core import NeuronConstants, per_neuron_rhs
from .ode_engine import SolverConfig, integrate
from .presentation import PresentationSchedule

logger = logging.getLogger(__name__)

Kernel = Callable[[float], float]

# Au-delà de T/τ_plas = 0.1, le noyau n'est plus plat sur la fenêtre
FLAT_KERNEL_RATIO = 0.1


class FlatKernelWarning(UserWarning):
    """Loi triangulaire utilisée hors de son domaine de validité (T ≪ τ_plas)"""


class TimingScenario(BaseModel):
    """Fenêtre de présentation T, décalage Δ de l'erreur, constante de plasticité"""

    model_config = ConfigDict(frozen=True, extra='forbid')

    sample_time: float = Field(..., gt=0)
    delay: float = 0.0
    tau_plas: float = Field(..., gt=0)

    @property
    def t0(self) -> float:
        return max(0.0, self.delay)

    @property
    def t1(self) -> float:
        return min(self.sample_time, self.delay + self.sample_time)

    @property
    def overlap(self) -> float:
        """L = (T − |Δ|)₊"""
        return max(0.0, self.sample_time - abs(self.delay))

    def kernel(self) -> Kernel:
        return exponential_kernel(self.sample_time, self.tau_plas)


def exponential_kernel(sample_time: float, tau_plas: float) -> Kernel:
    if math.isinf(tau_plas):
        return flat_kernel
    return lambda t: math.exp(-(sample_time - t) / tau_plas)


def flat_kernel(t: float) -> float:
    return 1.0


def _quad(fn: Callable[[float], float], a: float, b: float, points: Sequence[float] = ()) -> float:
    if not b > a:
        return 0.0
    inner = sorted(p for p in points if a < p < b)
    # intégration par morceaux entre les raccords des enveloppes
    edges = [a] + inner + [b]
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        value, _ = sp_integrate.quad(fn, lo, hi, epsabs=0.0, epsrel=1e-12, limit=200)
        total += value
    return total


def kernel_update_quadrature(presyn: Callable[[float], float],
                             error_drive: Callable[[float], float],
                             sample_time: float,
                             tau_plas: float,
                             points: Sequence[float] = ()) -> float:
    """
    ∫₀ᵀ presyn(t)·error(t)·exp(−(T−t)/τ_plas) dt par quadrature adaptative

    Args:
        presyn: Enveloppe présynaptique
        error_drive: Enveloppe de l'erreur projetée
        sample_time: Fenêtre T
        tau_plas: Constante de plasticité (inf : noyau plat)
        points: Discontinuités connues des enveloppes
    """
    kernel = exponential_kernel(sample_time, tau_plas)
    return _quad(lambda t: presyn(t) * error_drive(t) * kernel(t), 0.0, sample_time, points)


def scenario_envelopes(scenario: TimingScenario) -> Tuple[Callable, Callable, List[float]]:
    """Enveloppes indicatrices (entrée sur [0, T], erreur sur [Δ, Δ+T]) et leurs raccords"""
    T, delay = scenario.sample_time, scenario.delay

    def presyn(t: float) -> float:
        return 1.0 if 0.0 <= t <= T else 0.0

    def error(t: float) -> float:
        return 1.0 if delay <= t <= delay + T else 0.0

    return presyn, error, [delay, delay + T]


def scenario_quadrature(scenario: TimingScenario) -> float:
    presyn, error, kinks = scenario_envelopes(scenario)
    return kernel_update_quadrature(presyn, error, scenario.sample_time, scenario.tau_plas, kinks)


def closed_form_update(scenario: TimingScenario) -> float:
    """τ_plas·e^{−(T−t₁)/τ_plas}·(1 − e^{−L/τ_plas}) ; 0 sans recouvrement"""
    L = scenario.overlap
    if L <= 0.0:
        return 0.0
    tau = scenario.tau_plas
    if math.isinf(tau):
        return L
    return -tau * math.exp(-(scenario.sample_time - scenario.t1) / tau) * math.expm1(-L / tau)


def triangular_limit(scenario: TimingScenario) -> float:
    """Loi triangulaire (T − |Δ|)₊, limite de noyau plat"""
    if scenario.sample_time / scenario.tau_plas > FLAT_KERNEL_RATIO:
        warnings.warn(
            f"T/τ_plas = {scenario.sample_time / scenario.tau_plas:.3g} > {FLAT_KERNEL_RATIO} : "
            "le noyau n'est pas plat sur la fenêtre",
            FlatKernelWarning, stacklevel=2,
        )
    return scenario.overlap


def overlap_budget(scenario: TimingScenario, kernel: Optional[Kernel] = None) -> Tuple[float, float, float]:
    """
    Répartition du noyau entre recouvrement correct et incorrect

    Returns:
        (K_C, K_I, K_T) avec K_C + K_I = K_T
    """
    kernel = kernel or scenario.kernel()
    T = scenario.sample_time
    a, b = scenario.t0, scenario.t1
    if b <= a:
        K_C = 0.0
        K_I = _quad(kernel, 0.0, T)
    else:
        K_C = _quad(kernel, a, b)
        K_I = _quad(kernel, 0.0, a) + _quad(kernel, b, T)
    K_T = _quad(kernel, 0.0, T)
    return K_C, K_I, K_T


def plasticity_threshold(sample_time: float, eta: float) -> float:
    """τ_plas minimal pour une atténuation au plus η sur la fenêtre : T / ln(1/(1−η))"""
    if not 0.0 < eta < 1.0:
        raise ConfigurationError(f"L'atténuation admise doit être dans ]0, 1[ (reçu {eta})")
    if not sample_time > 0:
        raise ConfigurationError("La durée d'échantillon doit être positive")
    return sample_time / -math.log1p(-eta)


def kernel_curve(sample_time: float, tau_plas: float, deltas: Sequence[float]) -> pd.DataFrame:
    """
    Courbe (Δ, mise à jour attendue) pour export CSV

    Colonnes : delta, delta_ratio, closed_form, quadrature, triangular,
    normalized (forme fermée rapportée à sa valeur en Δ = 0)
    """
    rows = []
    peak = closed_form_update(TimingScenario(sample_time=sample_time, delay=0.0, tau_plas=tau_plas))
    with warnings.catch_warnings():
        warnings.simplefilter('ignore', FlatKernelWarning)
        for delta in deltas:
            scenario = TimingScenario(sample_time=sample_time, delay=float(delta), tau_plas=tau_plas)
            closed = closed_form_update(scenario)
            rows.append({
                'delta': float(delta),
                'delta_ratio': float(delta) / sample_time,
                'closed_form': closed,
                'quadrature': scenario_quadrature(scenario),
                'triangular': triangular_limit(scenario),
                'normalized': closed / peak if peak > 0 else 0.0,
            })
    return pd.DataFrame(rows)


# ============================================================================
# SIMULATION D'UNE SYNAPSE ISOLÉE
# ============================================================================

def single_synapse_update(delay: float, sample_time: float, tau_plas: float,
                          tau_prop: float = 1e-3, solver: Optional[SolverConfig] = None) -> float:
    """
    Mise à jour informative d'une synapse simulée

    Un neurone linéaire reçoit une entrée (échantillon nul puis échantillon
    unité) et une erreur identique retardée de Δ ; v = 1 fixé. Retourne τ_plas·w
    lu à la fin du plateau de l'échantillon unité.

    Ici τ^W_dec = τ_plas et non τ_dec → ∞ : c'est cette décroissance qui réalise
    le noyau exponentiel e^{−(T−t)/τ_plas} du filtre passe-bas. Sans elle, w
    intègre sans oubli et les erreurs tardives ne pèsent pas plus que les
    précoces (rapport e^{1/2} à τ_plas = T perdu).
    """
    constants = NeuronConstants(tau_prop=tau_prop, tau_plas_W=tau_plas, tau_plas_V=math.inf,
                                tau_dec_W=tau_plas, tau_dec_V=math.inf, activation='linear')
    envelope = np.array([[0.0], [1.0], [0.0]])
    schedule = PresentationSchedule(envelope, envelope, sample_time=sample_time,
                                    buffer_time=sample_time / 1000.0, delay=delay)
    t_read = float(schedule.readout_times()[1])

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        z_dot, w_dot, v_dot = per_neuron_rhs(y[1:2], y[2:3], schedule.input_at(t),
                                             schedule.label_at(t), y[0], constants)
        return np.concatenate([[z_dot], w_dot, v_dot])

    solver = solver or SolverConfig(rtol=1e-8, atol=1e-12, dt_init=sample_time / 1000.0,
                                    dt_max=sample_time / 10.0)
    y = integrate(rhs, 0.0, t_read, np.array([0.0, 0.0, 1.0]),
                  schedule.breakpoints(0.0, t_read), solver)
    return tau_plas * float(y[1])


def simulate_single_synapse(deltas: Sequence[float], sample_time: float, tau_plas: float,
                            tau_prop: float = 1e-3, solver: Optional[SolverConfig] = None) -> pd.DataFrame:
    """Balaye Δ ; colonnes delta, delta_ratio, simulated, closed_form"""
    rows = []
    for delta in deltas:
        scenario = TimingScenario(sample_time=sample_time, delay=float(delta), tau_plas=tau_plas)
        rows.append({
            'delta': float(delta),
            'delta_ratio': float(delta) / sample_time,
            'simulated': single_synapse_update(float(delta), sample_time, tau_plas, tau_prop, solver),
            'closed_form': closed_form_update(scenario),
        })
    logger.info("✅ Synapse isolée : %d décalages simulés (τ_plas/T = %g)",
                len(rows), tau_plas / sample_time)
    return pd.DataFrame(rows)
