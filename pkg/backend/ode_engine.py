"""
Intégrateur Runge–Kutta explicite 5(4) (coefficients de Tsitouras) à pas adaptatif
"""

import logging
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from config import Config
from .errors import ConfigurationError, IntegrationError, StepBudgetError

logger = logging.getLogger(__name__)

RHS = Callable[[float, np.ndarray], np.ndarray]

# ============================================================================
# TABLEAU DE BUTCHER
# ============================================================================

ORDER = 5

_C = np.array([0.0, 0.161, 0.327, 0.9, 0.9800255409045097, 1.0, 1.0])

_A = [
    np.array([]),
    np.array([0.161]),
    np.array([-0.008480655492356989, 0.335480655492357]),
    np.array([2.897153057105493, -6.359448489975075, 4.3622954328695815]),
    np.array([5.325864828439257, -11.748883564062828, 7.4955393428898365,
              -0.09249506636175525]),
    np.array([5.86145544294642, -12.92096931784711, 8.159367898576159,
              -0.071584973281401, -0.028269050394068383]),
    # la dernière ligne est aussi le poids de la solution d'ordre 5 (FSAL)
    np.array([0.09646076681806523, 0.01, 0.4798896504144996, 1.379008574103742,
              -3.290069515436081, 2.324710524099774]),
]

# b - b_hat : y5 - y4 = dt * (B_ERROR @ K)
_B_ERROR = np.array([
    0.00178001105222577714,
    0.0008164344596567469,
    -0.007880878010261995,
    0.1447110071732629,
    -0.5823571654525552,
    0.45808210592918697,
    -0.015151515151515152,
])

_ERROR_FLOOR = 1e-10


class SolverConfig(BaseModel):
    """Paramètres du contrôle de pas adaptatif"""

    model_config = ConfigDict(frozen=True, extra='forbid')

    rtol: float = Field(Config.SOLVER_RTOL, gt=0)
    atol: float = Field(Config.SOLVER_ATOL, gt=0)
    dt_init: float = Field(Config.SOLVER_DT_INIT, gt=0)
    dt_min: float = Field(Config.SOLVER_DT_MIN, gt=0)
    dt_max: float = Field(Config.SOLVER_DT_MAX, gt=0)
    safety: float = Field(Config.SOLVER_SAFETY, gt=0, lt=1)
    # Gains PI classiques (0.7, -0.4)/ordre ; kd = 0
    pid_kp: float = 0.7 / ORDER
    pid_ki: float = -0.4 / ORDER
    pid_kd: float = 0.0
    factor_min: float = Field(0.2, gt=0, le=1)
    factor_max: float = Field(10.0, ge=1)
    max_steps: int = Field(Config.SOLVER_MAX_STEPS, ge=1)
    max_rejections_at_min: int = Field(20, ge=1)
    fsal: bool = True
    # Mode pas fixe : réservé aux vérifications d'ordre
    fixed_step: bool = False

    @model_validator(mode='after')
    def _check_step_bounds(self):
        if not (self.dt_min <= self.dt_init <= self.dt_max):
            raise ValueError(
                f"Bornes de pas incohérentes : dt_min={self.dt_min}, "
                f"dt_init={self.dt_init}, dt_max={self.dt_max}"
            )
        return self


@dataclass(frozen=True)
class StepOutcome:
    """Résultat d'une tentative de pas"""
    accepted: bool
    t_new: float
    dt_used: float
    dt_next: float
    error_ratio: float
    state_new: np.ndarray


@dataclass
class SolverStats:
    """Compteurs d'intégration (appartiennent à l'appelant, cumulables)"""
    accepted: int = 0
    rejected: int = 0
    rhs_evals: int = 0
    last_dt: Optional[float] = None

    @property
    def steps(self) -> int:
        return self.accepted + self.rejected


# ============================================================================
# PAS ÉLÉMENTAIRE
# ============================================================================

def _check_finite(values: np.ndarray, t: float, what: str):
    if not np.all(np.isfinite(values)):
        index = int(np.flatnonzero(~np.isfinite(values))[0])
        raise IntegrationError(f"{what} non fini(e)", t, index)


def _tsit5_stages(rhs: RHS, t: float, y: np.ndarray, dt: float,
                  k1: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray, np.ndarray, int]:
    """Évalue les 7 étages ; retourne (y5, y_err, dernier étage, nb d'évaluations)"""
    stages = np.empty((7, y.size))
    evals = 0
    if k1 is None:
        k1 = np.asarray(rhs(t, y), dtype=float).reshape(y.size)
        evals += 1
    _check_finite(k1, t, "Dérivée")
    stages[0] = k1

    y5 = y
    for i in range(1, 7):
        t_i = t + _C[i] * dt
        y_i = y + dt * (_A[i] @ stages[:i])
        stages[i] = np.asarray(rhs(t_i, y_i), dtype=float).reshape(y.size)
        evals += 1
        _check_finite(stages[i], t_i, "Dérivée")
        if i == 6:
            y5 = y_i

    y_err = dt * (_B_ERROR @ stages)
    return y5, y_err, stages[6], evals


def tsit5_step(rhs: RHS, t: float, y, dt: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Un pas de Tsitouras 5(4)

    Args:
        rhs: Champ de vecteurs f(t, y)
        t: Temps de départ
        y: État de départ
        dt: Pas (> 0)

    Returns:
        (y5, y_err) : solution d'ordre 5 et estimation d'erreur y5 - y4
    """
    if not dt > 0:
        raise ConfigurationError(f"Le pas doit être strictement positif (dt={dt})")
    y = np.atleast_1d(np.asarray(y, dtype=float))
    y5, y_err, _, _ = _tsit5_stages(rhs, t, y, dt)
    return y5, y_err


def scaled_error_norm(y: np.ndarray, y_new: np.ndarray, y_err: np.ndarray,
                      rtol: float, atol: float) -> float:
    """Norme RMS mixte de l'erreur, mise à l'échelle par atol + rtol*max(|y|, |y_new|)"""
    scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
    return float(np.sqrt(np.mean((y_err / scale) ** 2)))


def pid_controller(error_ratio: float, history: Tuple[float, float],
                   dt: float, cfg: SolverConfig) -> float:
    """
    Propose le pas suivant (mise à jour PID multiplicative, bornée)

    Args:
        error_ratio: Erreur normalisée du pas courant
        history: Deux erreurs normalisées précédentes (la plus récente d'abord)
        dt: Pas qui vient d'être tenté
        cfg: Configuration du solveur

    Returns:
        Pas proposé, dans [dt_min, dt_max]
    """
    err = max(float(error_ratio), _ERROR_FLOOR)
    prev, prev2 = (h if h > 0 else 1.0 for h in history)

    factor = cfg.safety * err ** (-cfg.pid_kp) * prev ** (-cfg.pid_ki) * prev2 ** (-cfg.pid_kd)
    factor = min(max(factor, cfg.factor_min), cfg.factor_max)
    if err > 1.0:
        # un pas rejeté doit rétrécir
        factor = min(factor, cfg.safety)

    return float(min(max(dt * factor, cfg.dt_min), cfg.dt_max))


# ============================================================================
# INTÉGRATION SUR UN INTERVALLE
# ============================================================================

def integrate(rhs: RHS,
              t0: float,
              t1: float,
              y0,
              breakpoints: Iterable[float] = (),
              cfg: Optional[SolverConfig] = None,
              observer: Optional[Callable[[StepOutcome], Optional[np.ndarray]]] = None,
              stats: Optional[SolverStats] = None,
              dt0: Optional[float] = None) -> np.ndarray:
    """
    Intègre y' = rhs(t, y) de t0 à t1 en atteignant exactement chaque point d'arrêt

    Args:
        rhs: Champ de vecteurs
        t0, t1: Bornes de l'intervalle (t0 < t1)
        y0: État initial (non modifié)
        breakpoints: Instants que les pas ne doivent jamais enjamber
        cfg: Configuration du solveur
        observer: Appelé après chaque pas accepté ; s'il retourne un tableau,
            celui-ci remplace l'état courant (contraintes appliquées entre pas)
        stats: Compteurs à incrémenter (optionnel)
        dt0: Pas initial (défaut : cfg.dt_init)

    Returns:
        État à t1
    """
    cfg = cfg or SolverConfig()
    stats = stats if stats is not None else SolverStats()
    if not t1 > t0:
        raise ConfigurationError(f"Intervalle vide ou inversé : [{t0}, {t1}]")

    y = np.array(y0, dtype=float, copy=True).reshape(-1)
    stops = sorted({float(b) for b in breakpoints if t0 < b < t1})
    stops.append(float(t1))

    t = float(t0)
    dt = cfg.dt_init if cfg.fixed_step else min(max(dt0 or cfg.dt_init, cfg.dt_min), cfg.dt_max)
    history = (1.0, 1.0)
    k1 = None
    attempts = 0
    rejections_at_min = 0
    stop_index = 0

    while stop_index < len(stops):
        stop = stops[stop_index]
        if attempts >= cfg.max_steps:
            raise StepBudgetError(cfg.max_steps, t, (t - t0) / (t1 - t0))
        attempts += 1

        hits_stop = t + dt * 1.01 >= stop
        h = stop - t if hits_stop else dt

        y_new, y_err, k_last, evals = _tsit5_stages(rhs, t, y, h, k1 if cfg.fsal else None)
        stats.rhs_evals += evals
        _check_finite(y_new, t + h, "État")
        err = scaled_error_norm(y, y_new, y_err, cfg.rtol, cfg.atol)

        if cfg.fixed_step or err <= 1.0:
            t_new = stop if hits_stop else t + h
            if cfg.fixed_step:
                dt_next = cfg.dt_init
            else:
                dt_next = pid_controller(err, history, h, cfg)
                if hits_stop:
                    # le pas a été raccourci par le point d'arrêt
                    dt_next = max(dt_next, min(dt, cfg.dt_max))
                history = (max(err, _ERROR_FLOOR), history[0])

            stats.accepted += 1
            rejections_at_min = 0
            t, y = t_new, y_new
            k1 = k_last
            dt = dt_next

            if observer is not None:
                replaced = observer(StepOutcome(True, t_new, h, dt_next, err, y_new))
                if replaced is not None:
                    y = np.asarray(replaced, dtype=float).reshape(-1)
                    k1 = None
            if hits_stop:
                stop_index += 1
        else:
            stats.rejected += 1
            if h <= cfg.dt_min * (1.0 + 1e-12):
                rejections_at_min += 1
                if rejections_at_min >= cfg.max_rejections_at_min:
                    raise IntegrationError(
                        f"{rejections_at_min} rejets consécutifs au pas minimal", t
                    )
            dt = pid_controller(err, history, h, cfg)

    stats.last_dt = dt
    logger.debug("Intégration [%g, %g] : %d pas acceptés, %d rejetés",
                 t0, t1, stats.accepted, stats.rejected)
    return y
