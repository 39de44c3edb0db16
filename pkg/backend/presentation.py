"""
Flux de présentation : échantillons constants par morceaux, tampons lissés, retard de l'étiquette
"""

import logging
from fractions import Fraction
from typing import List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from config import Config
from .errors import ConfigurationError, ScheduleExhaustedError

logger = logging.getLogger(__name__)

Interpolation = Literal['smoothstep', 'linear']


def smoothstep(u: float) -> float:
    """s(u) = 3u² − 2u³ sur [0, 1] (raccord C¹)"""
    return u * u * (3.0 - 2.0 * u)


def default_buffer_time(sample_time: float) -> float:
    """Tampon par défaut : T/10 plafonné à 5 ms"""
    return min(sample_time / 10.0, Config.BUFFER_TIME_MAX)


class ScheduleParams(BaseModel):
    """Paramètres temporels d'un flux (section `schedule` de la configuration)"""

    model_config = ConfigDict(frozen=True, extra='forbid')

    sample_time: float = Field(Config.SAMPLE_TIME, gt=0)
    buffer_time: Optional[float] = Field(None, gt=0)
    delay: float = 0.0
    interpolation: Interpolation = 'smoothstep'

    @model_validator(mode='after')
    def _check_buffer(self):
        if self.buffer_time is not None and not self.buffer_time < self.sample_time:
            raise ValueError(
                f"Le tampon ({self.buffer_time}) doit être plus court que T ({self.sample_time})"
            )
        return self

    @property
    def resolved_buffer_time(self) -> float:
        return self.buffer_time if self.buffer_time is not None else default_buffer_time(self.sample_time)

    def build(self, inputs: np.ndarray, labels: np.ndarray, t_start: float = 0.0,
              delay: Optional[float] = None) -> 'PresentationSchedule':
        """Construit le flux pour une suite d'échantillons"""
        return PresentationSchedule(
            inputs, labels,
            sample_time=self.sample_time,
            buffer_time=self.resolved_buffer_time,
            delay=self.delay if delay is None else delay,
            t_start=t_start,
            interpolation=self.interpolation,
        )


class PresentationSchedule:
    """
    Flux temporel d'entrées et d'étiquettes

    L'échantillon k occupe le créneau [t_start + kP, t_start + (k+1)P] avec
    P = T + tampon : plateau de durée T puis transition lissée vers k+1.
    Le flux d'étiquettes est le même flux décalé de `delay` (positif : en retard).
    Immuable après construction.
    """

    def __init__(self,
                 inputs: np.ndarray,
                 labels: np.ndarray,
                 sample_time: float,
                 buffer_time: Optional[float] = None,
                 delay: float = 0.0,
                 t_start: float = 0.0,
                 interpolation: Interpolation = 'smoothstep'):
        # copies : le flux est figé sans toucher aux tableaux de l'appelant
        inputs = np.atleast_2d(np.array(inputs, dtype=float))
        labels = np.atleast_2d(np.array(labels, dtype=float))
        if inputs.shape[0] == 0:
            raise ConfigurationError("Flux de présentation vide")
        if inputs.shape[0] != labels.shape[0]:
            raise ConfigurationError(
                f"{inputs.shape[0]} entrées pour {labels.shape[0]} étiquettes"
            )
        buffer_time = default_buffer_time(sample_time) if buffer_time is None else buffer_time
        if not 0 < buffer_time < sample_time:
            raise ConfigurationError(
                f"Il faut 0 < tampon < T (tampon={buffer_time}, T={sample_time})"
            )
        if interpolation not in ('smoothstep', 'linear'):
            raise ConfigurationError(f"Interpolation '{interpolation}' non reconnue")

        self.inputs = inputs
        self.labels = labels
        self.inputs.setflags(write=False)
        self.labels.setflags(write=False)
        self.sample_time = float(sample_time)
        self.buffer_time = float(buffer_time)
        self.delay = float(delay)
        self.t_start = float(t_start)
        self.interpolation = interpolation

        self.period = self.sample_time + self.buffer_time
        self.num_samples = inputs.shape[0]
        self.t_end = self.t_start + self.num_samples * self.period
        self._blend = smoothstep if interpolation == 'smoothstep' else (lambda u: u)
        self._tol = 1e-9 * max(1.0, abs(self.t_end))

        slots = np.arange(self.num_samples)
        # mêmes flottants pour les points d'arrêt et les instants de lecture
        self._plateau_ends = self.t_start + slots * self.period + self.sample_time
        self._slot_ends = self.t_start + (slots + 1) * self.period

    # ------------------------------------------------------------------
    # Évaluation des signaux
    # ------------------------------------------------------------------

    def _check_horizon(self, t: float):
        if t < self.t_start - self._tol or t > self.t_end + self._tol:
            raise ScheduleExhaustedError(t, self.t_start, self.t_end)

    def _value(self, values: np.ndarray, u: float) -> np.ndarray:
        if u <= 0.0:
            return values[0]
        k = int(u // self.period)
        if k >= self.num_samples - 1:
            if k >= self.num_samples:
                return values[-1]
            # le dernier échantillon est maintenu pendant son tampon
            return values[k]
        r = u - k * self.period
        if r <= self.sample_time:
            return values[k]
        s = self._blend(min((r - self.sample_time) / self.buffer_time, 1.0))
        return values[k] + s * (values[k + 1] - values[k])

    def input_at(self, t: float) -> np.ndarray:
        """Vecteur d'entrée à l'instant t"""
        self._check_horizon(t)
        return self._value(self.inputs, t - self.t_start)

    def label_at(self, t: float) -> np.ndarray:
        """Étiquette (one-hot) à l'instant t, évaluée à t − delay ; maintenue aux bords du flux"""
        self._check_horizon(t)
        return self._value(self.labels, t - self.t_start - self.delay)

    # ------------------------------------------------------------------
    # Instants particuliers
    # ------------------------------------------------------------------

    def readout_times(self) -> np.ndarray:
        """Fin du plateau de chaque échantillon (instant de lecture de la prédiction)"""
        return self._plateau_ends

    def slot(self, index: int) -> Tuple[float, float]:
        """Créneau [début, fin] de l'échantillon `index`"""
        start = self.t_start + index * self.period
        return start, float(self._slot_ends[index])

    def breakpoints(self, t0: float = None, t1: float = None) -> List[float]:
        """
        Points de raccord des flux d'entrée et d'étiquette dans (t0, t1)

        Chaque instant n'apparaît qu'une fois ; un raccord d'étiquette confondu
        avec un raccord d'entrée (à la précision flottante près) est fusionné.
        """
        t0 = self.t_start if t0 is None else t0
        t1 = self.t_end if t1 is None else t1
        if not t0 < t1:
            return []

        input_kinks = np.concatenate([self._plateau_ends, self._slot_ends])
        input_kinks = np.unique(input_kinks[(input_kinks > t0) & (input_kinks < t1)])

        if self.delay == 0.0:
            return input_kinks.tolist()

        label_kinks = np.concatenate([self._plateau_ends, self._slot_ends]) + self.delay
        label_kinks = np.unique(label_kinks[(label_kinks > t0) & (label_kinks < t1)])
        if input_kinks.size and label_kinks.size:
            pos = np.clip(np.searchsorted(input_kinks, label_kinks), 1, input_kinks.size - 1) \
                if input_kinks.size > 1 else np.zeros(label_kinks.size, dtype=int)
            nearest = np.minimum(
                np.abs(input_kinks[pos] - label_kinks),
                np.abs(input_kinks[np.maximum(pos - 1, 0)] - label_kinks),
            )
            label_kinks = label_kinks[nearest > self._tol]
        return np.unique(np.concatenate([input_kinks, label_kinks])).tolist()

    def __repr__(self) -> str:
        return (f"PresentationSchedule(n={self.num_samples}, T={self.sample_time}, "
                f"buffer={self.buffer_time}, delay={self.delay}, t_start={self.t_start})")


def presentation_order(num_available: int, num_samples: int, seed: int) -> np.ndarray:
    """
    Ordre de présentation : permutations successives (époques) tronquées à `num_samples`

    Partagé par le réseau continu et la référence discrète pour garantir le même ordre.
    """
    if num_available <= 0:
        raise ConfigurationError("Aucun échantillon disponible")
    rng = np.random.default_rng(seed)
    epochs = -(-num_samples // num_available) if num_samples > 0 else 0
    order = [rng.permutation(num_available) for _ in range(epochs)]
    if not order:
        return np.zeros(0, dtype=int)
    return np.concatenate(order)[:num_samples]


def dither_labels(inputs: np.ndarray,
                  labels: np.ndarray,
                  delay_ratio: Union[float, Fraction],
                  max_denominator: int = 100) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Tramage des étiquettes : substitut discret d'un retard r = p/q

    Dans chaque bloc de q échantillons consécutifs, exactement p reçoivent
    l'étiquette de l'échantillon précédent, répartis régulièrement dans le bloc.
    Le premier échantillon n'a pas de prédécesseur : il garde son étiquette
    et n'est jamais marqué (seul cas possible : r = 1).

    Args:
        inputs: Entrées dans l'ordre de présentation
        labels: Étiquettes (indices ou one-hot) dans le même ordre
        delay_ratio: Rapport retard / durée d'échantillon, dans [0, 1]
        max_denominator: Dénominateur maximal de l'approximation rationnelle

    Returns:
        (inputs, étiquettes tramées, masque des échantillons décalés)
    """
    ratio = delay_ratio if isinstance(delay_ratio, Fraction) \
        else Fraction(delay_ratio).limit_denominator(max_denominator)
    if ratio < 0 or ratio > 1:
        raise ConfigurationError(f"Le rapport de retard doit être dans [0, 1] (reçu {float(ratio)})")

    labels = np.asarray(labels)
    p, q = ratio.numerator, ratio.denominator
    j = np.arange(labels.shape[0]) % q
    mismatched = ((j + 1) * p // q) > (j * p // q)
    mismatched[:1] = False

    previous = np.roll(labels, 1, axis=0)
    mask = mismatched.reshape((-1,) + (1,) * (labels.ndim - 1))
    return inputs, np.where(mask, previous, labels), mismatched
