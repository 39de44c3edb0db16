"""
Référence en temps discret : perceptron multicouche, Adam, taille de lot 1
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator
from tqdm import tqdm

from config import Config
from .activations import ACTIVATIONS, get_activation
from .datasets import Dataset
from .errors import ConfigurationError, DivergenceError
from .metrics import MovingAccuracy
from .presentation import dither_labels, presentation_order

logger = logging.getLogger(__name__)


class BaselineConfig(BaseModel):
    """Réseau discret apparié à un réseau continu (mêmes largeurs, même ordre)"""

    model_config = ConfigDict(frozen=True, extra='forbid')

    layer_widths: Tuple[int, ...] = (49, 49, 10)
    activations: Optional[Tuple[str, ...]] = None
    lr: float = Field(1e-3, gt=0)
    beta1: float = Field(0.9, ge=0, lt=1)
    beta2: float = Field(0.999, ge=0, lt=1)
    eps: float = Field(1e-8, ge=0)
    num_samples: int = Field(5000, ge=0)
    dither_ratio: float = Field(0.0, ge=0, le=1)
    seed: int = 0
    init_seed: Optional[int] = None
    bias: bool = True
    ma_window: int = Field(Config.MOVING_AVERAGE_WINDOW, ge=1)

    @model_validator(mode='after')
    def _check_layers(self):
        L = len(self.layer_widths) - 1
        if L < 1 or any(w < 1 for w in self.layer_widths):
            raise ValueError(f"Largeurs de couche invalides : {self.layer_widths}")
        if self.activations is not None and (len(self.activations) != L
                                             or any(a not in ACTIVATIONS for a in self.activations)):
            raise ValueError(f"Activations invalides : {self.activations}")
        return self

    @property
    def resolved_activations(self) -> Tuple[str, ...]:
        if self.activations is not None:
            return self.activations
        return ('relu',) * (len(self.layer_widths) - 2) + ('linear',)


class BaselineMLP:
    """MLP dense, initialisation de Xavier, perte quadratique sur cibles one-hot"""

    def __init__(self, layer_widths: Sequence[int], activations: Sequence[str],
                 seed: int = 0, bias: bool = True):
        rng = np.random.default_rng(seed)
        self.weights = []
        self.biases = []
        for d_in, d_out in zip(layer_widths[:-1], layer_widths[1:]):
            std = math.sqrt(2.0 / (d_in + d_out))
            self.weights.append(rng.normal(0.0, std, size=(d_out, d_in)))
            self.biases.append(np.zeros(d_out))
        self.use_bias = bias
        self.activations = [get_activation(a) for a in activations]

    @property
    def parameters(self) -> List[np.ndarray]:
        return self.weights + (self.biases if self.use_bias else [])

    def forward(self, x: np.ndarray) -> Tuple[List[np.ndarray], List[np.ndarray]]:
        """Retourne (pré-activations, activités) ; activités[0] est l'entrée"""
        acts = [np.asarray(x, dtype=float)]
        pres = []
        for W, b, (sigma, _) in zip(self.weights, self.biases, self.activations):
            pre = W @ acts[-1] + (b if self.use_bias else 0.0)
            pres.append(pre)
            acts.append(sigma(pre))
        return pres, acts

    def loss(self, x: np.ndarray, y: np.ndarray) -> float:
        _, acts = self.forward(x)
        return 0.5 * float(np.sum((acts[-1] - y) ** 2))

    def gradients(self, x: np.ndarray, y: np.ndarray) -> Tuple[List[np.ndarray], List[np.ndarray], float]:
        """Rétropropagation : (dL/dW, dL/db, perte) pour un échantillon"""
        pres, acts = self.forward(x)
        diff = acts[-1] - y
        loss = 0.5 * float(diff @ diff)
        delta = diff * self.activations[-1][1](pres[-1])
        grads_W = [None] * len(self.weights)
        grads_b = [None] * len(self.weights)
        for i in range(len(self.weights) - 1, -1, -1):
            grads_W[i] = np.outer(delta, acts[i])
            grads_b[i] = delta.copy()
            if i > 0:
                delta = (self.weights[i].T @ delta) * self.activations[i - 1][1](pres[i - 1])
        return grads_W, grads_b, loss

    def predict(self, inputs: np.ndarray) -> np.ndarray:
        return np.array([int(np.argmax(self.forward(x)[1][-1])) for x in inputs])

    def accuracy(self, inputs: np.ndarray, labels: np.ndarray) -> float:
        if len(labels) == 0:
            return float('nan')
        return float(np.mean(self.predict(inputs) == np.asarray(labels)))


class AdamOptimizer:
    """Adam appliqué en place sur une liste de paramètres"""

    def __init__(self, params: List[np.ndarray], lr: float = 1e-3, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.params = params
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, grads: Sequence[np.ndarray]):
        self.t += 1
        bias1 = 1.0 - self.beta1 ** self.t
        bias2 = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / bias1) / (np.sqrt(v / bias2) + self.eps)


@dataclass
class BaselineResult:
    """Issue d'un entraînement de référence"""
    status: str
    train_accuracy: Optional[float]
    test_accuracy: Optional[float]
    trace: List[Tuple[int, float]] = field(default_factory=list)
    model: Optional[BaselineMLP] = None
    error: Optional[str] = None

    @property
    def success(self) -> bool:
        return self.status == 'ok'


def train_baseline(cfg: BaselineConfig, dataset: Dataset, test: Optional[Dataset] = None,
                   dithered: bool = False, checkpoint_every: int = Config.CHECKPOINT_EVERY,
                   show_progress: bool = False) -> BaselineResult:
    """
    Entraîne le MLP échantillon par échantillon

    L'ordre de présentation est celui du réseau continu apparié (même graine).
    Avec `dithered`, une fraction `dither_ratio` des échantillons est entraînée
    sur l'étiquette précédente. La précision d'apprentissage glissante compare
    la prédiction (avant mise à jour) à la vraie étiquette.
    """
    if len(dataset) == 0:
        raise ConfigurationError("Jeu d'apprentissage vide")
    if dataset.input_dim != cfg.layer_widths[0] or dataset.num_classes != cfg.layer_widths[-1]:
        raise ConfigurationError(
            f"Largeurs {cfg.layer_widths} incompatibles avec le jeu "
            f"({dataset.input_dim} entrées, {dataset.num_classes} classes)"
        )

    order = presentation_order(len(dataset), cfg.num_samples, cfg.seed)
    inputs = dataset.inputs[order]
    true_labels = dataset.labels[order]
    train_labels = true_labels
    if dithered and cfg.dither_ratio > 0:
        _, train_labels, _ = dither_labels(inputs, true_labels, cfg.dither_ratio)
    targets = np.eye(dataset.num_classes)[train_labels]

    model = BaselineMLP(cfg.layer_widths, cfg.resolved_activations,
                        cfg.seed if cfg.init_seed is None else cfg.init_seed, cfg.bias)
    optimizer = AdamOptimizer(model.parameters, cfg.lr, cfg.beta1, cfg.beta2, cfg.eps)
    moving = MovingAccuracy(cfg.ma_window)
    trace: List[Tuple[int, float]] = []

    try:
        for k in tqdm(range(len(order)), desc="Référence MLP", disable=not show_progress):
            _, acts = model.forward(inputs[k])
            moving.update(int(np.argmax(acts[-1])) == int(true_labels[k]))
            grads_W, grads_b, loss = model.gradients(inputs[k], targets[k])
            if not math.isfinite(loss):
                raise DivergenceError(f"Perte non finie à l'échantillon {k}")
            optimizer.step(grads_W + (grads_b if cfg.bias else []))
            if (k + 1) % checkpoint_every == 0:
                trace.append((k + 1, moving.accuracy))
    except DivergenceError as e:
        logger.error("❌ Divergence de la référence : %s", e)
        return BaselineResult('failed', moving.accuracy, None, trace, model, str(e))

    test_accuracy = model.accuracy(test.inputs, test.labels) if test is not None else None
    logger.info("✅ Référence entraînée : %d échantillons, test %s",
                len(order), f"{test_accuracy:.4f}" if test_accuracy is not None else "n/a")
    return BaselineResult('ok', moving.accuracy, test_accuracy, trace, model)


def delay_robustness_curve(cfg: BaselineConfig, dataset: Dataset, test: Dataset,
                           ratios: Sequence[float],
                           continuous_fn: Optional[Callable[[float], Optional[float]]] = None) -> pd.DataFrame:
    """
    Précision en fonction du rapport de retard r (étiquettes tramées)

    `continuous_fn(r)` fournit, si donné, la précision du réseau continu pour
    Δ = r·T, pour la comparaison appariée.
    """
    rows = []
    for ratio in ratios:
        if not 0.0 <= ratio <= 1.0:
            raise ConfigurationError(f"Rapport de retard hors de [0, 1] : {ratio}")
        result = train_baseline(cfg.model_copy(update={'dither_ratio': float(ratio)}),
                                dataset, test, dithered=True)
        row = {
            'ratio': float(ratio),
            'baseline_train_accuracy': result.train_accuracy,
            'baseline_test_accuracy': result.test_accuracy,
            'baseline_status': result.status,
        }
        if continuous_fn is not None:
            row['continuous_test_accuracy'] = continuous_fn(float(ratio))
        rows.append(row)
    return pd.DataFrame(rows)
