"""
Harnais d'expériences : exécutions uniques, balayages 2-D, comparaison à la référence discrète
"""

import hashlib
import itertools
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple

import msgspec
import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from tqdm import tqdm

from config import Config, get_config
from .baseline_mlp import BaselineConfig, delay_robustness_curve, train_baseline
from .datasets import Dataset, load_circles_csv, load_mnist_split, make_circles_split, save_circles_csv
from .error_routing import alignment_metrics, apply_constraints
from .errors import (ConfigurationError, CTNetError, DivergenceError, IntegrationError,
                     ScheduleExhaustedError, StepBudgetError)
from .metrics import MovingAccuracy, weight_norms
from .network_core import ContinuousNetwork, NetworkConfig
from .ode_engine import SolverConfig, SolverStats, StepOutcome, integrate
from .presentation import ScheduleParams, presentation_order
from .state import NetworkState

logger = logging.getLogger(__name__)

RUN_FAILURES = (IntegrationError, StepBudgetError, ScheduleExhaustedError, DivergenceError)


# ============================================================================
# CONFIGURATION
# ============================================================================

class DatasetRef(BaseModel):
    """Référence vers un jeu de données (section `dataset`)"""

    model_config = ConfigDict(frozen=True, extra='forbid')

    name: Literal['mnist7x7', 'circles'] = 'mnist7x7'
    path: Optional[str] = None
    train_limit: Optional[int] = Field(None, ge=0)
    n_train: int = Field(Config.CIRCLES_TRAIN, ge=0)
    n_test: int = Field(Config.CIRCLES_TEST, ge=0)
    noise_std: float = Field(Config.CIRCLES_NOISE, ge=0)
    radius_factor: float = Field(Config.CIRCLES_FACTOR, gt=0, lt=1)
    seed: int = 0
    cache: bool = False

    @property
    def input_dim(self) -> int:
        return 49 if self.name == 'mnist7x7' else 2

    @property
    def num_classes(self) -> int:
        return 10 if self.name == 'mnist7x7' else 2

    def load(self) -> Tuple[Dataset, Dataset]:
        """Charge (apprentissage, test)"""
        if self.name == 'mnist7x7':
            return load_mnist_split(self.path, self.train_limit)

        if self.n_train == 0:
            raise ConfigurationError("Jeu d'apprentissage vide")
        cache_dir = self.cache_dir
        if cache_dir:
            key = self.circles_key()
            train_csv = os.path.join(cache_dir, f'circles_{key}_train.csv')
            test_csv = os.path.join(cache_dir, f'circles_{key}_test.csv')
        if cache_dir and os.path.exists(train_csv) and os.path.exists(test_csv):
            logger.debug("Cercles relus depuis le cache %s", train_csv)
            train, test = load_circles_csv(train_csv), load_circles_csv(test_csv)
        else:
            train, test = make_circles_split(self.n_train, self.n_test, self.noise_std,
                                             self.radius_factor, self.seed)
            if cache_dir:
                os.makedirs(cache_dir, exist_ok=True)
                save_circles_csv(train, train_csv)
                save_circles_csv(test, test_csv)
        if self.train_limit is not None:
            train = train.subset(np.arange(min(self.train_limit, len(train))))
        return train, test

    @property
    def cache_dir(self) -> Optional[str]:
        """Dossier du cache CSV des cercles : `path`, sinon CACHE_DIR du profil si `cache`"""
        if self.path:
            return self.path
        return get_config().CACHE_DIR if self.cache else None

    def circles_key(self) -> str:
        """Empreinte des paramètres de génération (nom des fichiers du cache)"""
        params = json.dumps([self.n_train, self.n_test, self.noise_std, self.radius_factor, self.seed])
        return hashlib.sha256(params.encode('utf-8')).hexdigest()[:16]


class EvalProtocol(BaseModel):
    """Cadences de mesure (section `eval`)"""

    model_config = ConfigDict(frozen=True, extra='forbid')

    test_size: int = Field(Config.TEST_SIZE, ge=1)
    checkpoint_every: int = Field(Config.CHECKPOINT_EVERY, ge=1)
    eval_every: int = Field(Config.EVAL_EVERY, ge=1)
    ma_window: int = Field(Config.MOVING_AVERAGE_WINDOW, ge=1)
    alignment: bool = True
    trace_windows: Tuple[Tuple[float, float], ...] = ()


SWEEP_PARAMETERS = {
    'delay': ('schedule', 'delay'),
    'sample_time': ('schedule', 'sample_time'),
    'buffer_time': ('schedule', 'buffer_time'),
    'tau_prop': ('network', 'tau_prop'),
    'tau_plas_W': ('network', 'tau_plas_W'),
    'tau_plas_V': ('network', 'tau_plas_V'),
    'tau_dec_W': ('network', 'tau_dec_W'),
    'tau_dec_V': ('network', 'tau_dec_V'),
    'noise_std': ('network', 'noise_std'),
    'num_samples': (None, 'num_samples'),
}
# paramètres composés : τ_plas / τ_dec (W et V ensemble), Δ/T, profondeur
SWEEP_ALIASES = ('tau_plas', 'tau_dec', 'delay_ratio', 'hidden_layers')


class SweepAxis(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')

    parameter: str
    values: Tuple[float, ...]

    @model_validator(mode='after')
    def _check(self):
        if self.parameter not in SWEEP_PARAMETERS and self.parameter not in SWEEP_ALIASES:
            raise ValueError(f"Paramètre de balayage inconnu : '{self.parameter}'")
        if not self.values:
            raise ValueError(f"Axe '{self.parameter}' sans valeurs")
        return self


class SweepSpec(BaseModel):
    """Au plus deux axes de balayage"""
    model_config = ConfigDict(frozen=True, extra='forbid')

    axes: Tuple[SweepAxis, ...] = ()
    # affectations communes à toutes les cellules (ex. delay_ratio = 0.5)
    fixed: Dict[str, float] = {}

    @model_validator(mode='after')
    def _check(self):
        if len(self.axes) > 2:
            raise ValueError("Au plus deux axes de balayage")
        names = [a.parameter for a in self.axes]
        if len(set(names)) != len(names):
            raise ValueError("Axes de balayage en double")
        unknown = [k for k in self.fixed if k not in SWEEP_PARAMETERS and k not in SWEEP_ALIASES]
        if unknown:
            raise ValueError(f"Paramètres fixes inconnus : {unknown}")
        return self

    def cells(self) -> List[Tuple[Tuple[str, float], ...]]:
        grids = [[(a.parameter, v) for v in a.values] for a in self.axes]
        return [tuple(cell) for cell in itertools.product(*grids)]

    def assignments(self, cell: Sequence[Tuple[str, float]]) -> List[Tuple[str, float]]:
        return list(self.fixed.items()) + list(cell)


class ExperimentConfig(BaseModel):
    """Configuration complète d'une expérience"""

    model_config = ConfigDict(frozen=True, extra='forbid', ser_json_inf_nan='constants')

    name: str = 'experiment'
    network: NetworkConfig = NetworkConfig()
    schedule: ScheduleParams = ScheduleParams()
    solver: SolverConfig = SolverConfig()
    dataset: DatasetRef = DatasetRef()
    eval: EvalProtocol = EvalProtocol()
    baseline: BaselineConfig = BaselineConfig()
    sweep: Optional[SweepSpec] = None
    num_samples: int = Field(5000, ge=0)
    repeats: int = Field(1, ge=1)
    seed: int = Field(0, ge=0)
    output_dir: str = Config.OUTPUT_DIR

    @model_validator(mode='after')
    def _check_experiment(self):
        widths = self.network.layer_widths
        if widths[0] != self.dataset.input_dim:
            raise ValueError(f"Couche d'entrée de largeur {widths[0]}, le jeu "
                             f"'{self.dataset.name}' a {self.dataset.input_dim} composantes")
        if widths[-1] != self.dataset.num_classes:
            raise ValueError(f"Couche de sortie de largeur {widths[-1]}, le jeu "
                             f"'{self.dataset.name}' a {self.dataset.num_classes} classes")
        if self.sweep is not None:
            for cell in self.sweep.cells():
                with_parameters(self.model_copy(update={'sweep': None}), self.sweep.assignments(cell))
        return self

    def config_hash(self) -> str:
        payload = self.model_dump_json(exclude={'output_dir'})
        return hashlib.sha256(payload.encode('utf-8')).hexdigest()


def with_parameters(cfg: ExperimentConfig, assignments: Sequence[Tuple[str, float]]) -> ExperimentConfig:
    """
    Copie validée de `cfg` avec des paramètres de balayage appliqués

    `delay_ratio` est appliqué après `sample_time` pour que Δ = r·T utilise le T de la cellule.
    """
    data = cfg.model_dump()
    ratio = None
    for name, value in assignments:
        if name == 'delay_ratio':
            ratio = value
        elif name == 'tau_plas':
            data['network']['tau_plas_W'] = data['network']['tau_plas_V'] = value
        elif name == 'tau_dec':
            data['network']['tau_dec_W'] = data['network']['tau_dec_V'] = value
        elif name == 'hidden_layers':
            widths = data['network']['layer_widths']
            if int(value) != value or value < 0:
                raise ConfigurationError(f"Nombre de couches cachées invalide : {value}")
            hidden = widths[1] if len(widths) > 2 else widths[-1]
            data['network']['layer_widths'] = (widths[0],) + (hidden,) * int(value) + (widths[-1],)
            data['network']['activations'] = None
        elif name in SWEEP_PARAMETERS:
            section, key = SWEEP_PARAMETERS[name]
            target = data if section is None else data[section]
            target[key] = int(value) if key == 'num_samples' else value
        else:
            raise ConfigurationError(f"Paramètre de balayage inconnu : '{name}'")
    if ratio is not None:
        data['schedule']['delay'] = ratio * data['schedule']['sample_time']
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigurationError(
            f"Valeurs de balayage invalides {dict(assignments)} : {e.errors()[0]['msg']}"
        ) from e


# ============================================================================
# ENREGISTREMENTS
# ============================================================================

class Checkpoint(msgspec.Struct):
    sample: int
    sim_time: float
    train_accuracy: Optional[float]
    test_accuracy: Optional[float]
    weight_norms_W: List[float]
    weight_norms_V: List[float]
    alignment_v_w: List[Optional[float]] = []
    alignment_gradient: List[Optional[float]] = []


class SolverStatsRecord(msgspec.Struct):
    steps: int = 0
    accepted: int = 0
    rejected: int = 0
    rhs_evals: int = 0


class RunRecord(msgspec.Struct):
    config_hash: str
    name: str
    seed: int
    status: str
    checkpoints: List[Checkpoint]
    solver: SolverStatsRecord
    wall_time: float
    final_train_accuracy: Optional[float] = None
    final_test_accuracy: Optional[float] = None
    error: Optional[str] = None
    dataset: Dict[str, Any] = {}
    parameters: Dict[str, float] = {}


def encode_record(record: RunRecord) -> bytes:
    return msgspec.json.encode(record)


def decode_record(payload: bytes) -> RunRecord:
    return msgspec.json.decode(payload, type=RunRecord)


# ============================================================================
# EXÉCUTION UNIQUE
# ============================================================================

@dataclass
class RunOutcome:
    """Enregistrement plus artefacts lourds (état final, traces)"""
    record: RunRecord
    state: Optional[NetworkState] = None
    traces: List[Dict[str, float]] = field(default_factory=list)
    failure: Optional[CTNetError] = None

    def traces_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.traces)


class ExperimentRunner:
    """Intègre le système couplé sur tout le flux de présentation"""

    def __init__(self, cfg: ExperimentConfig, train: Optional[Dataset] = None,
                 test: Optional[Dataset] = None, show_progress: bool = False):
        self.cfg = cfg
        if train is None or test is None:
            train, test = cfg.dataset.load()
        if len(train) == 0:
            raise ConfigurationError("Jeu d'apprentissage vide")
        if len(test) == 0:
            raise ConfigurationError("Jeu de test vide")
        self.train = train
        self.test = test.subset(np.arange(min(cfg.eval.test_size, len(test))))
        self.network = ContinuousNetwork(cfg.network)
        self.show_progress = show_progress
        self.stats = SolverStats()

    # --------------------------------------------------------------
    def _test_stream(self):
        return self.cfg.schedule.build(self.test.inputs, self.test.targets(), delay=0.0)

    def _checkpoint(self, state: NetworkState, sample: int, train_acc: Optional[float],
                    test_acc: Optional[float]) -> Checkpoint:
        align_vw: List[Optional[float]] = []
        align_grad: List[Optional[float]] = []
        if self.cfg.eval.alignment and self.cfg.network.num_layers >= 2:
            metrics = alignment_metrics(self.network.strategy, state, self.network.activations,
                                        self.cfg.network.bias_unit, seed=self.cfg.seed,
                                        sigma_prime_gate=self.cfg.network.sigma_prime_gate)
            align_vw, align_grad = metrics['v_w'], metrics['gradient']
        return Checkpoint(sample=sample, sim_time=float(state.t), train_accuracy=train_acc,
                          test_accuracy=test_acc, weight_norms_W=weight_norms(state.W),
                          weight_norms_V=weight_norms(state.V),
                          alignment_v_w=align_vw, alignment_gradient=align_grad)

    def _in_trace_window(self, t: float) -> bool:
        return any(lo <= t <= hi for lo, hi in self.cfg.eval.trace_windows)

    # --------------------------------------------------------------
    def run(self) -> RunOutcome:
        cfg = self.cfg
        started = time.perf_counter()
        net = self.network
        layout = net.layout
        strategy = net.strategy
        d_out = cfg.network.layer_widths[-1]

        state = net.initial_state(seed=cfg.seed)
        reference_V = [v.copy() for v in state.V]
        test_stream = self._test_stream()
        checkpoints: List[Checkpoint] = []
        traces: List[Dict[str, float]] = []
        moving = MovingAccuracy(cfg.eval.ma_window)
        status, error = 'ok', None
        failure = None
        last_test = None

        try:
            last_test = net.evaluate(state, test_stream, cfg.solver, self.stats).accuracy
            checkpoints.append(self._checkpoint(state, 0, None, last_test))

            if cfg.num_samples > 0:
                order = presentation_order(len(self.train), cfg.num_samples, cfg.seed)
                labels = self.train.labels[order]
                schedule = cfg.schedule.build(self.train.inputs[order], self.train.targets()[order])
                readouts = schedule.readout_times()
                f = net.rhs(schedule)
                y = state.flatten()
                cursor = [0]
                constrained = strategy.kind in ('tied', 'fa', 'dfa')

                def observer(outcome: StepOutcome):
                    t = outcome.t_new
                    while cursor[0] < len(readouts) and t >= readouts[cursor[0]]:
                        prediction = int(np.argmax(outcome.state_new[layout.z_size - d_out:layout.z_size]))
                        moving.update(prediction == int(labels[cursor[0]]))
                        cursor[0] += 1
                    if cfg.eval.trace_windows and self._in_trace_window(t):
                        traces.append(self._trace_row(t, outcome.state_new))
                    if constrained:
                        current = NetworkState.unflatten(layout, outcome.state_new, t)
                        return apply_constraints(strategy, current, reference_V).flatten()
                    return None

                chunk = cfg.eval.checkpoint_every
                starts = range(0, cfg.num_samples, chunk)
                for first in tqdm(starts, desc=f"Apprentissage {cfg.name}",
                                  disable=not self.show_progress):
                    last = min(first + chunk, cfg.num_samples) - 1
                    t_a = schedule.slot(first)[0]
                    t_b = schedule.slot(last)[1]
                    y = integrate(f, t_a, t_b, y, schedule.breakpoints(t_a, t_b), cfg.solver,
                                  observer, self.stats, dt0=self.stats.last_dt)
                    state = NetworkState.unflatten(layout, y, t_b)

                    seen = last + 1
                    test_acc = None
                    if seen % cfg.eval.eval_every == 0 or seen == cfg.num_samples:
                        test_acc = net.evaluate(state, test_stream, cfg.solver, self.stats).accuracy
                        last_test = test_acc
                    checkpoints.append(self._checkpoint(state, seen, moving.accuracy, test_acc))
        except RUN_FAILURES as e:
            status, error = 'failed', str(e)
            failure = e
            logger.error("❌ Exécution '%s' (graine %d) interrompue : %s", cfg.name, cfg.seed, e)

        record = RunRecord(
            config_hash=cfg.config_hash(),
            name=cfg.name,
            seed=cfg.seed,
            status=status,
            checkpoints=checkpoints,
            solver=SolverStatsRecord(self.stats.steps, self.stats.accepted,
                                     self.stats.rejected, self.stats.rhs_evals),
            wall_time=time.perf_counter() - started,
            final_train_accuracy=moving.accuracy,
            final_test_accuracy=last_test if status == 'ok' else None,
            error=error,
            dataset={'name': self.train.name, 'train_size': len(self.train),
                     'test_size': len(self.test), **{k: v for k, v in self.train.metadata.items()
                                                      if isinstance(v, (int, float, str))}},
        )
        if status == 'ok':
            logger.info("✅ Exécution '%s' (graine %d) : test %.4f, %d pas",
                        cfg.name, cfg.seed, last_test if last_test is not None else float('nan'),
                        self.stats.accepted)
        return RunOutcome(record, state, traces, failure)

    def _trace_row(self, t: float, y: np.ndarray) -> Dict[str, float]:
        zs, Ws, _ = self.network.layout.views(y)
        row = {'t': float(t)}
        for k, value in enumerate(zs[-1]):
            row[f'z_out_{k}'] = float(value)
        for i, W in enumerate(Ws):
            row[f'w_norm_{i + 1}'] = float(np.linalg.norm(W))
        return row


def run_single(cfg: ExperimentConfig, train: Optional[Dataset] = None,
               test: Optional[Dataset] = None, show_progress: bool = False) -> RunRecord:
    """Exécute une configuration et retourne son enregistrement"""
    return ExperimentRunner(cfg, train, test, show_progress).run().record


# ============================================================================
# BALAYAGES
# ============================================================================

@dataclass
class SweepResult:
    table: pd.DataFrame
    records: List[RunRecord]


def _run_cell(cfg: ExperimentConfig, parameters: Dict[str, float]) -> RunRecord:
    try:
        record = run_single(cfg)
    except CTNetError as e:
        record = RunRecord(config_hash=cfg.config_hash(), name=cfg.name, seed=cfg.seed,
                           status='failed', checkpoints=[], solver=SolverStatsRecord(),
                           wall_time=0.0, error=str(e))
    record.parameters = dict(parameters)
    return record


def sweep_jobs(cfg: ExperimentConfig) -> List[Tuple[ExperimentConfig, Dict[str, float]]]:
    """Une configuration par (cellule, répétition) ; graines seed + répétition"""
    base = cfg.model_copy(update={'sweep': None})
    cells = cfg.sweep.cells() if cfg.sweep is not None else [()]
    jobs = []
    for cell in cells:
        cell_cfg = with_parameters(base, cfg.sweep.assignments(cell) if cfg.sweep is not None else cell)
        for r in range(cfg.repeats):
            seeded = cell_cfg.model_copy(update={
                'seed': cfg.seed + r,
                'name': f"{cfg.name}[{', '.join(f'{k}={v:g}' for k, v in cell)}]#{r}",
            })
            jobs.append((seeded, dict(cell)))
    return jobs


def summarize_sweep(records: Sequence[RunRecord], axes: Sequence[str]) -> pd.DataFrame:
    """Table (valeurs des axes, précision moyenne, écart-type, n, échecs), triée par axes"""
    groups: Dict[Tuple[float, ...], List[RunRecord]] = {}
    for record in records:
        key = tuple(record.parameters.get(a) for a in axes)
        groups.setdefault(key, []).append(record)
    rows = []
    for key in sorted(groups):
        group = groups[key]
        accs = [r.final_test_accuracy for r in group
                if r.status == 'ok' and r.final_test_accuracy is not None]
        row = dict(zip(axes, key))
        row.update({
            'mean_accuracy': float(np.mean(accs)) if accs else float('nan'),
            'std_accuracy': float(np.std(accs)) if accs else float('nan'),
            'n': len(accs),
            'n_failed': len(group) - len(accs),
        })
        rows.append(row)
    return pd.DataFrame(rows, columns=list(axes) + ['mean_accuracy', 'std_accuracy', 'n', 'n_failed'])


def run_sweep(cfg: ExperimentConfig, workers: Optional[int] = None,
              show_progress: Optional[bool] = None) -> SweepResult:
    """
    Exécute toutes les cellules du balayage (indépendantes, parallélisables)

    Les échecs d'une cellule sont enregistrés et le balayage continue.
    Sans valeur explicite, `workers` et `show_progress` suivent le profil actif.
    """
    settings = get_config()
    show_progress = settings.SHOW_PROGRESS if show_progress is None else show_progress
    jobs = sweep_jobs(cfg)
    axes = [a.parameter for a in cfg.sweep.axes] if cfg.sweep is not None else []
    workers = workers or settings.WORKERS
    logger.info("🚀 Balayage '%s' : %d exécutions, %d processus", cfg.name, len(jobs), workers)

    records: List[RunRecord] = []
    if workers <= 1:
        for job_cfg, parameters in tqdm(jobs, desc="Balayage", disable=not show_progress):
            records.append(_run_cell(job_cfg, parameters))
    else:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            futures = [executor.submit(_run_cell, job_cfg, parameters) for job_cfg, parameters in jobs]
            for future in tqdm(as_completed(futures), total=len(futures), desc="Balayage",
                               disable=not show_progress):
                records.append(future.result())

    records.sort(key=lambda r: (tuple(r.parameters.get(a) for a in axes), r.seed))
    failed = sum(r.status != 'ok' for r in records)
    if failed:
        logger.warning("⚠️ %d exécution(s) en échec sur %d", failed, len(records))
    return SweepResult(summarize_sweep(records, axes), records)


# ============================================================================
# COMPARAISON À LA RÉFÉRENCE DISCRÈTE
# ============================================================================

def paired_baseline(cfg: ExperimentConfig, seed: int) -> BaselineConfig:
    """Référence aux mêmes largeurs, même budget et même ordre de présentation"""
    return BaselineConfig.model_validate({
        **cfg.baseline.model_dump(),
        'layer_widths': cfg.network.layer_widths,
        'activations': cfg.network.resolved_activations,
        'num_samples': cfg.num_samples,
        'seed': seed,
        'ma_window': cfg.eval.ma_window,
    })


def _mean_std(values: Sequence[Optional[float]]) -> Tuple[float, float, int]:
    values = [v for v in values if v is not None and not math.isnan(v)]
    if not values:
        return float('nan'), float('nan'), 0
    return float(np.mean(values)), float(np.std(values)), len(values)


def compare_with_baseline(cfg: ExperimentConfig, show_progress: bool = False) -> pd.DataFrame:
    """
    Table appariée continu / discret : précisions d'apprentissage et de test (moyenne ± écart-type)

    Chaque répétition r partage la graine seed + r entre les deux modèles.
    """
    train, test = cfg.dataset.load()
    if len(train) == 0 or len(test) == 0:
        raise ConfigurationError("Jeu de données vide : comparaison impossible")
    test = test.subset(np.arange(min(cfg.eval.test_size, len(test))))

    results = {'continuous': ([], []), 'discrete': ([], [])}
    for r in tqdm(range(cfg.repeats), desc="Comparaison", disable=not show_progress):
        seed = cfg.seed + r
        record = run_single(cfg.model_copy(update={'seed': seed}), train, test)
        results['continuous'][0].append(record.final_train_accuracy)
        results['continuous'][1].append(record.final_test_accuracy)
        base = train_baseline(paired_baseline(cfg, seed), train, test)
        results['discrete'][0].append(base.train_accuracy)
        results['discrete'][1].append(base.test_accuracy)

    rows = []
    for model, (train_accs, test_accs) in results.items():
        train_mean, train_std, _ = _mean_std(train_accs)
        test_mean, test_std, n = _mean_std(test_accs)
        rows.append({'model': model, 'dataset': cfg.dataset.name,
                     'layer_widths': ' '.join(map(str, cfg.network.layer_widths)),
                     'train_mean': train_mean, 'train_std': train_std,
                     'test_mean': test_mean, 'test_std': test_std, 'n': n})
    return pd.DataFrame(rows)


def delay_ratio_comparison(cfg: ExperimentConfig, ratios: Sequence[float]) -> pd.DataFrame:
    """Courbe de robustesse au retard : référence tramée et réseau continu à Δ = r·T"""
    train, test = cfg.dataset.load()
    test = test.subset(np.arange(min(cfg.eval.test_size, len(test))))

    def continuous(ratio: float) -> Optional[float]:
        return run_single(with_parameters(cfg, [('delay_ratio', ratio)]), train, test).final_test_accuracy

    return delay_robustness_curve(paired_baseline(cfg, cfg.seed), train, test, ratios, continuous)
