"""
Application principale - Simulateur d'apprentissage en temps continu (ligne de commande)
"""

import sys
from functools import wraps
from typing import Any, Dict, Optional, Sequence

import click
import numpy as np
import pandas as pd

from backend.config_loader import load_experiment_config, parse_overrides, parse_value
from backend.datasets import fetch_mnist
from backend.errors import CTNetError
from backend.experiment_runner import (ExperimentConfig, ExperimentRunner, compare_with_baseline,
                                       delay_ratio_comparison, run_sweep)
from backend.network_core import ContinuousNetwork
from backend.overlap_analysis import kernel_curve, simulate_single_synapse
from backend.record_writer import RecordWriter, load_state
from config import get_config
from presets import EXPERIMENT_PRESETS, preset_values

settings = get_config()


# ============================================================================
# UTILITAIRES
# ============================================================================

def handle_errors(f):
    """Décorateur : traduit les erreurs du simulateur en codes de sortie"""
    @wraps(f)
    def decorated_function(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except CTNetError as e:
            click.echo(f"❌ {type(e).__name__} : {e}", err=True)
            sys.exit(e.exit_code)
    return decorated_function


def config_options(f):
    """Options communes : fichier, préréglage, sortie, surcharges"""
    f = click.option('--config', 'config_path', type=click.Path(dir_okay=False),
                     help="Fichier de configuration `section.cle = valeur`")(f)
    f = click.option('--preset', type=click.Choice(sorted(EXPERIMENT_PRESETS)),
                     help="Préréglage de départ")(f)
    f = click.option('--out', 'out_dir', type=click.Path(file_okay=False),
                     help="Dossier de sortie")(f)
    f = click.option('--set', 'assignments', multiple=True, metavar='CLE=VALEUR',
                     help="Surcharge d'une clé (ex. network.tau_prop=0.02)")(f)
    f = click.option('--seed', type=int, help="Graine de base")(f)
    f = click.option('--num-samples', type=int, help="Nombre de présentations d'apprentissage")(f)
    f = click.option('--delay', type=float, help="Retard de l'erreur Δ (s)")(f)
    f = click.option('--sample-time', type=float, help="Durée d'échantillon T (s)")(f)
    return f


def build_config(config_path: Optional[str], preset: Optional[str], out_dir: Optional[str],
                 assignments: Sequence[str], seed: Optional[int] = None,
                 num_samples: Optional[int] = None, delay: Optional[float] = None,
                 sample_time: Optional[float] = None) -> ExperimentConfig:
    overrides: Dict[str, Any] = parse_overrides(assignments)
    shortcuts = {'seed': seed, 'num_samples': num_samples}
    overrides.update({k: v for k, v in shortcuts.items() if v is not None})
    schedule = dict(overrides.get('schedule', {}))
    if delay is not None:
        schedule['delay'] = delay
    if sample_time is not None:
        schedule['sample_time'] = sample_time
    if schedule:
        overrides['schedule'] = schedule
    if out_dir:
        overrides['output_dir'] = out_dir
    base = preset_values(preset) if preset else {}
    return load_experiment_config(config_path, base, overrides)


def prepare_output(cfg: ExperimentConfig) -> RecordWriter:
    settings.init_app(cfg.output_dir)
    return RecordWriter(cfg.output_dir)


def echo_result(result: Dict[str, Any]):
    marker = "✅" if result.get('success') else "❌"
    click.echo(f"{marker} {result.get('message', '')} : {result.get('path')}")


# ============================================================================
# COMMANDES
# ============================================================================

@click.group()
def cli():
    """Simulateur de réseaux en temps continu : inférence et plasticité couplées"""


@cli.command()
@config_options
@click.option('--traces/--no-traces', default=False, help="Écrit traces.csv (fenêtres eval.trace_windows)")
@handle_errors
def run(config_path, preset, out_dir, assignments, seed, num_samples, delay, sample_time, traces):
    """Exécution unique : record.json, state.npz et éventuellement traces.csv"""
    cfg = build_config(config_path, preset, out_dir, assignments, seed, num_samples, delay, sample_time)
    writer = prepare_output(cfg)
    click.echo(f"🚀 Exécution '{cfg.name}' ({cfg.num_samples} présentations)")

    outcome = ExperimentRunner(cfg, show_progress=settings.SHOW_PROGRESS).run()
    echo_result(writer.write_record(outcome.record))
    if outcome.state is not None:
        echo_result(writer.write_state(outcome.state))
    if traces:
        echo_result(writer.write_table(outcome.traces_frame(), 'traces.csv'))

    record = outcome.record
    if outcome.failure is not None:
        click.echo(f"❌ Échec : {record.error}", err=True)
        sys.exit(outcome.failure.exit_code)
    click.echo(f"📊 Précision de test finale : {record.final_test_accuracy:.4f}")


@cli.command()
@config_options
@click.option('--workers', type=int, default=None, help="Nombre de processus")
@handle_errors
def sweep(config_path, preset, out_dir, assignments, seed, num_samples, delay, sample_time, workers):
    """Balayage 1-D ou 2-D : heatmap.csv, heatmap.json, records.json"""
    cfg = build_config(config_path, preset, out_dir, assignments, seed, num_samples, delay, sample_time)
    if cfg.sweep is None or not cfg.sweep.axes:
        click.echo("⚠️ Aucun axe de balayage : exécution d'une seule cellule")
    writer = prepare_output(cfg)
    result = run_sweep(cfg, workers=workers, show_progress=settings.SHOW_PROGRESS)
    echo_result(writer.write_table(result.table, 'heatmap.csv'))
    echo_result(writer.write_json_table(result.table, 'heatmap.json'))
    echo_result(writer.write_records(result.records))
    click.echo(result.table.to_string(index=False))


@cli.command(name='eval')
@config_options
@click.option('--state', 'state_path', required=True, type=click.Path(exists=True, dir_okay=False),
              help="État sauvegardé (state.npz)")
@handle_errors
def evaluate_state(config_path, preset, out_dir, assignments, seed, num_samples, delay, sample_time,
                   state_path):
    """Évalue un état sauvegardé sur le jeu de test, dynamique figée"""
    cfg = build_config(config_path, preset, out_dir, assignments, seed, num_samples, delay, sample_time)
    writer = prepare_output(cfg)
    _, test = cfg.dataset.load()
    test = test.subset(np.arange(min(cfg.eval.test_size, len(test))))
    network = ContinuousNetwork(cfg.network)
    state = load_state(state_path)
    stream = cfg.schedule.build(test.inputs, test.targets(), delay=0.0)
    result = network.evaluate(state, stream, cfg.solver)

    echo_result(writer.write_table(pd.DataFrame({'label': result.labels,
                                                 'prediction': result.predictions}), 'eval.csv'))
    click.echo(f"📊 Précision de test : {result.accuracy:.4f} ({len(test)} échantillons)")


@cli.command(name='compare-baseline')
@config_options
@click.option('--ratios', default=None, help="Rapports de retard r (ex. 0,0.25,0.5,0.75,1)")
@handle_errors
def compare_baseline(config_path, preset, out_dir, assignments, seed, num_samples, delay, sample_time,
                     ratios):
    """Tableau apparié continu / discret (comparison.csv) et courbe de robustesse au retard"""
    cfg = build_config(config_path, preset, out_dir, assignments, seed, num_samples, delay, sample_time)
    writer = prepare_output(cfg)
    table = compare_with_baseline(cfg, show_progress=settings.SHOW_PROGRESS)
    echo_result(writer.write_table(table, 'comparison.csv'))
    click.echo(table.to_string(index=False))
    if ratios:
        values = parse_value(ratios)
        values = values if isinstance(values, list) else [values]
        curve = delay_ratio_comparison(cfg, [float(r) for r in values])
        echo_result(writer.write_table(curve, 'delay_robustness.csv'))
        click.echo(curve.to_string(index=False))


@cli.command(name='kernel-curve')
@click.option('--sample-time', type=float, default=settings.SAMPLE_TIME, show_default=True)
@click.option('--tau-plas', type=float, default=settings.TAU_PLAS, show_default=True)
@click.option('--span', type=float, default=1.2, show_default=True, help="Δ/T balayé dans [-span, span]")
@click.option('--points', type=int, default=21, show_default=True)
@click.option('--simulate/--no-simulate', default=False, help="Ajoute la simulation d'une synapse isolée")
@click.option('--out', 'out_dir', type=click.Path(file_okay=False), default=settings.OUTPUT_DIR)
@handle_errors
def kernel_curve_command(sample_time, tau_plas, span, points, simulate, out_dir):
    """Courbe (Δ, mise à jour attendue) : kernel_curve.csv"""
    settings.init_app(out_dir)
    writer = RecordWriter(out_dir)
    deltas = np.linspace(-span * sample_time, span * sample_time, points)
    table = kernel_curve(sample_time, tau_plas, deltas)
    if simulate:
        simulated = simulate_single_synapse(deltas, sample_time, tau_plas)
        table['simulated'] = simulated['simulated'].to_numpy()
    echo_result(writer.write_table(table, 'kernel_curve.csv'))


@cli.command(name='fetch-mnist')
@click.option('--dest', type=click.Path(file_okay=False), default=settings.MNIST_DIR, show_default=True)
def fetch_mnist_command(dest):
    """Télécharge les fichiers IDX de MNIST"""
    settings.init_app()
    result = fetch_mnist(dest)
    click.echo(("✅ " if result['success'] else "❌ ") + result['message'])
    if not result['success']:
        sys.exit(1)


@cli.command(name='presets')
def list_presets():
    """Liste les préréglages disponibles"""
    for name in sorted(EXPERIMENT_PRESETS):
        click.echo(f"  • {name}")


# ============================================================================
# DÉMARRAGE
# ============================================================================

if __name__ == '__main__':
    cli()
