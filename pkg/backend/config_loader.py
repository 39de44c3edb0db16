"""
Lecture des fichiers de configuration `section.cle = valeur`
"""

import json
import logging
import os
from typing import Any, Dict, Iterable, Mapping, Optional

from dotenv import dotenv_values
from pydantic import ValidationError

from .errors import ConfigurationError
from .experiment_runner import ExperimentConfig

logger = logging.getLogger(__name__)


def parse_value(raw: Optional[str]) -> Any:
    """JSON si possible, sinon liste séparée par des virgules, sinon nombre ou texte brut"""
    if raw is None:
        return None
    raw = raw.strip()
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        pass
    if ',' in raw:
        return [parse_value(part) for part in raw.split(',') if part.strip()]
    try:
        return float(raw)  # accepte inf / -inf
    except ValueError:
        return raw


def nest(flat: Mapping[str, Any]) -> Dict[str, Any]:
    """{'network.tau_prop': 0.01} -> {'network': {'tau_prop': 0.01}}"""
    tree: Dict[str, Any] = {}
    for key, value in flat.items():
        parts = key.split('.')
        node = tree
        for part in parts[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigurationError(f"Clé '{key}' en conflit avec une valeur déjà définie")
            node = child
        node[parts[-1]] = value
    return tree


def deep_merge(base: Mapping[str, Any], override: Mapping[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, Mapping) and isinstance(merged.get(key), Mapping):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def read_config_file(path: str) -> Dict[str, Any]:
    """Lit un fichier de configuration et retourne l'arbre des valeurs"""
    if not os.path.exists(path):
        raise ConfigurationError(f"Fichier de configuration introuvable : {path}")
    values = dotenv_values(path)
    logger.debug("Configuration lue depuis %s (%d clés)", path, len(values))
    return nest({key: parse_value(value) for key, value in values.items()})


def parse_overrides(assignments: Iterable[str]) -> Dict[str, Any]:
    """Paires `section.cle=valeur` de la ligne de commande"""
    flat = {}
    for item in assignments:
        if '=' not in item:
            raise ConfigurationError(f"Affectation invalide '{item}' (attendu cle=valeur)")
        key, value = item.split('=', 1)
        flat[key.strip()] = parse_value(value)
    return nest(flat)


def build_experiment_config(*layers: Mapping[str, Any]) -> ExperimentConfig:
    """Fusionne les couches de valeurs (la dernière l'emporte) et valide"""
    merged: Dict[str, Any] = {}
    for layer in layers:
        if layer:
            merged = deep_merge(merged, layer)
    try:
        return ExperimentConfig.model_validate(merged)
    except ValidationError as e:
        first = e.errors()[0]
        where = '.'.join(str(p) for p in first['loc'])
        raise ConfigurationError(f"Configuration invalide ({where}) : {first['msg']}") from e


def load_experiment_config(path: Optional[str] = None, base: Optional[Mapping[str, Any]] = None,
                           overrides: Optional[Mapping[str, Any]] = None) -> ExperimentConfig:
    """
    Configuration d'expérience : base (préréglage) < fichier < surcharges CLI

    Args:
        path: Fichier `section.cle = valeur` (optionnel)
        base: Valeurs de départ, typiquement un préréglage
        overrides: Valeurs prioritaires
    """
    file_values = read_config_file(path) if path else {}
    return build_experiment_config(base or {}, file_values, overrides or {})
