"""
Exceptions du simulateur
"""

from typing import Optional


class CTNetError(Exception):
    """Erreur de base du simulateur"""

    exit_code = 1


class ConfigurationError(CTNetError, ValueError):
    """Configuration invalide (détectée avant toute intégration)"""

    exit_code = 2


class DatasetFormatError(CTNetError):
    """Fichier de données mal formé"""

    exit_code = 3

    def __init__(self, message: str, path: str = None, offset: Optional[int] = None):
        self.path = path
        self.offset = offset
        location = f" (octet {offset})" if offset is not None else ""
        super().__init__(f"{message}{location}" + (f" : {path}" if path else ""))


class IntegrationError(CTNetError):
    """Échec de l'intégration (valeur non finie, rejets répétés au pas minimal)"""

    exit_code = 4

    def __init__(self, message: str, t: float, index: Optional[int] = None):
        self.t = t
        self.index = index
        where = f", composante {index}" if index is not None else ""
        super().__init__(f"{message} à t={t:.6g}{where}")


class StepBudgetError(CTNetError):
    """Budget de pas épuisé avant la fin de l'intervalle"""

    exit_code = 5

    def __init__(self, max_steps: int, t: float, progress: float):
        self.max_steps = max_steps
        self.t = t
        self.progress = progress
        super().__init__(
            f"Budget de {max_steps} pas épuisé à t={t:.6g} "
            f"({progress:.1%} de l'intervalle parcouru)"
        )


class ScheduleExhaustedError(CTNetError):
    """Temps demandé hors de l'horizon du flux de présentation"""

    exit_code = 6

    def __init__(self, t: float, t_start: float, t_end: float):
        self.t = t
        self.t_start = t_start
        self.t_end = t_end
        super().__init__(
            f"t={t:.6g} hors de l'horizon de présentation [{t_start:.6g}, {t_end:.6g}]"
        )


class DivergenceError(CTNetError):
    """Perte non finie pendant l'entraînement"""

    exit_code = 7
