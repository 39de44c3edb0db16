"""
Package presets - Catalogue des expériences préréglées
"""

from .experiment_presets import EXPERIMENT_PRESETS, build_preset, preset_values

__all__ = [
    'EXPERIMENT_PRESETS',
    'build_preset',
    'preset_values'
]
