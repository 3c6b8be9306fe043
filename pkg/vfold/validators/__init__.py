# vfold/validators/__init__.py
"""
VFOLD Validators Package

Provides range validation, pipeline-config validation, and synthetic-scene validators.
"""

from .ranges import RangeValidator
from .config_validator import ConfigValidator
from .scene_validator import SceneValidator

__all__ = [
    'RangeValidator',
    'ConfigValidator',
    'SceneValidator',
]
