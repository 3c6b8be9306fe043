# vfold/__init__.py
"""
VFOLD - Video foldover features
Motion features for micro-objects in grayscale microscopy video

Features:
- Otsu / fixed-threshold segmentation with 8-connected barycenters
- Gated greedy nearest-neighbour tracking
- Per-object foldover height-maps and their X / Y / Z projections
- Kinematic (VCL, VSL, VAP, LIN, STR, WOB) and descriptor feature vectors
- WHO motility grading, nearest-centroid evaluation, synthetic benchmark
"""

__version__ = "1.0.0"
__author__ = "VFOLD Development Team"
__license__ = "MIT"

from . import config
from . import exceptions
from . import utils
from . import framestore
from . import segmentation
from . import tracking
from . import foldover
from . import features
from . import classify
from . import synth
from . import core

# Import validators
from . import validators

# Import serializers
from . import serializers

# Export main functions
from .config import ConfigProfiles, PipelineConfig
from .core import FoldoverPipeline, evaluate, run_pipeline
from .exceptions import VFoldError, VFoldIOError, VFoldValidationError
from .framestore import Frame, VideoSequence, load_sequence, write_sequence
from .synth import ObjectSpec, SceneSpec, default_benchmark, generate

__all__ = [
    # Core API
    "FoldoverPipeline",
    "run_pipeline",
    "evaluate",

    # Configuration
    "PipelineConfig",
    "ConfigProfiles",

    # Frames
    "Frame",
    "VideoSequence",
    "load_sequence",
    "write_sequence",

    # Synthetic data
    "SceneSpec",
    "ObjectSpec",
    "generate",
    "default_benchmark",

    # Exceptions
    "VFoldError",
    "VFoldValidationError",
    "VFoldIOError",
]
