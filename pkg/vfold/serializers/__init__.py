# vfold/serializers/__init__.py
"""
VFOLD Serializers Package

Provides the file formats exchanged between pipeline stages.
"""

from .base import BaseSerializer
from .tracks import DetectionCsvSerializer, TrackCsvSerializer
from .features import FeatureCsvSerializer, LabelCsvSerializer, LabelRecord, label_maps
from .foldover import FoldoverSerializer, clip16
from .pnm import decode_mask, decode_pgm, encode_mask, encode_pgm, read_pgm, write_pgm

__all__ = [
    'BaseSerializer',
    'TrackCsvSerializer',
    'DetectionCsvSerializer',
    'FeatureCsvSerializer',
    'LabelCsvSerializer',
    'LabelRecord',
    'label_maps',
    'FoldoverSerializer',
    'clip16',
    'encode_pgm',
    'decode_pgm',
    'read_pgm',
    'write_pgm',
    'encode_mask',
    'decode_mask',
]
