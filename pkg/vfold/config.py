# vfold/config.py
"""
VFOLD Configuration and Constants

This module contains all configuration settings, constants, and default values
for the VFOLD library, plus the PipelineConfig record that every pipeline
stage reads its tunables from.
"""

import hashlib
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, Optional, Union

from .exceptions import ConfigError


class Config:
    """
    VFOLD Configuration class - All settings in one place

    Attributes:
        VFOLD_VERSION: Current version of the library
        RAW_MAGIC: Magic bytes opening a raw-planar frame file
        DEFAULT_FPS: Frame rate assumed when a source carries none
        FRAME_WIDTH / FRAME_HEIGHT: Default synthetic frame size
        CROP_SIZE: Object crop side the lock radius is derived from
        TRACK_DECIMALS: Decimal places in track / detection CSV files
        FEATURE_SIG_DIGITS: Significant digits in feature CSV files
        PGM16_MAXVAL: Largest value a 16-bit PGM can hold
    """

    # =====================================================================
    # VERSION INFORMATION
    # =====================================================================
    VFOLD_VERSION = "1.0.0"

    # =====================================================================
    # FRAME STORE
    # =====================================================================
    RAW_MAGIC = b"FOLD"
    RAW_HEADER_FORMAT = "<4sIIII"     # magic | width | height | frame_count | fps_milli
    RAW_FILENAME = "frames.raw"
    IMAGE_SUFFIXES = ('.pgm', '.png')
    DEFAULT_FPS = 30.0
    MIN_FRAMES = 2
    LUMA_WEIGHTS = (0.299, 0.587, 0.114)

    # =====================================================================
    # DATA CONVENTIONS
    # =====================================================================
    FRAME_WIDTH = 698
    FRAME_HEIGHT = 528
    CROP_SIZE = 26                    # lock radius default = CROP_SIZE / 2
    CLASS_NAMES = ("poor", "good", "excellent")
    WHO_GRADES = ("A", "B", "C", "D")

    # =====================================================================
    # FILE FORMATS
    # =====================================================================
    TRACK_DECIMALS = 6
    FEATURE_SIG_DIGITS = 9
    PGM16_MAXVAL = 65535
    CONFIG_FILENAME = "config.cfg"
    COMMENT_CHAR = '#'
    KEY_VALUE_DELIMITER = '='

    # =====================================================================
    # NUMERICS
    # =====================================================================
    ANGLE_EPSILON = 1e-9              # radians treated as no rotation
    MASS_TOLERANCE = 0.02             # relative mass drift allowed by rotation

    # =====================================================================
    # PERFORMANCE SETTINGS
    # =====================================================================
    DEFAULT_JOBS = 1

    # =====================================================================
    # LOGGING
    # =====================================================================
    VERBOSE = False                   # set by configure_logging

    # =====================================================================
    # CLASS METHODS
    # =====================================================================

    @classmethod
    def get(cls, key: str, default=None):
        """Get configuration value"""
        return getattr(cls, key, default)

    @classmethod
    def set(cls, key: str, value) -> None:
        """Set configuration value"""
        setattr(cls, key, value)

    @classmethod
    def to_dict(cls) -> dict:
        """Convert all settings to dictionary"""
        return {
            k: v for k, v in cls.__dict__.items()
            if not k.startswith('_') and k.isupper()
        }

    @classmethod
    def reset(cls) -> None:
        """Reset mutable settings to defaults"""
        cls.DEFAULT_JOBS = 1
        cls.VERBOSE = False


# =========================================================================
# PIPELINE CONFIGURATION
# =========================================================================

THRESHOLD_OTSU = "otsu"
THRESHOLD_FIXED_PREFIX = "fixed:"
POLARITY_BRIGHT = "bright-object"
POLARITY_DARK = "dark-object"
FPS_AUTO = "auto"

# Parsers used when reading key = value files; fps additionally accepts "auto".
_FIELD_PARSERS = {
    "threshold": str,
    "polarity": str,
    "min_area": int,
    "gate": float,
    "miss_tolerance": int,
    "min_track_length": int,
    "r": float,
    "min_displacement": float,
    "nu_x": int,
    "nu_y": int,
    "nu_z": int,
    "e": int,
    "passes": int,
    "d": int,
    "um_per_px": float,
    "fps": float,
}


@dataclass(frozen=True)
class PipelineConfig:
    """
    Every tunable of the pipeline, one field per design default.

    Attributes:
        threshold: ``otsu`` or ``fixed:T`` with T in [0, 255]
        polarity: ``bright-object`` or ``dark-object``
        min_area: Smallest component kept by detection (pixels)
        gate: Largest matching distance between frames (pixels)
        miss_tolerance: Consecutive unmatched frames before a track ends
        min_track_length: Shortest track handed to feature extraction
        r: Lock radius around each barycenter (pixels)
        min_displacement: Start-end distance below which no rotation happens
        nu_x, nu_y, nu_z: Projection step per axis
        e: Mean kernel side (odd)
        passes: Mean-filter rounds
        d: Descriptor side length
        um_per_px: Micrometres per pixel for WHO grading
        fps: Frame-rate override; ``None`` keeps the sequence's own rate
    """

    threshold: str = THRESHOLD_OTSU
    polarity: str = POLARITY_BRIGHT
    min_area: int = 4
    gate: float = 20.0
    miss_tolerance: int = 0
    min_track_length: int = 3
    r: float = Config.CROP_SIZE / 2
    min_displacement: float = 1.0
    nu_x: int = 1
    nu_y: int = 1
    nu_z: int = 1
    e: int = 3
    passes: int = 2
    d: int = 16
    um_per_px: float = 1.0
    fps: Optional[float] = None

    # -----------------------------------------------------------------
    # Derived values
    # -----------------------------------------------------------------

    @property
    def fixed_threshold(self) -> Optional[int]:
        """Integer T for ``fixed:T`` thresholds, ``None`` for Otsu."""
        if self.threshold.startswith(THRESHOLD_FIXED_PREFIX):
            return int(self.threshold[len(THRESHOLD_FIXED_PREFIX):])
        return None

    def step_for(self, axis: str) -> int:
        """Projection step for axis ``X``, ``Y`` or ``Z``."""
        return {"X": self.nu_x, "Y": self.nu_y, "Z": self.nu_z}[axis]

    # -----------------------------------------------------------------
    # Validation / construction
    # -----------------------------------------------------------------

    def validate(self) -> "PipelineConfig":
        """
        Check every field against its declared range

        Returns:
            self, so calls can be chained

        Raises:
            ConfigError: If any field is out of range
        """
        from .validators import ConfigValidator

        is_valid, errors = ConfigValidator.validate(self)
        if not is_valid:
            raise ConfigError("Invalid pipeline configuration", errors=errors)
        return self

    def merged(self, overrides: Dict[str, Any]) -> "PipelineConfig":
        """
        Return a copy with non-``None`` overrides applied

        Args:
            overrides: Field name to value; ``None`` values are skipped

        Raises:
            ConfigError: For unknown field names
        """
        known = {f.name for f in fields(self)}
        updates = {}
        for key, value in overrides.items():
            if value is None:
                continue
            if key not in known:
                raise ConfigError(f"Unknown config key '{key}'", field_name=key)
            updates[key] = value
        return replace(self, **updates)

    @classmethod
    def parse_text(cls, text: str, base: Optional["PipelineConfig"] = None) -> "PipelineConfig":
        """
        Parse ``key = value`` lines on top of ``base`` (defaults when omitted)

        Blank lines and ``#`` comments are ignored.

        Raises:
            ConfigError: On unknown keys or unparsable values
        """
        overrides: Dict[str, Any] = {}
        for lineno, raw_line in enumerate(text.splitlines(), start=1):
            line = raw_line.split(Config.COMMENT_CHAR, 1)[0].strip()
            if not line:
                continue
            if Config.KEY_VALUE_DELIMITER not in line:
                raise ConfigError(f"Line {lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split(Config.KEY_VALUE_DELIMITER, 1))
            parser = _FIELD_PARSERS.get(key)
            if parser is None:
                raise ConfigError(f"Line {lineno}: unknown key '{key}'", field_name=key)
            if key == "fps" and value == FPS_AUTO:
                overrides[key] = None
                continue
            try:
                overrides[key] = parser(value)
            except ValueError:
                raise ConfigError(
                    f"Line {lineno}: cannot parse '{value}' for '{key}'", field_name=key
                )
        base = base or cls()
        # fps = auto must be able to clear an inherited override
        config = base.merged(overrides)
        if "fps" in overrides and overrides["fps"] is None:
            config = replace(config, fps=None)
        return config

    @classmethod
    def from_file(cls, path: Union[str, Path], base: Optional["PipelineConfig"] = None) -> "PipelineConfig":
        """Read a ``key = value`` config file (see ``parse_text``)."""
        from .utils import read_text

        return cls.parse_text(read_text(path), base=base)

    def to_dict(self) -> Dict[str, Any]:
        """Field name to value, in declaration order"""
        return asdict(self)

    def to_text(self) -> str:
        """
        Deterministic ``key = value`` echo of the effective configuration

        ``parse_text(to_text())`` reproduces the same config.
        """
        lines = [f"# vfold {Config.VFOLD_VERSION} effective configuration"]
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None:
                value = FPS_AUTO
            lines.append(f"{f.name} = {value}")
        return "\n".join(lines) + "\n"

    @classmethod
    def schema_hash(cls) -> str:
        """Short digest of field names and types, printed by ``--version``."""
        signature = ";".join(f"{name}:{parser.__name__}" for name, parser in _FIELD_PARSERS.items())
        return hashlib.sha256(signature.encode("utf-8")).hexdigest()[:12]


# =========================================================================
# PREDEFINED CONFIGURATION PROFILES
# =========================================================================

class ConfigProfiles:
    """Predefined configuration profiles for different use cases"""

    @staticmethod
    def default() -> PipelineConfig:
        """All design defaults (Otsu threshold, bright objects)"""
        return PipelineConfig()

    @staticmethod
    def benchmark(background: int = 40, peak: int = 200) -> PipelineConfig:
        """
        Synthetic benchmark profile

        Sparse blobs over a noisy background make Otsu split the background
        itself, so the threshold sits halfway between background and peak.
        The compact 4x4 descriptor keeps nearest-centroid distances dominated
        by the kinematic block.
        """
        midpoint = background + (peak - background) // 2
        return PipelineConfig(threshold=f"{THRESHOLD_FIXED_PREFIX}{midpoint}", d=4)

    @staticmethod
    def bright_field() -> PipelineConfig:
        """Bright-field illumination: dark objects on a bright background"""
        return PipelineConfig(polarity=POLARITY_DARK)
