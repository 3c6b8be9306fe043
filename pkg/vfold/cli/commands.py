# vfold/cli/commands.py
"""
CLI Command Utilities

Output formatting and the helpers every subcommand shares: the effective
configuration and input checks.
"""

import sys
from dataclasses import replace
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple

from ..config import ConfigProfiles, FPS_AUTO, PipelineConfig
from ..exceptions import ConfigError

PROFILES = {
    "default": ConfigProfiles.default,
    "benchmark": ConfigProfiles.benchmark,
    "bright-field": ConfigProfiles.bright_field,
}

# argparse dest -> PipelineConfig field
CONFIG_FLAGS = (
    "threshold", "polarity", "min_area", "gate", "miss_tolerance", "min_track_length",
    "r", "min_displacement", "nu_x", "nu_y", "nu_z", "e", "passes", "d", "um_per_px",
)


class CLIFormatter:
    """Format output for CLI"""

    @staticmethod
    def success(message: str) -> None:
        """Print success message"""
        print(f"✅ {message}")

    @staticmethod
    def error(message: str) -> None:
        """Print error message"""
        print(f"❌ {message}", file=sys.stderr)

    @staticmethod
    def info(message: str) -> None:
        """Print info message"""
        print(f"   {message}")

    @staticmethod
    def section(title: str) -> None:
        """Print section header"""
        print(f"\n{'=' * 60}")
        print(f"  {title}")
        print(f"{'=' * 60}\n")


def parse_fps(value: str) -> Optional[float]:
    """``auto`` keeps the source rate; anything else must be a number."""
    if value == FPS_AUTO:
        return None
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"Cannot parse fps '{value}'", field_name="fps")


def build_config(args) -> PipelineConfig:
    """
    Effective config: flags > config file > profile defaults

    Raises:
        ConfigError: Unknown keys or out-of-range values
    """
    config = PROFILES[args.profile]()
    if args.config:
        config = PipelineConfig.from_file(args.config, base=config)
    overrides: Dict[str, object] = {name: getattr(args, name) for name in CONFIG_FLAGS}
    config = config.merged(overrides)
    if args.fps is not None:
        config = replace(config, fps=parse_fps(args.fps))
    return config.validate()


def print_counts(pairs: Sequence[Tuple[str, object]]) -> None:
    width = max(len(name) for name, _ in pairs)
    for name, value in pairs:
        CLIFormatter.info(f"{name + ':':<{width + 1}} {value}")


def require_exists(path: str) -> Path:
    """Path of an existing input, else FileNotFoundError (exit 2)."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Input not found: {path}")
    return path
