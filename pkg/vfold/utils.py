# vfold/utils.py
"""
VFOLD Utility Functions

Helper functions for logging, number formatting, deterministic JSON and
file-system plumbing shared by every pipeline stage.
"""

import json
import logging
import math
from pathlib import Path
from typing import Any, Union

from .config import Config
from .exceptions import VFoldIOError


# =========================================================================
# LOGGING
# =========================================================================

LOGGER_NAME = "vfold"


def get_logger(name: str) -> logging.Logger:
    """
    Get a module logger under the package namespace

    Args:
        name: Module ``__name__`` or short stage name

    Returns:
        Logger named ``vfold.<stage>``
    """
    if name == LOGGER_NAME or name.startswith(LOGGER_NAME + "."):
        return logging.getLogger(name)
    return logging.getLogger(f"{LOGGER_NAME}.{name}")


def configure_logging(verbose: bool = False) -> None:
    """
    Attach a single stderr handler to the package logger

    Args:
        verbose: DEBUG level when True, WARNING otherwise
    """
    Config.set("VERBOSE", verbose)
    logger = logging.getLogger(LOGGER_NAME)
    level = logging.DEBUG if verbose else logging.WARNING
    logger.setLevel(level)
    if not logger.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
        logger.addHandler(handler)


# =========================================================================
# NUMBER FORMATTING
# =========================================================================

def format_fixed(value: float, decimals: int = 6) -> str:
    """
    Format a real with a fixed number of decimals, never printing ``-0``

    Example:
        >>> format_fixed(-0.0000001)
        '0.000000'
    """
    text = f"{value:.{decimals}f}"
    if text.startswith("-") and float(text) == 0.0:
        text = text[1:]
    return text


def format_sig(value: float, digits: int = 9) -> str:
    """
    Format a real with ``digits`` significant digits

    Re-parsing the result and formatting it again yields the same text,
    which is what makes feature CSV round-trips exact.

    Example:
        >>> format_sig(1.0 / 3.0)
        '0.333333333'
    """
    if not math.isfinite(value):
        raise ValueError(f"Cannot format non-finite value: {value}")
    if value == 0.0:
        return "0"
    return f"{value:.{digits}g}"


# =========================================================================
# FILE OPERATIONS
# =========================================================================

def stable_json(data: Any) -> str:
    """Serialize to JSON with sorted keys and a trailing newline."""
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


def ensure_dir(path: Union[str, Path]) -> Path:
    """Create ``path`` (and parents) if missing, wrapping OS errors."""
    path = Path(path)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise VFoldIOError(str(e), filepath=str(path), operation="mkdir")
    return path


def write_text(path: Union[str, Path], text: str) -> None:
    """Write UTF-8 text with ``\\n`` newlines, wrapping OS errors."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    except OSError as e:
        raise VFoldIOError(str(e), filepath=str(path), operation="write")


def read_text(path: Union[str, Path]) -> str:
    """Read UTF-8 text, wrapping OS errors."""
    path = Path(path)
    try:
        return path.read_text(encoding="utf-8")
    except OSError as e:
        raise VFoldIOError(str(e), filepath=str(path), operation="read")


def write_bytes(path: Union[str, Path], payload: bytes) -> None:
    """Write bytes, wrapping OS errors."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(payload)
    except OSError as e:
        raise VFoldIOError(str(e), filepath=str(path), operation="write")


def read_bytes(path: Union[str, Path]) -> bytes:
    """Read bytes, wrapping OS errors."""
    path = Path(path)
    try:
        return path.read_bytes()
    except OSError as e:
        raise VFoldIOError(str(e), filepath=str(path), operation="read")
