# vfold/serializers/foldover.py
"""
Foldover Serializer

A foldover is stored as a 16-bit PGM plus a JSON sidecar of the same stem:

    {track_id, gamma, origin, extent_x, extent_y, extent_z, step, start, end,
     clipped_cells}

PGM samples stop at 65535. Sums above that (a track longer than 257 frames
of full-white pixels) are clipped; ``clipped_cells`` counts them and ``extent_z`` keeps the true
peak.
"""

import json
from pathlib import Path
from typing import Dict, Tuple, Union

import numpy as np

from ..config import Config
from ..exceptions import VFoldValidationError
from ..foldover import Foldover
from ..utils import get_logger, read_text, stable_json, write_text
from .pnm import read_pgm, write_pgm

logger = get_logger(__name__)

SIDECAR_KEYS = (
    "track_id", "gamma", "origin", "extent_x", "extent_y", "extent_z", "step", "start", "end",
    "clipped_cells",
)


def _rounded(point, digits: int = Config.TRACK_DECIMALS):
    # fixed precision keeps sidecars byte-stable
    return [round(float(v), digits) + 0.0 for v in point]


def clip16(grid: np.ndarray) -> Tuple[np.ndarray, int]:
    """Grid clipped to the 16-bit PGM range, and the number of cells clipped."""
    clipped = int(np.count_nonzero(grid > Config.PGM16_MAXVAL))
    return np.clip(grid, 0, Config.PGM16_MAXVAL), clipped


class FoldoverSerializer:
    """
    Write and read foldover PGM + JSON pairs.

    Example:
        >>> serializer = FoldoverSerializer()
        >>> pgm, sidecar = serializer.dump(foldover, "run/foldovers")
        >>> restored = serializer.load(pgm)
    """

    def __init__(self, steps: Tuple[int, int, int] = (1, 1, 1)):
        """
        Initialize serializer

        Args:
            steps: Projection steps recorded in the sidecar
        """
        self.steps = steps

    @staticmethod
    def stem(track_id: int) -> str:
        return f"track_{track_id:04d}"

    def sidecar(self, f: Foldover) -> Dict:
        extent_x, extent_y, extent_z = f.support_extent()
        return {
            "track_id": int(f.track_id),
            "gamma": int(f.gamma),
            "origin": _rounded(f.origin),
            "extent_x": extent_x,
            "extent_y": extent_y,
            "extent_z": extent_z,
            "step": {"X": self.steps[0], "Y": self.steps[1], "Z": self.steps[2]},
            "start": _rounded(f.start),
            "end": _rounded(f.end),
            "clipped_cells": clip16(f.grid)[1],
        }

    def dump(self, f: Foldover, directory: Union[str, Path]) -> Tuple[Path, Path]:
        """
        Write ``track_XXXX.pgm`` and ``track_XXXX.json`` into ``directory``

        Returns:
            Tuple of (pgm path, sidecar path)
        """
        directory = Path(directory)
        stem = self.stem(f.track_id)
        grid, clipped = clip16(f.grid)
        if clipped:
            logger.warning("track %d: %d foldover cell(s) clipped to %d",
                           f.track_id, clipped, Config.PGM16_MAXVAL)
        pgm = write_pgm(directory / f"{stem}.pgm", grid, maxval=Config.PGM16_MAXVAL)
        sidecar = directory / f"{stem}.json"
        write_text(sidecar, stable_json(self.sidecar(f)))
        return pgm, sidecar

    def load(self, pgm_path: Union[str, Path]) -> Foldover:
        """Read a PGM and its sidecar back into a Foldover."""
        pgm_path = Path(pgm_path)
        grid, _ = read_pgm(pgm_path)
        try:
            meta = json.loads(read_text(pgm_path.with_suffix(".json")))
        except json.JSONDecodeError as e:
            raise VFoldValidationError(f"Invalid foldover sidecar: {e}")
        missing = [key for key in SIDECAR_KEYS if key not in meta]
        if missing:
            raise VFoldValidationError("Foldover sidecar is missing keys", errors=missing)
        if meta["clipped_cells"]:
            logger.warning("%s: %d cell(s) were clipped on export", pgm_path.name, meta["clipped_cells"])
        return Foldover(
            grid=grid.astype(np.int64),
            origin=tuple(meta["origin"]),
            gamma=int(meta["gamma"]),
            track_id=int(meta["track_id"]),
            start=tuple(meta["start"]),
            end=tuple(meta["end"]),
        )
