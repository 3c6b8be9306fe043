# tests/conftest.py
"""Shared fixtures: tiny hand-drawn videos and synthetic scenes."""

from typing import Dict, List, Sequence, Tuple

import numpy as np
import pytest

from vfold.config import PipelineConfig
from vfold.framestore import Frame, VideoSequence
from vfold.serializers import LabelCsvSerializer, LabelRecord
from vfold.synth import KIND_LINEAR, ObjectSpec, SceneSpec, generate, global_track_id, write_scene

BACKGROUND = 10
FOREGROUND = 200


def draw_squares(width: int, height: int, squares: Sequence[Tuple[int, int, int]],
                 value: int = FOREGROUND, background: int = BACKGROUND) -> np.ndarray:
    """Frame with ``side x side`` squares whose top-left corners are (x, y)."""
    image = np.full((height, width), background, dtype=np.uint8)
    for x, y, side in squares:
        image[y:y + side, x:x + side] = value
    return image


def square_video(paths: Dict[int, List[Tuple[int, int]]], frames: int,
                 width: int = 64, height: int = 48, side: int = 3) -> VideoSequence:
    """
    One square per path; ``paths[k][j]`` is the top-left corner of object k
    in frame j (``None`` hides it).
    """
    stack = []
    for j in range(frames):
        squares = [(p[j][0], p[j][1], side) for p in paths.values() if p[j] is not None]
        stack.append(Frame(draw_squares(width, height, squares)))
    return VideoSequence(stack, fps=30.0, id="squares")


@pytest.fixture
def fixed_config() -> PipelineConfig:
    """Fixed threshold halfway between background and squares."""
    return PipelineConfig(threshold="fixed:100", d=4)


@pytest.fixture
def two_square_video() -> VideoSequence:
    """Two squares moving right at 2 px/frame in separate rows, 8 frames."""
    paths = {
        1: [(5 + 2 * j, 8) for j in range(8)],
        2: [(5 + 2 * j, 30) for j in range(8)],
    }
    return square_video(paths, frames=8)


@pytest.fixture
def small_scene():
    """Two noiseless linear blobs on a 120 x 80 canvas."""
    spec = SceneSpec(
        width=120, height=80, frames=12, noise_sigma=0.0, background=40, seed=3,
        objects=(
            ObjectSpec(KIND_LINEAR, "good", start=(20.0, 20.0), speed=2.0, radius=3.0),
            ObjectSpec(KIND_LINEAR, "poor", start=(20.0, 60.0), speed=0.5, radius=3.0),
        ),
    )
    return generate(spec)


def three_class_scene(seed: int, offset: float = 0.0):
    """One slow, one medium and one fast blob in separate rows."""
    spec = SceneSpec(
        width=120, height=80, frames=12, noise_sigma=0.0, background=40, seed=seed,
        objects=(
            ObjectSpec(KIND_LINEAR, "poor", start=(20.0 + offset, 15.0), speed=0.5, radius=3.0),
            ObjectSpec(KIND_LINEAR, "good", start=(20.0 + offset, 40.0), speed=2.0, radius=3.0),
            ObjectSpec(KIND_LINEAR, "excellent", start=(20.0 + offset, 65.0), speed=4.0, radius=3.0),
        ),
    )
    return generate(spec)


@pytest.fixture
def dataset_dir(tmp_path):
    """
    Two labelled scenes under ``scenes/``: scene 0 is the training half,
    scene 1 the test half.
    """
    root = tmp_path / "dataset"
    records = []
    for scene_index, offset in enumerate((0.0, 5.0)):
        scene = three_class_scene(seed=scene_index, offset=offset)
        write_scene(scene, root / "scenes" / f"scene_{scene_index:03d}")
        split = "train" if scene_index == 0 else "test"
        records.extend(
            LabelRecord(global_track_id(scene_index, track_id), label, split)
            for track_id, label in scene.labels.items()
        )
    LabelCsvSerializer().dump(records, root / "labels.csv")
    return root
