# vfold/synth.py
"""
VFOLD Synthetic Scenes

Seeded synthetic microscopy videos with ground-truth tracks and labels,
used as the pipeline's verification oracle.

Objects are isotropic Gaussian blobs (sigma = radius / 2) over a flat
background with per-frame Gaussian noise. Every frame draws its noise from
its own stream spawned from the scene seed, so frames can be rendered in
any order or in parallel with identical bytes.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .classify import stratified_split
from .config import Config
from .exceptions import SpecViolationError
from .features import polyline_length
from .framestore import Frame, VideoSequence, write_sequence
from .serializers import LabelCsvSerializer, LabelRecord, TrackCsvSerializer
from .tracking import TRACK_ENDED, Track, TrackPoint
from .utils import ensure_dir, get_logger
from .validators import SceneValidator

logger = get_logger(__name__)

KIND_STATIONARY = "stationary"
KIND_LINEAR = "linear"
KIND_CIRCULAR = "circular"
KIND_SINUSOID = "sinusoid"

# arc-length sampling step for sinusoid reparametrization (pixels)
_ARC_STEP = 0.05


# =========================================================================
# SPECIFICATIONS
# =========================================================================

@dataclass(frozen=True)
class ObjectSpec:
    """
    One synthetic object.

    Attributes:
        kind: ``stationary``, ``linear``, ``circular`` or ``sinusoid``
        label: ``poor``, ``good`` or ``excellent``
        start: Center ``(x, y)`` when the object enters
        speed: Path length per frame (pixels)
        heading: Initial direction of motion, degrees (y grows downward)
        amplitude: Circle radius (circular) or lateral amplitude (sinusoid)
        period: Sinusoid wavelength along the heading (pixels)
        radius: Blob radius; the Gaussian sigma is half of it
        peak_intensity: Intensity at the blob center
        enter_frame: First visible frame
        exit_frame: First frame no longer visible (None: never leaves)
    """

    kind: str
    label: str
    start: Tuple[float, float]
    speed: float = 0.0
    heading: float = 0.0
    amplitude: float = 0.0
    period: float = 40.0
    radius: float = 5.0
    peak_intensity: float = 200.0
    enter_frame: int = 0
    exit_frame: Optional[int] = None

    def visible(self, frame_index: int) -> bool:
        if frame_index < self.enter_frame:
            return False
        return self.exit_frame is None or frame_index < self.exit_frame


@dataclass(frozen=True)
class SceneSpec:
    """
    A synthetic video.

    Attributes:
        width, height: Frame size in pixels
        frames: Frame count (>= 2)
        objects: Object specifications; object ``i`` becomes track ``i + 1``
        noise_sigma: Standard deviation of the additive noise
        background: Background intensity
        seed: Master seed of the noise streams
        fps: Frame rate written into the raw header
    """

    width: int = Config.FRAME_WIDTH
    height: int = Config.FRAME_HEIGHT
    frames: int = 40
    objects: Tuple[ObjectSpec, ...] = ()
    noise_sigma: float = 0.0
    background: float = 40.0
    seed: int = 0
    fps: float = Config.DEFAULT_FPS

    def validate(self) -> "SceneSpec":
        """
        Raises:
            SpecViolationError: Any scene or object invariant fails
        """
        is_valid, errors = SceneValidator.validate_scene(self)
        if not is_valid:
            raise SpecViolationError("Invalid scene specification", errors=errors)
        return self


@dataclass
class SyntheticScene:
    """Rendered video with its ground truth."""

    video: VideoSequence
    ground_truth: List[Track]
    labels: Dict[int, str]


# =========================================================================
# TRAJECTORIES
# =========================================================================

def _unit(heading_deg: float) -> Tuple[np.ndarray, np.ndarray]:
    h = math.radians(heading_deg)
    direction = np.array([math.cos(h), math.sin(h)])
    normal = np.array([-math.sin(h), math.cos(h)])
    return direction, normal


def trajectory(obj: ObjectSpec, frames: int) -> np.ndarray:
    """
    Exact blob centers for frames ``0..frames-1``

    Time runs from the object's ``enter_frame``; earlier rows hold the
    start position.

    Returns:
        ``(frames, 2)`` array of ``(x, y)``
    """
    tau = np.clip(np.arange(frames, dtype=np.float64) - obj.enter_frame, 0, None)
    start = np.asarray(obj.start, dtype=np.float64)
    direction, normal = _unit(obj.heading)

    if obj.kind == KIND_STATIONARY or obj.speed == 0:
        return np.tile(start, (frames, 1))

    if obj.kind == KIND_LINEAR:
        return start + obj.speed * tau[:, None] * direction

    if obj.kind == KIND_CIRCULAR:
        radius = obj.amplitude
        # chord of one frame's arc equals the speed
        omega = 2.0 * math.asin(min(obj.speed / (2.0 * radius), 1.0))
        center = start + radius * normal
        phase = math.radians(obj.heading) - math.pi / 2 + omega * tau
        return center + radius * np.column_stack([np.cos(phase), np.sin(phase)])

    if obj.kind == KIND_SINUSOID:
        along = np.arange(0.0, obj.speed * frames + _ARC_STEP, _ARC_STEP)
        lateral = obj.amplitude * np.sin(2.0 * math.pi * along / obj.period)
        base = start + along[:, None] * direction + lateral[:, None] * normal
        arc = np.concatenate([[0.0], np.cumsum(np.hypot(*np.diff(base, axis=0).T))])
        s = np.interp(obj.speed * tau, arc, along)
        lateral_s = obj.amplitude * np.sin(2.0 * math.pi * s / obj.period)
        return start + s[:, None] * direction + lateral_s[:, None] * normal

    raise SpecViolationError(f"Unknown object kind '{obj.kind}'")


# =========================================================================
# RENDERING
# =========================================================================

def _add_blob(image: np.ndarray, center: Tuple[float, float], radius: float,
              amplitude: float) -> None:
    height, width = image.shape
    sigma = radius / 2.0
    reach = int(math.ceil(4.0 * sigma)) + 1
    cx, cy = center
    x0, x1 = max(int(math.floor(cx)) - reach, 0), min(int(math.floor(cx)) + reach + 1, width)
    y0, y1 = max(int(math.floor(cy)) - reach, 0), min(int(math.floor(cy)) + reach + 1, height)
    if x0 >= x1 or y0 >= y1:
        return
    xs = np.arange(x0, x1, dtype=np.float64)[None, :] - cx
    ys = np.arange(y0, y1, dtype=np.float64)[:, None] - cy
    image[y0:y1, x0:x1] += amplitude * np.exp(-(xs * xs + ys * ys) / (2.0 * sigma * sigma))


def _in_frame(spec: SceneSpec, center) -> bool:
    x, y = center
    return 0 <= x <= spec.width - 1 and 0 <= y <= spec.height - 1


def render_clean(spec: SceneSpec, frame_index: int,
                 paths: Optional[Sequence[np.ndarray]] = None) -> np.ndarray:
    """Noise-free, unquantized ``float64`` frame."""
    if paths is None:
        paths = [trajectory(obj, spec.frames) for obj in spec.objects]
    image = np.full((spec.height, spec.width), float(spec.background), dtype=np.float64)
    for obj, path in zip(spec.objects, paths):
        if obj.visible(frame_index):
            _add_blob(image, path[frame_index], obj.radius, obj.peak_intensity - spec.background)
    return image


def quantize(image: np.ndarray) -> np.ndarray:
    """Round half up and clip to ``uint8``."""
    return np.clip(np.floor(image + 0.5), 0, 255).astype(np.uint8)


def generate(spec: SceneSpec, jobs: int = 1) -> SyntheticScene:
    """
    Render ``spec`` with its ground truth

    Ground-truth track ``i + 1`` holds object ``i``'s exact centers on the
    frames where it is visible and inside the frame. The same spec always
    renders the same bytes, whatever ``jobs`` is.

    Args:
        spec: Scene specification
        jobs: Worker threads for frame rendering

    Returns:
        SyntheticScene

    Raises:
        SpecViolationError: Invalid specification
    """
    spec.validate()
    paths = [trajectory(obj, spec.frames) for obj in spec.objects]
    noise_seeds = np.random.SeedSequence(spec.seed).spawn(spec.frames)

    def render(frame_index: int) -> Frame:
        image = render_clean(spec, frame_index, paths)
        if spec.noise_sigma > 0:
            rng = np.random.default_rng(noise_seeds[frame_index])
            image += spec.noise_sigma * rng.standard_normal(image.shape)
        return Frame(quantize(image))

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            frames = list(pool.map(render, range(spec.frames)))
    else:
        frames = [render(j) for j in range(spec.frames)]

    ground_truth = []
    labels = {}
    for index, (obj, path) in enumerate(zip(spec.objects, paths)):
        track = Track(index + 1, state=TRACK_ENDED)
        for j in range(spec.frames):
            if obj.visible(j) and _in_frame(spec, path[j]):
                track.append(TrackPoint(j, float(path[j][0]), float(path[j][1])))
        ground_truth.append(track)
        labels[track.id] = obj.label

    video = VideoSequence(frames, fps=spec.fps, id=f"synthetic-{spec.seed}")
    logger.debug("rendered %d frames with %d object(s)", spec.frames, len(spec.objects))
    return SyntheticScene(video, ground_truth, labels)


def ground_truth_vcl(track: Track) -> float:
    """Curvilinear velocity (pixels per frame) of a ground-truth track."""
    if track.gamma == 0:
        return 0.0
    return polyline_length(track.centroids()) / track.gamma


# =========================================================================
# BENCHMARK
# =========================================================================

BENCHMARK_SCENES = 30
BENCHMARK_LANES = 6
BENCHMARK_FRAMES = 40
LANE_HEIGHT = Config.FRAME_HEIGHT // BENCHMARK_LANES
EDGE_MARGIN = 20.0

SPEED_BANDS = {
    "poor": (0.2, 0.9),
    "good": (3.5, 5.5),
    "excellent": (9.5, 13.5),
}
CLASS_KINDS = {
    "poor": (KIND_STATIONARY, KIND_LINEAR, KIND_CIRCULAR),
    "good": (KIND_LINEAR, KIND_CIRCULAR, KIND_SINUSOID),
    "excellent": (KIND_LINEAR, KIND_CIRCULAR, KIND_SINUSOID),
}


def global_track_id(scene_index: int, track_id: int) -> int:
    """Dataset-wide id of a scene-local track."""
    return scene_index * 1000 + track_id


def _benchmark_object(rng: np.random.Generator, label: str, lane_y: float,
                      frames: int, peak: float) -> ObjectSpec:
    kind = CLASS_KINDS[label][int(rng.integers(len(CLASS_KINDS[label])))]
    if kind == KIND_STATIONARY:
        speed = 0.0
    else:
        speed = float(rng.uniform(*SPEED_BANDS[label]))
    common = dict(label=label, radius=5.0, peak_intensity=peak)

    if kind == KIND_STATIONARY:
        x = float(rng.uniform(EDGE_MARGIN, Config.FRAME_WIDTH - EDGE_MARGIN))
        return ObjectSpec(KIND_STATIONARY, start=(x, lane_y), **common)

    if kind == KIND_CIRCULAR:
        radius = float(rng.uniform(max(8.0, speed / 2.0), 26.0))
        heading = float(rng.uniform(0.0, 360.0))
        _, normal = _unit(heading)
        cx = float(rng.uniform(EDGE_MARGIN + radius, Config.FRAME_WIDTH - EDGE_MARGIN - radius))
        # circle centered on the lane line
        start = (cx - radius * normal[0], lane_y - radius * normal[1])
        return ObjectSpec(KIND_CIRCULAR, start=start, speed=speed, heading=heading,
                          amplitude=radius, **common)

    forward = bool(rng.integers(2))
    heading = (0.0 if forward else 180.0) + float(rng.uniform(-2.0, 2.0))
    travel = speed * (frames - 1)
    direction, _ = _unit(heading)
    if forward:
        x = float(rng.uniform(EDGE_MARGIN, Config.FRAME_WIDTH - EDGE_MARGIN - travel))
    else:
        x = float(rng.uniform(EDGE_MARGIN + travel, Config.FRAME_WIDTH - EDGE_MARGIN))
    # center the heading drift on the lane line
    y = lane_y - 0.5 * travel * direction[1]

    if kind == KIND_LINEAR:
        return ObjectSpec(KIND_LINEAR, start=(x, y), speed=speed, heading=heading, **common)
    return ObjectSpec(
        KIND_SINUSOID, start=(x, y), speed=speed, heading=heading,
        amplitude=float(rng.uniform(4.0, 15.0)), period=float(rng.uniform(30.0, 80.0)),
        **common,
    )


@dataclass
class BenchmarkDataset:
    """
    Labelled synthetic benchmark.

    Attributes:
        seed: Master seed
        scenes: One SceneSpec per scene
        labels: Global track id to class
        splits: Global track id to ``train`` / ``test``
    """

    seed: int
    scenes: List[SceneSpec]
    labels: Dict[int, str] = field(default_factory=dict)
    splits: Dict[int, str] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.labels)

    def render(self, scene_index: int, jobs: int = 1) -> SyntheticScene:
        return generate(self.scenes[scene_index], jobs=jobs)

    def write(self, directory: Union[str, Path], jobs: int = 1) -> Path:
        """
        Write ``scenes/scene_XXX/{frames.raw, gt_tracks.csv, labels.csv}``
        and a top-level ``labels.csv`` with global ids and splits
        """
        directory = ensure_dir(directory)
        for index in range(len(self.scenes)):
            write_scene(self.render(index, jobs), directory / "scenes" / f"scene_{index:03d}")
        LabelCsvSerializer().dump(
            [LabelRecord(i, label, self.splits.get(i)) for i, label in self.labels.items()],
            directory / "labels.csv",
        )
        logger.info("wrote %d scenes to %s", len(self.scenes), directory)
        return directory


def default_benchmark(seed: int = 0, noise_sigma: float = 3.0, background: float = 40.0,
                      peak: float = 200.0) -> BenchmarkDataset:
    """
    180 labelled tracks, 60 per class, in 30 scenes of six lanes

    Each lane holds one object whose lateral excursion stays within the
    lane, so trajectories never cross. Classes are shuffled over lanes and
    split 50/50 per class into train and test.

    Args:
        seed: Master seed (object parameters, noise and split)
        noise_sigma: Frame noise level
        background, peak: Background and blob-center intensities
    """
    master = np.random.SeedSequence(seed)
    layout_seed, *scene_seeds = master.spawn(BENCHMARK_SCENES + 1)

    per_class = BENCHMARK_SCENES * BENCHMARK_LANES // len(Config.CLASS_NAMES)
    classes = np.repeat(np.array(Config.CLASS_NAMES), per_class)
    classes = np.random.default_rng(layout_seed).permutation(classes)

    scenes, labels = [], {}
    for scene_index, scene_seed in enumerate(scene_seeds):
        noise_seed, *object_seeds = scene_seed.spawn(BENCHMARK_LANES + 1)
        objects = []
        for lane, object_seed in enumerate(object_seeds):
            label = str(classes[scene_index * BENCHMARK_LANES + lane])
            lane_y = LANE_HEIGHT * lane + LANE_HEIGHT / 2.0
            objects.append(_benchmark_object(
                np.random.default_rng(object_seed), label, lane_y,
                BENCHMARK_FRAMES, peak,
            ))
            labels[global_track_id(scene_index, lane + 1)] = label
        scenes.append(SceneSpec(
            frames=BENCHMARK_FRAMES,
            objects=tuple(objects),
            noise_sigma=noise_sigma,
            background=background,
            seed=int(noise_seed.generate_state(1)[0]),
        ))

    splits = stratified_split(labels, 0.5, seed)
    return BenchmarkDataset(seed=seed, scenes=scenes, labels=labels, splits=splits)


def write_scene(scene: SyntheticScene, directory: Union[str, Path]) -> Path:
    """Write ``frames.raw``, ``gt_tracks.csv`` and ``labels.csv`` for one scene."""
    directory = ensure_dir(directory)
    write_sequence(scene.video, directory / Config.RAW_FILENAME)
    TrackCsvSerializer().dump(scene.ground_truth, directory / "gt_tracks.csv")
    LabelCsvSerializer().dump(
        [LabelRecord(i, label) for i, label in scene.labels.items()],
        directory / "labels.csv",
    )
    return directory
