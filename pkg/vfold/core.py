# vfold/core.py
"""
VFOLD Core Module - Pipeline Interface

This is the main API providing:
- FoldoverPipeline: segment -> track -> foldover -> features, per sequence
  or over a whole dataset directory of scenes
- run_pipeline(): one-call wrapper that also writes every artifact
- evaluate(): per-axis nearest-centroid metrics for labelled features

Per-frame segmentation and per-track feature extraction run on an ordered
thread pool, so results never depend on the number of workers.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .classify import (
    ConfusionMatrix, MetricsReport, evaluate_axis, format_table, report_to_dict,
    stratified_split,
)
from .config import Config, PipelineConfig
from .exceptions import VFoldValidationError
from .features import FeatureRecord, TrackFeatures, extract_track_features, grade_distribution
from .foldover import AXES
from .framestore import VideoSequence, load_sequence
from .segmentation import BinaryMask, Detection, count_per_frame, segment_frame
from .serializers import (
    DetectionCsvSerializer, FeatureCsvSerializer, FoldoverSerializer, LabelCsvSerializer,
    TrackCsvSerializer, clip16, encode_mask, label_maps, write_pgm,
)
from .synth import global_track_id
from .tracking import Track, associate, build_tracks, filter_tracks
from .utils import ensure_dir, get_logger, stable_json, write_bytes, write_text

logger = get_logger(__name__)

SCENES_DIR = "scenes"
LABELS_FILENAME = "labels.csv"
GT_TRACKS_FILENAME = "gt_tracks.csv"

ARTIFACT_CONFIG = Config.CONFIG_FILENAME
ARTIFACT_DETECTIONS = "detections.csv"
ARTIFACT_TRACKS = "tracks.csv"
ARTIFACT_FEATURES = "features.csv"
ARTIFACT_REPORT = "report.json"
ARTIFACT_METRICS = "metrics.txt"
FOLDOVER_DIR = "foldovers"
MASK_DIR = "masks"


class SourceKind(Enum):
    """Kinds of pipeline input"""
    SEQUENCE = "sequence"    # image directory, raw-planar file or scene directory
    DATASET = "dataset"      # directory holding scenes/scene_XXX


def detect_source(path: Union[str, Path]) -> SourceKind:
    path = Path(path)
    if (path / SCENES_DIR).is_dir():
        return SourceKind.DATASET
    return SourceKind.SEQUENCE


def row_name(axis: str) -> str:
    """Metrics-table row name of an axis (``F^Z``)."""
    return f"F^{axis}"


# =========================================================================
# RESULTS
# =========================================================================

@dataclass(eq=False)
class Segmentation:
    """Per-frame thresholds, masks and detections of one sequence."""

    thresholds: List[int]
    masks: List[BinaryMask]
    detections: List[List[Detection]]

    @property
    def counts(self) -> List[int]:
        return count_per_frame(self.detections)


@dataclass(eq=False)
class SequenceResult:
    """
    Everything the pipeline derives from one sequence.

    Attributes:
        video: Input frames
        segmentation: Per-frame thresholds / masks / detections
        tracks: Every track, sorted by id
        features: Features of tracks that passed ``min_track_length``
        matches: Track id to (ground-truth id, mean centroid error), when
            the source came with ground-truth tracks
    """

    video: VideoSequence
    segmentation: Segmentation
    tracks: List[Track]
    features: List[TrackFeatures]
    matches: Optional[Dict[int, Tuple[int, float]]] = None

    def grades(self) -> List[str]:
        return [tf.grade for tf in self.features]

    def records(self) -> List[FeatureRecord]:
        return [record for tf in self.features for record in tf.records()]


@dataclass(eq=False)
class AxisEvaluation:
    axis: str
    confusion: ConfusionMatrix
    report: MetricsReport


@dataclass(eq=False)
class DatasetResult:
    """
    Pipeline output over every scene of a dataset directory.

    Feature records carry global ids ``scene_index * 1000 + track_id``,
    where ``track_id`` is the matched ground-truth id when the scene ships
    ``gt_tracks.csv``.
    """

    scenes: List[Tuple[str, SequenceResult]]
    records: List[FeatureRecord]
    labels: Dict[int, str] = field(default_factory=dict)
    splits: Dict[int, str] = field(default_factory=dict)
    evaluations: List[AxisEvaluation] = field(default_factory=list)

    def grades(self) -> List[str]:
        return [grade for _, result in self.scenes for grade in result.grades()]


# =========================================================================
# EVALUATION
# =========================================================================

def evaluate(records: Sequence[FeatureRecord], labels: Mapping[int, str],
             splits: Optional[Mapping[int, str]] = None,
             axes: Sequence[str] = AXES, seed: int = 0) -> List[AxisEvaluation]:
    """
    Nearest-centroid metrics for each axis

    Args:
        records: Feature records
        labels: Track id to class
        splits: Track id to ``train`` / ``test``; a seeded stratified 50/50
            split is drawn when omitted
        axes: Axes to evaluate, in report order
        seed: Seed of the drawn split

    Raises:
        MissingClassError: A class has no training sample
        LengthMismatchError: No labelled test sample
    """
    if not splits:
        known = {r.track_id for r in records}
        splits = stratified_split({i: c for i, c in labels.items() if i in known}, 0.5, seed)
    evaluations = []
    for axis in axes:
        cm, report = evaluate_axis(records, labels, splits, axis)
        evaluations.append(AxisEvaluation(axis, cm, report))
    return evaluations


def metrics_table(evaluations: Sequence[AxisEvaluation], decimals: int = 4) -> str:
    return format_table({row_name(e.axis): e.report for e in evaluations}, decimals)


def load_labels(path: Union[str, Path]) -> Tuple[Dict[int, str], Dict[int, str]]:
    """Read a labels CSV into (labels, splits) maps."""
    return label_maps(LabelCsvSerializer().load(path))


# =========================================================================
# PIPELINE
# =========================================================================

class FoldoverPipeline:
    """
    Foldover feature pipeline - one object for every stage

    Example:
        >>> pipeline = FoldoverPipeline(ConfigProfiles.benchmark(), jobs=4)
        >>> result = pipeline.run_path("data/scenes/scene_000")
        >>> pipeline.write_result(result, "run1")
    """

    def __init__(self, config: Optional[PipelineConfig] = None, jobs: int = 1):
        """
        Initialize pipeline

        Args:
            config: Pipeline tunables (validated here); defaults when omitted
            jobs: Worker threads for per-frame and per-track stages

        Raises:
            ConfigError: Invalid config or jobs < 1
        """
        self.config = (config or PipelineConfig()).validate()
        if jobs < 1:
            raise VFoldValidationError(f"jobs must be >= 1, got {jobs}")
        self.jobs = jobs

    def _map(self, fn: Callable, items: Sequence) -> List:
        items = list(items)
        if self.jobs == 1 or len(items) < 2:
            return [fn(item) for item in items]
        with ThreadPoolExecutor(max_workers=self.jobs) as pool:
            # map keeps input order
            return list(pool.map(fn, items))

    # -----------------------------------------------------------------
    # Stages
    # -----------------------------------------------------------------

    def segment(self, video: VideoSequence) -> Segmentation:
        """Threshold, binarize and label every frame."""
        video.require_min_frames()
        results = self._map(
            lambda indexed: segment_frame(indexed[1], indexed[0], self.config),
            list(enumerate(video.frames)),
        )
        thresholds, masks, detections = (list(column) for column in zip(*results))
        logger.info("segmented %d frame(s) of %s", len(masks), video.id)
        return Segmentation(thresholds, masks, detections)

    def track(self, segmentation: Segmentation) -> List[Track]:
        return build_tracks(segmentation.detections, self.config.gate, self.config.miss_tolerance)

    def extract(self, video: VideoSequence, masks: Sequence[BinaryMask],
                tracks: Sequence[Track]) -> List[TrackFeatures]:
        """
        Feature chain for every track of at least ``min_track_length`` points

        Returns:
            TrackFeatures in track-id order
        """
        kept = filter_tracks(tracks, self.config.min_track_length)
        dropped = len(tracks) - len(kept)
        if dropped:
            logger.info("skipping %d track(s) shorter than %d", dropped, self.config.min_track_length)
        return self._map(lambda track: extract_track_features(track, video, masks, self.config), kept)

    def run(self, video: VideoSequence, ground_truth: Optional[Sequence[Track]] = None) -> SequenceResult:
        """
        Every stage on one sequence

        Args:
            video: Input frames
            ground_truth: Reference tracks; when given, tracks are associated
                with them (within the matching gate)
        """
        segmentation = self.segment(video)
        tracks = self.track(segmentation)
        features = self.extract(video, segmentation.masks, tracks)
        matches = None
        if ground_truth is not None:
            matches = associate(tracks, ground_truth, self.config.gate)
        return SequenceResult(video, segmentation, tracks, features, matches)

    def run_path(self, path: Union[str, Path], format: Optional[str] = None) -> SequenceResult:
        """Load a frame source (and its ``gt_tracks.csv`` if present) and run it."""
        path = Path(path)
        video = load_sequence(path, format)
        gt_path = (path if path.is_dir() else path.parent) / GT_TRACKS_FILENAME
        ground_truth = TrackCsvSerializer().load(gt_path) if gt_path.is_file() else None
        return self.run(video, ground_truth)

    def run_dataset(self, root: Union[str, Path], seed: int = 0) -> DatasetResult:
        """
        Run every ``scenes/scene_XXX`` of a dataset directory

        Scene indices follow sorted directory names. When a top-level
        ``labels.csv`` exists, per-axis metrics are computed over its split
        (a seeded stratified split when it has none).
        """
        root = Path(root)
        scene_dirs = sorted(p for p in (root / SCENES_DIR).iterdir() if p.is_dir())
        if not scene_dirs:
            raise VFoldValidationError(f"No scene directories under {root / SCENES_DIR}")

        scenes, records = [], []
        for scene_index, scene_dir in enumerate(scene_dirs):
            result = self.run_path(scene_dir)
            scenes.append((scene_dir.name, result))
            records.extend(self._global_records(scene_index, result))

        dataset = DatasetResult(scenes=scenes, records=records)
        labels_path = root / LABELS_FILENAME
        if labels_path.is_file():
            dataset.labels, dataset.splits = load_labels(labels_path)
            try:
                dataset.evaluations = evaluate(records, dataset.labels, dataset.splits, seed=seed)
            except VFoldValidationError as e:
                logger.warning("metrics skipped: %s", e)
        return dataset

    @staticmethod
    def _global_records(scene_index: int, result: SequenceResult) -> List[FeatureRecord]:
        records = []
        for tf in result.features:
            if result.matches is None:
                local_id = tf.track_id
            elif tf.track_id in result.matches:
                local_id = result.matches[tf.track_id][0]
            else:
                logger.warning("%s: track %d matches no ground-truth track, left out",
                               result.video.id, tf.track_id)
                continue
            gid = global_track_id(scene_index, local_id)
            records.extend(r._replace(track_id=gid) for r in tf.records())
        return records

    # -----------------------------------------------------------------
    # Reports
    # -----------------------------------------------------------------

    def sequence_report(self, result: SequenceResult) -> Dict:
        """JSON-ready summary of one sequence (no timestamps)."""
        video = result.video
        per_track = []
        for tf in result.features:
            entry = {
                "track_id": tf.track_id,
                "gamma": tf.foldover.gamma,
                "kinematics": {k: float(v) for k, v in tf.kinematics.to_dict().items()},
                "vcl_um_per_s": float(tf.vcl_um_per_s),
                "grade": tf.grade,
            }
            if result.matches is not None and tf.track_id in result.matches:
                gt_id, error = result.matches[tf.track_id]
                entry["ground_truth"] = {"track_id": gt_id, "mean_error": float(error)}
            per_track.append(entry)

        return {
            "vfold_version": Config.VFOLD_VERSION,
            "source": video.id,
            "frames": video.frame_count,
            "width": video.width,
            "height": video.height,
            "fps": float(self.config.fps or video.fps),
            "thresholds": [int(t) for t in result.segmentation.thresholds],
            "objects_per_frame": result.segmentation.counts,
            "track_count": len(result.tracks),
            "feature_track_count": len(result.features),
            "grade_distribution": grade_distribution(result.grades()),
            "tracks": per_track,
        }

    def dataset_report(self, result: DatasetResult) -> Dict:
        report = {
            "vfold_version": Config.VFOLD_VERSION,
            "scenes": [
                {
                    "scene": name,
                    "frames": scene.video.frame_count,
                    "track_count": len(scene.tracks),
                    "feature_track_count": len(scene.features),
                    "matched": None if scene.matches is None else len(scene.matches),
                }
                for name, scene in result.scenes
            ],
            "feature_track_count": len({r.track_id for r in result.records}),
            "grade_distribution": grade_distribution(result.grades()),
        }
        if result.evaluations:
            report["metrics"] = {
                row_name(e.axis): report_to_dict(e.report, e.confusion) for e in result.evaluations
            }
        return report

    # -----------------------------------------------------------------
    # Artifacts
    # -----------------------------------------------------------------

    def write_config(self, out_dir: Union[str, Path]) -> Path:
        path = ensure_dir(out_dir) / ARTIFACT_CONFIG
        write_text(path, self.config.to_text())
        return path

    def write_segmentation(self, segmentation: Segmentation, out_dir: Union[str, Path],
                           masks: bool = False) -> Path:
        """``detections.csv``, plus ``masks/mask_XXXX.pgm`` when ``masks`` is set."""
        out_dir = ensure_dir(out_dir)
        flat = [d for frame in segmentation.detections for d in frame]
        path = DetectionCsvSerializer().dump(flat, out_dir / ARTIFACT_DETECTIONS)
        if masks:
            mask_dir = ensure_dir(out_dir / MASK_DIR)
            for index, mask in enumerate(segmentation.masks):
                write_bytes(mask_dir / f"mask_{index:04d}.pgm", encode_mask(mask))
        return path

    def write_tracks(self, tracks: Sequence[Track], out_dir: Union[str, Path]) -> Path:
        return TrackCsvSerializer().dump(tracks, ensure_dir(out_dir) / ARTIFACT_TRACKS)

    def write_foldovers(self, features: Sequence[TrackFeatures], out_dir: Union[str, Path]) -> Path:
        """
        ``foldovers/track_XXXX.{pgm,json}`` plus one 16-bit PGM per
        non-empty projection (``track_XXXX_X.pgm`` ...)
        """
        fold_dir = ensure_dir(Path(out_dir) / FOLDOVER_DIR)
        serializer = FoldoverSerializer(tuple(self.config.step_for(axis) for axis in AXES))
        for tf in features:
            serializer.dump(tf.foldover, fold_dir)
            stem = serializer.stem(tf.track_id)
            for proj in tf.projections:
                if proj.grid.size == 0:
                    continue
                grid, clipped = clip16(proj.grid)
                if clipped:
                    logger.warning("track %d: %d %s-projection cell(s) clipped to %d",
                                   tf.track_id, clipped, proj.axis, Config.PGM16_MAXVAL)
                write_pgm(fold_dir / f"{stem}_{proj.axis}.pgm", grid, maxval=Config.PGM16_MAXVAL)
        return fold_dir

    def write_features(self, records: Sequence[FeatureRecord], out_dir: Union[str, Path]) -> Path:
        return FeatureCsvSerializer().dump(records, ensure_dir(out_dir) / ARTIFACT_FEATURES)

    def write_result(self, result: SequenceResult, out_dir: Union[str, Path]) -> Path:
        """
        Write the artifacts of one sequence

        ``config.cfg``, ``tracks.csv``, ``foldovers/``, ``features.csv``,
        ``report.json``
        """
        out_dir = ensure_dir(out_dir)
        self.write_config(out_dir)
        self.write_tracks(result.tracks, out_dir)
        self.write_foldovers(result.features, out_dir)
        self.write_features(result.records(), out_dir)
        write_text(out_dir / ARTIFACT_REPORT, stable_json(self.sequence_report(result)))
        logger.info("wrote %d track(s) to %s", len(result.tracks), out_dir)
        return out_dir

    def write_dataset(self, result: DatasetResult, out_dir: Union[str, Path]) -> Path:
        """
        Per-scene artifacts under ``scenes/`` plus combined ``features.csv``
        (global ids), ``report.json`` and, with labels, ``metrics.txt``
        """
        out_dir = ensure_dir(out_dir)
        self.write_config(out_dir)
        for name, scene in result.scenes:
            scene_dir = ensure_dir(out_dir / SCENES_DIR / name)
            self.write_tracks(scene.tracks, scene_dir)
            self.write_foldovers(scene.features, scene_dir)
            write_text(scene_dir / ARTIFACT_REPORT, stable_json(self.sequence_report(scene)))
        self.write_features(result.records, out_dir)
        write_text(out_dir / ARTIFACT_REPORT, stable_json(self.dataset_report(result)))
        if result.evaluations:
            write_text(out_dir / ARTIFACT_METRICS, metrics_table(result.evaluations))
        logger.info("wrote %d scene(s) to %s", len(result.scenes), out_dir)
        return out_dir


# =========================================================================
# MODULE-LEVEL CONVENIENCE FUNCTIONS
# =========================================================================

def run_pipeline(source: Union[str, Path], out_dir: Union[str, Path],
                 config: Optional[PipelineConfig] = None, jobs: int = 1) -> Union[SequenceResult, DatasetResult]:
    """
    Run the whole pipeline on a frame source or dataset and write artifacts

    Example:
        >>> import vfold
        >>> vfold.run_pipeline("scene/", "run1/")
    """
    pipeline = FoldoverPipeline(config, jobs)
    if detect_source(source) is SourceKind.DATASET:
        result = pipeline.run_dataset(source)
        pipeline.write_dataset(result, out_dir)
    else:
        result = pipeline.run_path(source)
        pipeline.write_result(result, out_dir)
    return result
