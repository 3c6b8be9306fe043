# vfold/features.py
"""
VFOLD Features

Kinematic quantities of a track, smoothed projection descriptors, WHO
motility grading, and the assembly of the three per-axis feature vectors:

    F^X = [fps_x] ++ H^X
    F^Y = [fps_y] ++ H^Y
    F^Z = [A, B, M, VCL, VSL, VAP, LIN, STR, WOB] ++ H^Z
"""

import math
from collections import Counter
from dataclasses import asdict, dataclass
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import Polynomial
from scipy import ndimage

from .config import Config, PipelineConfig
from .exceptions import AxisMismatchError, EmptyTrackError, VFoldValidationError
from .foldover import AXES, Foldover, Projection, accumulate, project, rotate_to_positive_x
from .framestore import VideoSequence
from .segmentation import BinaryMask
from .tracking import Track
from .utils import get_logger

logger = get_logger(__name__)

KINEMATIC_FIELDS = ("A", "B", "M", "VCL", "VSL", "VAP", "LIN", "STR", "WOB")

# Smallest track a cubic can be fitted to without interpolating it
MIN_FIT_POINTS = 4


# =========================================================================
# DOMAIN TYPES
# =========================================================================

@dataclass(frozen=True)
class KinematicSummary:
    """
    Motion summary of one track. Lengths in pixels, velocities in pixels
    per frame.

    Attributes:
        fps_x, fps_y: Rotated foldover extents divided by gamma
        dist_A: Polyline length of the barycenters
        disp_B: Straight-line displacement first to last
        avg_path_M: Length of the fitted cubic path
        vcl, vsl, vap: A, B and M divided by gamma
        lin, str_, wob: VSL/VCL, VSL/VAP, VAP/VCL (0 on a zero denominator)
    """

    fps_x: float
    fps_y: float
    dist_A: float
    disp_B: float
    avg_path_M: float
    vcl: float
    vsl: float
    vap: float
    lin: float
    str_: float
    wob: float

    def kinematic_part(self) -> Tuple[float, ...]:
        """``(A, B, M, VCL, VSL, VAP, LIN, STR, WOB)``"""
        return (
            self.dist_A, self.disp_B, self.avg_path_M,
            self.vcl, self.vsl, self.vap,
            self.lin, self.str_, self.wob,
        )

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class DescriptorGrid:
    """Flattened ``d x d`` smoothed projection of one axis."""

    values: np.ndarray
    axis: str
    d: int

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64).ravel()
        if values.size != self.d * self.d:
            raise VFoldValidationError(
                f"Descriptor has {values.size} values, expected {self.d * self.d}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)


@dataclass(frozen=True, eq=False)
class FeatureVector:
    """Kinematic prefix plus descriptor values for one axis."""

    axis: str
    kinematic_part: Tuple[float, ...]
    descriptor_part: np.ndarray

    def values(self) -> np.ndarray:
        return np.concatenate([np.asarray(self.kinematic_part, dtype=np.float64),
                               np.asarray(self.descriptor_part, dtype=np.float64)])

    def __len__(self) -> int:
        return len(self.kinematic_part) + len(self.descriptor_part)


class FeatureRecord(NamedTuple):
    """One feature CSV row."""

    track_id: int
    axis: str
    values: Tuple[float, ...]
    label: Optional[str] = None


@dataclass(eq=False)
class TrackFeatures:
    """Everything feature extraction derives from one track."""

    track_id: int
    foldover: Foldover
    projections: Tuple[Projection, Projection, Projection]
    kinematics: KinematicSummary
    vectors: Tuple[FeatureVector, FeatureVector, FeatureVector]
    vcl_um_per_s: float
    grade: str

    def vector(self, axis: str) -> FeatureVector:
        return self.vectors[AXES.index(axis)]

    def records(self, label: Optional[str] = None) -> List[FeatureRecord]:
        return [
            FeatureRecord(self.track_id, v.axis, tuple(float(x) for x in v.values()), label)
            for v in self.vectors
        ]


# =========================================================================
# KINEMATICS
# =========================================================================

def polyline_length(points: np.ndarray) -> float:
    """Sum of segment lengths of an ``(n, 2)`` point array."""
    points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if len(points) < 2:
        return 0.0
    steps = np.diff(points, axis=0)
    return float(np.hypot(steps[:, 0], steps[:, 1]).sum())


def _ratio(numerator: float, denominator: float) -> float:
    return numerator / denominator if denominator > 0 else 0.0


def fit_average_path(track: Track) -> Tuple[np.ndarray, float]:
    """
    Smooth the track with parametric least-squares cubics

    ``x(t)`` and ``y(t)`` are fitted independently over ``t = 0..gamma-1``
    and evaluated at the same ``t``. Tracks shorter than four points, or
    that never move, keep their raw barycenters.

    Returns:
        Tuple of (``(gamma, 2)`` path, path length M)
    """
    points = track.centroids()
    if len(points) < MIN_FIT_POINTS or polyline_length(points) == 0.0:
        return points, polyline_length(points)

    t = np.arange(len(points), dtype=np.float64)
    path = np.column_stack([
        Polynomial.fit(t, points[:, 0], 3)(t),
        Polynomial.fit(t, points[:, 1], 3)(t),
    ])
    return path, polyline_length(path)


def kinematics(track: Track, extent_x: float, extent_y: float) -> KinematicSummary:
    """
    Kinematic summary of ``track``

    Args:
        track: Track with at least one point
        extent_x, extent_y: Support extents of the rotated foldover

    Returns:
        KinematicSummary

    Example:
        >>> k = kinematics(straight_track, 0, 0)  # 25 points, 2 px/frame
        >>> round(k.dist_A, 6), round(k.vcl, 6), round(k.lin, 6)
        (48.0, 1.92, 1.0)
    """
    gamma = track.gamma
    if gamma == 0:
        raise EmptyTrackError(f"Track {track.id} has no points")
    if extent_x < 0 or extent_y < 0:
        raise VFoldValidationError(f"Extents must be >= 0, got ({extent_x}, {extent_y})")

    points = track.centroids()
    dist_a = polyline_length(points)
    disp_b = float(np.hypot(*(points[-1] - points[0])))
    _, path_m = fit_average_path(track)

    vcl, vsl, vap = dist_a / gamma, disp_b / gamma, path_m / gamma
    return KinematicSummary(
        fps_x=extent_x / gamma,
        fps_y=extent_y / gamma,
        dist_A=dist_a,
        disp_B=disp_b,
        avg_path_M=path_m,
        vcl=vcl,
        vsl=vsl,
        vap=vap,
        lin=_ratio(vsl, vcl),
        str_=_ratio(vsl, vap),
        wob=_ratio(vap, vcl),
    )


# =========================================================================
# DESCRIPTORS
# =========================================================================

def _area_weights(size: int, d: int) -> np.ndarray:
    """``(d, size)`` matrix averaging ``size`` cells into ``d`` equal bins."""
    weights = np.zeros((d, size), dtype=np.float64)
    width = size / d
    cells = np.arange(size, dtype=np.float64)
    for i in range(d):
        lo, hi = i * width, (i + 1) * width
        overlap = np.minimum(hi, cells + 1) - np.maximum(lo, cells)
        weights[i] = np.clip(overlap, 0.0, None) / width
    return weights


def conv_descriptor(proj: Projection, e: int = 3, passes: int = 2, d: int = 16) -> DescriptorGrid:
    """
    Smoothed, resampled projection

    The grid is divided by its maximum, filtered ``passes`` times by an
    ``e x e`` mean kernel with zero padding (each output normalized by the
    in-bounds kernel support, so a uniform grid stays uniform), then
    area-averaged to ``d x d`` and flattened row-major.

    Args:
        proj: Projection to describe
        e: Odd kernel side, at least 3
        passes: Filter rounds, at least 1
        d: Output side length

    Returns:
        DescriptorGrid with ``d * d`` values in [0, 1]
    """
    if e < 3 or e % 2 == 0:
        raise VFoldValidationError(f"Kernel side e must be odd and >= 3, got {e}")
    if passes < 1 or d < 1:
        raise VFoldValidationError(f"passes and d must be >= 1, got {passes}, {d}")

    grid = np.asarray(proj.grid, dtype=np.float64)
    if grid.size == 0 or grid.max() <= 0:
        return DescriptorGrid(np.zeros(d * d), proj.axis, d)

    grid = grid / grid.max()
    support = ndimage.uniform_filter(np.ones_like(grid), size=e, mode="constant", cval=0.0)
    for _ in range(passes):
        grid = ndimage.uniform_filter(grid, size=e, mode="constant", cval=0.0) / support

    rows = _area_weights(grid.shape[0], d)
    cols = _area_weights(grid.shape[1], d)
    resampled = rows @ grid @ cols.T
    return DescriptorGrid(np.clip(resampled, 0.0, None).ravel(), proj.axis, d)


def assemble(kin: KinematicSummary, hx: DescriptorGrid, hy: DescriptorGrid,
             hz: DescriptorGrid) -> Tuple[FeatureVector, FeatureVector, FeatureVector]:
    """
    Concatenate kinematics and descriptors into F^X, F^Y, F^Z

    Raises:
        AxisMismatchError: A descriptor is passed in the wrong position
    """
    for expected, grid in zip(AXES, (hx, hy, hz)):
        if grid.axis != expected:
            raise AxisMismatchError(
                "Descriptor passed for the wrong axis",
                expected_axis=expected,
                actual_axis=grid.axis,
            )
    return (
        FeatureVector("X", (kin.fps_x,), hx.values),
        FeatureVector("Y", (kin.fps_y,), hy.values),
        FeatureVector("Z", kin.kinematic_part(), hz.values),
    )


# =========================================================================
# WHO GRADING
# =========================================================================

def to_um_per_s(v_px_per_frame: float, um_per_px: float, fps: float) -> float:
    """Convert pixels per frame to micrometres per second."""
    return v_px_per_frame * um_per_px * fps


def who_grade(vcl_um_per_s: float) -> str:
    """
    WHO motility grade of a curvilinear velocity

    A: v >= 25, B: 5 < v < 25, C: 0 < v <= 5, D: v == 0

    Raises:
        VFoldValidationError: Negative or NaN velocity
    """
    v = vcl_um_per_s
    if math.isnan(v) or v < 0:
        raise VFoldValidationError(f"Velocity must be >= 0, got {v}")
    if v >= 25:
        return "A"
    if v > 5:
        return "B"
    if v > 0:
        return "C"
    return "D"


def grade_distribution(grades: Sequence[str]) -> Dict[str, float]:
    """Fraction of tracks per WHO grade, every grade present."""
    counts = Counter(grades)
    total = len(grades)
    return {grade: (counts[grade] / total if total else 0.0) for grade in Config.WHO_GRADES}


# =========================================================================
# PER-TRACK CHAIN
# =========================================================================

def extract_track_features(track: Track, video: VideoSequence, masks: Sequence[BinaryMask],
                           config: PipelineConfig) -> TrackFeatures:
    """
    Run the full feature chain for one track

    accumulate -> rotate -> project X/Y/Z -> kinematics -> descriptors -> assemble
    """
    foldover = rotate_to_positive_x(
        accumulate(track, video, masks, config.r), config.min_displacement
    )
    projections = tuple(project(foldover, axis, config.step_for(axis)) for axis in AXES)
    kin = kinematics(track, projections[0].extent, projections[1].extent)
    grids = [conv_descriptor(p, config.e, config.passes, config.d) for p in projections]
    vectors = assemble(kin, *grids)

    fps = config.fps or video.fps
    vcl_um = to_um_per_s(kin.vcl, config.um_per_px, fps)
    return TrackFeatures(
        track_id=track.id,
        foldover=foldover,
        projections=projections,
        kinematics=kin,
        vectors=vectors,
        vcl_um_per_s=vcl_um,
        grade=who_grade(vcl_um),
    )
