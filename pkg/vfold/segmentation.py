# vfold/segmentation.py
"""
VFOLD Segmentation

Thresholds frames into binary masks and extracts per-frame barycenter
detections from 8-connected components.
"""

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy import ndimage

from .config import POLARITY_BRIGHT, POLARITY_DARK, PipelineConfig
from .exceptions import VFoldValidationError
from .framestore import Frame
from .utils import get_logger

logger = get_logger(__name__)

POLARITIES = (POLARITY_BRIGHT, POLARITY_DARK)

# 8-connectivity
_STRUCTURE = np.ones((3, 3), dtype=np.int32)


# =========================================================================
# DOMAIN TYPES
# =========================================================================

@dataclass(frozen=True, eq=False)
class BinaryMask:
    """
    Foreground mask of one frame.

    Attributes:
        bits: Boolean array of shape ``(height, width)``, read-only
    """

    bits: np.ndarray

    def __post_init__(self):
        bits = np.array(self.bits, copy=True)
        if bits.ndim != 2:
            raise VFoldValidationError("Mask must be 2-D", context={"shape": tuple(bits.shape)})
        if bits.dtype != bool:
            if not np.isin(bits, (0, 1)).all():
                raise VFoldValidationError("Mask values must be 0 or 1")
            bits = bits.astype(bool)
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)

    @property
    def width(self) -> int:
        return int(self.bits.shape[1])

    @property
    def height(self) -> int:
        return int(self.bits.shape[0])

    def count(self) -> int:
        """Number of foreground pixels."""
        return int(np.count_nonzero(self.bits))


@dataclass(frozen=True)
class Detection:
    """
    One segmented object in one frame.

    Attributes:
        frame_index: 0-based frame ordinal
        x, y: Barycenter (column, row), sub-pixel
        area: Component size in pixels
        component_id: 1-based raster-order ordinal within the frame
    """

    frame_index: int
    x: float
    y: float
    area: int
    component_id: int

    @property
    def centroid(self) -> Tuple[float, float]:
        return self.x, self.y


# =========================================================================
# THRESHOLDING
# =========================================================================

def otsu_threshold(frame: Frame) -> int:
    """
    Threshold maximizing the between-class variance of the 256-bin histogram

    Classes are ``p <= T`` and ``p > T``. Scores are compared exactly in
    integer arithmetic; on ties the lower threshold wins. A constant frame
    returns its single value.

    Args:
        frame: Source frame

    Returns:
        T in [0, 255]

    Example:
        >>> otsu_threshold(Frame(np.array([[10, 200]], dtype=np.uint8)))
        10
    """
    data = frame.data
    if data.size == 0:
        raise VFoldValidationError("Cannot threshold an empty frame")

    hist = np.bincount(data.ravel(), minlength=256).astype(np.int64)
    levels = np.arange(256, dtype=np.int64)
    n0 = np.cumsum(hist).tolist()
    s0 = np.cumsum(hist * levels).tolist()
    total_n, total_s = n0[-1], s0[-1]

    # maximize (s0*n1 - s1*n0)^2 / (n0*n1); Python ints keep it exact
    best_t, best_num, best_den = None, 0, 1
    for t in range(256):
        below_n, below_s = n0[t], s0[t]
        above_n, above_s = total_n - below_n, total_s - below_s
        if below_n == 0 or above_n == 0:
            continue
        num = (below_s * above_n - above_s * below_n) ** 2
        den = below_n * above_n
        if best_t is None or num * best_den > best_num * den:
            best_t, best_num, best_den = t, num, den

    if best_t is None:
        return int(data.flat[0])
    return best_t


def binarize(frame: Frame, threshold: int, polarity: str = POLARITY_BRIGHT) -> BinaryMask:
    """
    Segment ``frame`` at ``threshold``

    Args:
        frame: Source frame
        threshold: T in [0, 255]
        polarity: ``bright-object`` keeps ``p > T``; ``dark-object`` keeps ``p <= T``

    Returns:
        BinaryMask of the frame's size
    """
    if isinstance(threshold, bool) or not isinstance(threshold, (int, np.integer)) \
            or not 0 <= threshold <= 255:
        raise VFoldValidationError(f"Threshold must be an integer in [0, 255], got {threshold!r}")
    if polarity == POLARITY_BRIGHT:
        return BinaryMask(frame.data > threshold)
    if polarity == POLARITY_DARK:
        return BinaryMask(frame.data <= threshold)
    raise VFoldValidationError(f"Unknown polarity '{polarity}'", errors=list(POLARITIES))


# =========================================================================
# DETECTION
# =========================================================================

def detect(mask: BinaryMask, frame_index: int, min_area: int = 4) -> List[Detection]:
    """
    Barycenters of 8-connected components with at least ``min_area`` pixels

    Components are ordered by their first pixel in raster order; surviving
    components are numbered from 1 in that order.

    Example:
        >>> bits = np.zeros((8, 10), dtype=bool); bits[2:5, 5:8] = True
        >>> detect(BinaryMask(bits), 0)[0].centroid
        (6.0, 3.0)
    """
    if isinstance(min_area, bool) or not isinstance(min_area, (int, np.integer)) or min_area < 1:
        raise VFoldValidationError(f"min_area must be an integer >= 1, got {min_area!r}")

    labels, count = ndimage.label(mask.bits, structure=_STRUCTURE)
    if count == 0:
        return []

    flat = labels.ravel()
    ids, first_index = np.unique(flat, return_index=True)
    keep = ids > 0
    ids, first_index = ids[keep], first_index[keep]
    ids = ids[np.argsort(first_index, kind="stable")]

    areas = np.bincount(flat, minlength=count + 1)
    ids = [int(i) for i in ids if areas[i] >= min_area]
    if not ids:
        return []

    centers = ndimage.center_of_mass(mask.bits.astype(np.float64), labels, ids)
    return [
        Detection(
            frame_index=int(frame_index),
            x=float(col),
            y=float(row),
            area=int(areas[label]),
            component_id=ordinal,
        )
        for ordinal, (label, (row, col)) in enumerate(zip(ids, centers), start=1)
    ]


def segment_frame(
    frame: Frame, frame_index: int, config: PipelineConfig
) -> Tuple[int, BinaryMask, List[Detection]]:
    """
    Threshold, binarize and detect one frame according to ``config``

    Returns:
        Tuple of (threshold, mask, detections)
    """
    threshold = config.fixed_threshold
    if threshold is None:
        threshold = otsu_threshold(frame)
    mask = binarize(frame, threshold, config.polarity)
    detections = detect(mask, frame_index, config.min_area)
    logger.debug("frame %d: T=%d, %d detection(s)", frame_index, threshold, len(detections))
    return threshold, mask, detections


def count_per_frame(detections_per_frame: Sequence[Sequence[Detection]]) -> List[int]:
    """Object count per frame."""
    return [len(detections) for detections in detections_per_frame]


def group_by_frame(detections: Sequence[Detection], frame_count: int) -> List[List[Detection]]:
    """
    Bucket a flat detection list into one list per frame

    Within a frame detections keep ``component_id`` order.
    """
    buckets: List[List[Detection]] = [[] for _ in range(frame_count)]
    for detection in detections:
        if not 0 <= detection.frame_index < frame_count:
            raise VFoldValidationError(
                f"Detection frame_index {detection.frame_index} outside 0..{frame_count - 1}"
            )
        buckets[detection.frame_index].append(detection)
    for bucket in buckets:
        bucket.sort(key=lambda d: d.component_id)
    return buckets
