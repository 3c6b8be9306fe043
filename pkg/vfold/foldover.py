# vfold/foldover.py
"""
VFOLD Foldover

Builds each track's foldover: the per-pixel sum of the object's masked
intensities over every frame of its track. Viewed as a height-map the
foldover bounds the solid ``{(x, y, z): 1 <= z <= grid(y, x)}``, whose
cumulative slice images along X, Y and Z are the projections features are
computed from.

Pipeline per track:
    lock_region -> extract_object -> accumulate -> rotate_to_positive_x -> project
"""

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Tuple

import numpy as np

from .config import Config
from .exceptions import DimensionMismatchError, EmptyTrackError, VFoldValidationError
from .framestore import Frame, VideoSequence
from .segmentation import BinaryMask
from .tracking import Track
from .utils import get_logger

logger = get_logger(__name__)

AXES = ("X", "Y", "Z")


# =========================================================================
# DOMAIN TYPES
# =========================================================================

@dataclass(eq=False)
class Foldover:
    """
    Accumulated height-map of one track.

    Attributes:
        grid: Non-negative ``int64`` sums, shape ``(rows, cols)``
        origin: Frame coordinates ``(x, y)`` of ``grid[0, 0]``
        gamma: Number of accumulated frames
        track_id: Id of the source track
        start, end: First and last barycenters, frame coordinates
    """

    grid: np.ndarray
    origin: Tuple[float, float]
    gamma: int
    track_id: int
    start: Tuple[float, float]
    end: Tuple[float, float]

    def mass(self) -> int:
        return int(self.grid.sum())

    def support_bbox(self) -> Optional[Tuple[int, int, int, int]]:
        """``(row0, row1, col0, col1)`` half-open box of nonzero cells, or None."""
        rows = np.flatnonzero(self.grid.any(axis=1))
        cols = np.flatnonzero(self.grid.any(axis=0))
        if rows.size == 0:
            return None
        return int(rows[0]), int(rows[-1]) + 1, int(cols[0]), int(cols[-1]) + 1

    def support(self) -> np.ndarray:
        """Grid cropped to its nonzero support (``(0, 0)`` when empty)."""
        box = self.support_bbox()
        if box is None:
            return np.zeros((0, 0), dtype=np.int64)
        row0, row1, col0, col1 = box
        return self.grid[row0:row1, col0:col1]

    def support_extent(self) -> Tuple[int, int, int]:
        """``(extent_x, extent_y, extent_z)``: support width, height and peak."""
        support = self.support()
        if support.size == 0:
            return 0, 0, 0
        return int(support.shape[1]), int(support.shape[0]), int(support.max())

    def paste(self, width: int, height: int) -> np.ndarray:
        """
        Place the grid on a ``(height, width)`` zero canvas at its origin

        The origin is rounded to whole pixels; cells off the canvas are dropped.
        """
        canvas = np.zeros((height, width), dtype=np.int64)
        x0, y0 = (int(round(v)) for v in self.origin)
        rows, cols = self.grid.shape
        dst_r0, dst_c0 = max(y0, 0), max(x0, 0)
        dst_r1, dst_c1 = min(y0 + rows, height), min(x0 + cols, width)
        if dst_r1 <= dst_r0 or dst_c1 <= dst_c0:
            return canvas
        canvas[dst_r0:dst_r1, dst_c0:dst_c1] = self.grid[
            dst_r0 - y0:dst_r1 - y0, dst_c0 - x0:dst_c1 - x0
        ]
        return canvas


@dataclass(eq=False)
class Projection:
    """
    Cumulative slice image of a foldover solid along one axis.

    Attributes:
        axis: ``X``, ``Y`` or ``Z``
        grid: Non-negative ``int64`` counts
        step: Slab width along the projection axis
        extent: Support length along ``axis`` (peak value for Z)
    """

    axis: str
    grid: np.ndarray
    step: int
    extent: int

    def total(self) -> int:
        return int(self.grid.sum())


# =========================================================================
# LOCKING / EXTRACTION
# =========================================================================

def _disk(shape: Tuple[int, int], center: Tuple[float, float], r: float,
          offset: Tuple[int, int] = (0, 0)) -> np.ndarray:
    rows, cols = shape
    cx, cy = center
    ys = np.arange(offset[1], offset[1] + rows, dtype=np.float64)[:, None]
    xs = np.arange(offset[0], offset[0] + cols, dtype=np.float64)[None, :]
    return (xs - cx) ** 2 + (ys - cy) ** 2 <= r * r


def _check_radius(r: float) -> None:
    if not r > 0:
        raise VFoldValidationError(f"Lock radius r must be > 0, got {r}")


def lock_region(mask: BinaryMask, center: Tuple[float, float], r: float) -> BinaryMask:
    """
    Keep mask bits within Euclidean distance ``r`` of ``center``

    Example:
        >>> lock_region(BinaryMask(np.ones((11, 11), bool)), (5, 5), 1).count()
        5
    """
    _check_radius(r)
    cx, cy = center
    if not (0 <= cx <= mask.width - 1 and 0 <= cy <= mask.height - 1):
        raise VFoldValidationError(
            f"Center ({cx}, {cy}) outside {mask.width}x{mask.height} mask"
        )
    return BinaryMask(mask.bits & _disk(mask.bits.shape, center, r))


def extract_object(frame: Frame, lock: BinaryMask) -> Frame:
    """Original intensities where ``lock`` is set, zero elsewhere."""
    if frame.shape != lock.bits.shape:
        raise DimensionMismatchError(
            "Frame and lock mask sizes differ",
            errors=[f"frame {frame.width}x{frame.height}", f"lock {lock.width}x{lock.height}"],
        )
    return Frame(np.where(lock.bits, frame.data, 0).astype(np.uint8))


# =========================================================================
# ACCUMULATION
# =========================================================================

def _locked_window(frame: np.ndarray, mask: np.ndarray, center: Tuple[float, float], r: float):
    """Lock + extract restricted to the disk's bounding window."""
    height, width = frame.shape
    cx, cy = center
    x0, x1 = max(int(math.floor(cx - r)), 0), min(int(math.ceil(cx + r)) + 1, width)
    y0, y1 = max(int(math.floor(cy - r)), 0), min(int(math.ceil(cy + r)) + 1, height)
    disk = _disk((y1 - y0, x1 - x0), center, r, offset=(x0, y0))
    lock = mask[y0:y1, x0:x1] & disk
    values = np.where(lock, frame[y0:y1, x0:x1], 0).astype(np.int64)
    return x0, y0, lock, values


def accumulate(track: Track, video: VideoSequence, masks: Sequence[BinaryMask],
               r: float) -> Foldover:
    """
    Sum the object's locked intensities over every frame of ``track``

    For each track point the frame's mask is locked to the ``r``-disk around
    that point's barycenter, the frame is masked by it, and the result is
    added pixel-wise. The grid is cropped to the union bounding box of all
    lock regions and its frame position recorded as ``origin``.

    Args:
        track: Track with at least one point
        video: Source frames
        masks: One mask per frame of ``video``
        r: Lock radius in pixels

    Returns:
        Foldover with ``gamma = track.gamma``

    Raises:
        EmptyTrackError: Track has no points
        DimensionMismatchError: Masks do not match the frames
    """
    if track.gamma == 0:
        raise EmptyTrackError(f"Track {track.id} has no points")
    _check_radius(r)
    if len(masks) != video.frame_count:
        raise DimensionMismatchError(
            f"{len(masks)} masks for {video.frame_count} frames"
        )

    windows = []
    for point in track.points:
        if not 0 <= point.frame_index < video.frame_count:
            raise VFoldValidationError(
                f"Track {track.id} references frame {point.frame_index} of {video.frame_count}"
            )
        frame = video[point.frame_index]
        mask = masks[point.frame_index]
        if frame.shape != mask.bits.shape:
            raise DimensionMismatchError(f"Mask {point.frame_index} does not match its frame")
        windows.append(_locked_window(frame.data, mask.bits, (point.x, point.y), r))

    boxes = []
    for x0, y0, lock, _ in windows:
        rows = np.flatnonzero(lock.any(axis=1))
        cols = np.flatnonzero(lock.any(axis=0))
        if rows.size:
            boxes.append((x0 + cols[0], y0 + rows[0], x0 + cols[-1] + 1, y0 + rows[-1] + 1))

    if not boxes:
        x, y = track.start
        gx = min(max(int(round(x)), 0), video.width - 1)
        gy = min(max(int(round(y)), 0), video.height - 1)
        grid = np.zeros((1, 1), dtype=np.int64)
        origin = (gx, gy)
    else:
        left = int(min(b[0] for b in boxes))
        top = int(min(b[1] for b in boxes))
        right = int(max(b[2] for b in boxes))
        bottom = int(max(b[3] for b in boxes))
        grid = np.zeros((bottom - top, right - left), dtype=np.int64)
        for x0, y0, lock, values in windows:
            rows, cols = values.shape
            # window cells outside the union box carry no lock bits
            r0, c0 = max(y0, top), max(x0, left)
            r1, c1 = min(y0 + rows, bottom), min(x0 + cols, right)
            if r1 > r0 and c1 > c0:
                grid[r0 - top:r1 - top, c0 - left:c1 - left] += values[
                    r0 - y0:r1 - y0, c0 - x0:c1 - x0
                ]
        origin = (left, top)

    return Foldover(
        grid=grid,
        origin=origin,
        gamma=track.gamma,
        track_id=track.id,
        start=track.start,
        end=track.end,
    )


# =========================================================================
# ROTATION
# =========================================================================

def _rebalance(grid: np.ndarray, mass: int) -> np.ndarray:
    """
    Scale ``grid`` so it sums to ``mass`` exactly, in integers

    Each cell gets ``floor(cell * mass / total)``; the units left over go
    one each to the cells with the largest remainders (ties in row-major
    order). Only nonzero cells can gain, so the support is unchanged.
    """
    total = int(grid.sum())
    if total == mass or total == 0:
        return grid
    quotient, remainder = np.divmod(grid * mass, total)
    missing = mass - int(quotient.sum())
    flat_remainder = remainder.ravel()
    order = np.lexsort((np.arange(flat_remainder.size), -flat_remainder))
    out = quotient.ravel()
    out[order[:missing]] += 1
    return out.reshape(grid.shape)


def rotate_to_positive_x(f: Foldover, min_displacement: float = 1.0) -> Foldover:
    """
    Rotate the foldover so its start-to-end motion points along +X

    The grid turns about its mass centroid by ``-atan2(dy, dx)`` with
    inverse-mapped nearest-neighbour sampling into a box holding the rotated
    support. Sampling duplicates or drops cells at oblique angles, so the
    result is rebalanced to the original integer mass. Start and end are
    rotated with it. Returned unchanged when the displacement is below
    ``min_displacement``, the angle is zero or the grid is empty.
    """
    (sx, sy), (ex, ey) = f.start, f.end
    dx, dy = ex - sx, ey - sy
    if math.hypot(dx, dy) < min_displacement:
        return f
    theta = math.atan2(dy, dx)
    if abs(theta) < Config.ANGLE_EPSILON:
        return f
    mass = f.mass()
    if mass == 0:
        return f

    cos_t, sin_t = math.cos(theta), math.sin(theta)
    ox, oy = f.origin
    rows, cols = np.nonzero(f.grid)
    weights = f.grid[rows, cols].astype(np.float64)
    cx = ox + float((weights * cols).sum()) / mass
    cy = oy + float((weights * rows).sum()) / mass

    def forward(x, y):
        # R(-theta) about the pivot, relative coordinates
        return cos_t * (x - cx) + sin_t * (y - cy), -sin_t * (x - cx) + cos_t * (y - cy)

    corner_x = np.array([cols.min() - 0.5, cols.max() + 0.5]) + ox
    corner_y = np.array([rows.min() - 0.5, rows.max() + 0.5]) + oy
    cu, cv = forward(corner_x[[0, 1, 0, 1]], corner_y[[0, 0, 1, 1]])
    u_min, v_min = float(cu.min()), float(cv.min())
    out_w = max(int(math.ceil(float(cu.max()) - u_min - 1e-9)), 1)
    out_h = max(int(math.ceil(float(cv.max()) - v_min - 1e-9)), 1)

    u = u_min + np.arange(out_w, dtype=np.float64)[None, :] + 0.5
    v = v_min + np.arange(out_h, dtype=np.float64)[:, None] + 0.5
    src_x = cos_t * u - sin_t * v + cx - ox
    src_y = sin_t * u + cos_t * v + cy - oy
    src_c = np.floor(src_x + 0.5).astype(np.int64)
    src_r = np.floor(src_y + 0.5).astype(np.int64)
    height, width = f.grid.shape
    inside = (src_r >= 0) & (src_r < height) & (src_c >= 0) & (src_c < width)

    grid = np.zeros((out_h, out_w), dtype=np.int64)
    grid[inside] = f.grid[src_r[inside], src_c[inside]]
    if grid.sum() == 0:
        # tiny supports can fall between sample points; push cells forward
        du, dv = forward(ox + cols, oy + rows)
        dst_c = np.clip(np.floor(du - u_min).astype(np.int64), 0, out_w - 1)
        dst_r = np.clip(np.floor(dv - v_min).astype(np.int64), 0, out_h - 1)
        np.add.at(grid, (dst_r, dst_c), f.grid[rows, cols])
    grid = _rebalance(grid, mass)

    su, sv = forward(sx, sy)
    eu, ev = forward(ex, ey)
    rotated = replace(
        f,
        grid=grid,
        origin=(cx + u_min + 0.5, cy + v_min + 0.5),
        start=(cx + su, cy + sv),
        end=(cx + eu, cy + ev),
    )
    logger.debug("track %d rotated by %.3f rad", f.track_id, -theta)
    return rotated


# =========================================================================
# PROJECTION
# =========================================================================

def _pool(grid: np.ndarray, step: int, reduce) -> np.ndarray:
    rows, cols = grid.shape
    out_r, out_c = -(-rows // step), -(-cols // step)
    padded = np.zeros((out_r * step, out_c * step), dtype=grid.dtype)
    padded[:rows, :cols] = grid
    return reduce(padded.reshape(out_r, step, out_c, step), axis=(1, 3))


def _slab_counts(grid: np.ndarray, step: int) -> np.ndarray:
    """
    For each row band, count column slabs whose solid reaches each z band

    ``grid`` rows are the kept in-plane axis, columns the collapsed axis.
    """
    peak = _pool(grid, step, np.max)
    bands = -(-int(grid.max()) // step)
    levels = -(-peak // step)                     # z bands each slab reaches
    hist = np.zeros((levels.shape[0], bands + 1), dtype=np.int64)
    row_index = np.repeat(np.arange(levels.shape[0]), levels.shape[1])
    np.add.at(hist, (row_index, levels.ravel()), 1)
    at_least = np.cumsum(hist[:, ::-1], axis=1)[:, ::-1]
    return at_least[:, 1:]


def project(f: Foldover, axis: str, step: int = 1) -> Projection:
    """
    Cumulative slice image of the foldover solid along ``axis``

    - ``Z``: the height-map itself (block sums for ``step > 1``)
    - ``X``: rows are y, columns are z bands; each entry counts the x-slabs
      holding solid voxels in that cell
    - ``Y``: rows are x, columns are z bands, counting y-slabs

    The grid is first cropped to its support. At ``step = 1`` every
    projection sums to the solid's voxel count.

    Example:
        >>> p = project(f, "X")
        >>> p.total() == f.mass()
        True
    """
    if axis not in AXES:
        raise VFoldValidationError(f"Unknown axis '{axis}'", errors=list(AXES))
    if isinstance(step, bool) or not isinstance(step, (int, np.integer)) or step < 1:
        raise VFoldValidationError(f"Projection step must be an integer >= 1, got {step!r}")

    support = f.support()
    extent_x, extent_y, extent_z = f.support_extent()
    if support.size == 0:
        return Projection(axis, np.zeros((0, 0), dtype=np.int64), int(step), 0)

    if axis == "Z":
        grid = support.copy() if step == 1 else _pool(support, step, np.sum)
        return Projection(axis, grid, int(step), extent_z)
    if axis == "X":
        return Projection(axis, _slab_counts(support, step), int(step), extent_x)
    return Projection(axis, _slab_counts(support.T, step), int(step), extent_y)


def project_all(f: Foldover, steps: Tuple[int, int, int] = (1, 1, 1)) -> Tuple[Projection, Projection, Projection]:
    """X, Y and Z projections with per-axis steps."""
    return tuple(project(f, axis, step) for axis, step in zip(AXES, steps))
