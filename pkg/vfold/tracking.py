# vfold/tracking.py
"""
VFOLD Tracking

Links per-frame detections into per-object tracks with gated greedy
nearest-neighbour matching.

Lifecycle:
- a detection no track claims opens a new track (object entering the field)
- a track left unmatched for more than ``miss_tolerance`` consecutive
  frames ends (object leaving the field)
"""

from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Sequence, Tuple

import numpy as np

from .exceptions import VFoldValidationError
from .segmentation import Detection
from .utils import get_logger

logger = get_logger(__name__)

TRACK_ACTIVE = "active"
TRACK_ENDED = "ended"


# =========================================================================
# DOMAIN TYPES
# =========================================================================

class TrackPoint(NamedTuple):
    """One barycenter of a track."""

    frame_index: int
    x: float
    y: float


@dataclass
class Track:
    """
    Ordered barycenters of one object.

    Attributes:
        id: 1-based id in creation order
        points: Track points with strictly increasing frame indices
        state: ``active`` or ``ended``
        misses: Consecutive frames without a match
    """

    id: int
    points: List[TrackPoint] = field(default_factory=list)
    state: str = TRACK_ACTIVE
    misses: int = 0

    @property
    def gamma(self) -> int:
        """Number of frames the track spans with a barycenter."""
        return len(self.points)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def start(self) -> Tuple[float, float]:
        return self.points[0].x, self.points[0].y

    @property
    def end(self) -> Tuple[float, float]:
        return self.points[-1].x, self.points[-1].y

    @property
    def frame_indices(self) -> List[int]:
        return [p.frame_index for p in self.points]

    def centroids(self) -> np.ndarray:
        """``(gamma, 2)`` array of ``(x, y)`` rows."""
        return np.array([(p.x, p.y) for p in self.points], dtype=np.float64).reshape(-1, 2)

    def append(self, point: TrackPoint) -> None:
        if self.points and point.frame_index <= self.points[-1].frame_index:
            raise VFoldValidationError(
                f"Track {self.id}: frame {point.frame_index} does not follow "
                f"frame {self.points[-1].frame_index}"
            )
        self.points.append(point)


@dataclass
class MatchResult:
    """
    Outcome of matching one frame's detections against the active tracks.

    Attributes:
        pairs: ``(track_id, detection_index, distance)`` in acceptance order
        new_tracks: Indices of detections no track claimed
        ended_tracks: Ids of tracks whose miss count now exceeds the tolerance
        missed_tracks: Ids of all unmatched tracks (ended ones included)
    """

    pairs: List[Tuple[int, int, float]] = field(default_factory=list)
    new_tracks: List[int] = field(default_factory=list)
    ended_tracks: List[int] = field(default_factory=list)
    missed_tracks: List[int] = field(default_factory=list)


# =========================================================================
# MATCHING
# =========================================================================

def _positions(items) -> np.ndarray:
    return np.array(items, dtype=np.float64).reshape(-1, 2)


def match_step(
    active_tracks: Sequence[Track],
    detections: Sequence[Detection],
    gate: float,
    miss_tolerance: int = 0,
) -> MatchResult:
    """
    Greedy global nearest-neighbour assignment within ``gate``

    Every (track, detection) pair at Euclidean distance ``<= gate`` is sorted
    by distance, then track id, then detection index, and accepted when
    neither side is already claimed. Inputs are not modified.

    Args:
        active_tracks: Tracks to extend; each is matched from its last point
        detections: Detections of the next frame
        gate: Largest accepted distance (pixels, > 0)
        miss_tolerance: Misses a track survives before it ends

    Returns:
        MatchResult

    Example:
        >>> track = Track(1, [TrackPoint(0, 10.0, 10.0)])
        >>> match_step([track], [Detection(1, 13.0, 14.0, 9, 1)], gate=10).pairs
        [(1, 0, 5.0)]
    """
    if not gate > 0:
        raise VFoldValidationError(f"gate must be > 0, got {gate}")
    if miss_tolerance < 0:
        raise VFoldValidationError(f"miss_tolerance must be >= 0, got {miss_tolerance}")

    result = MatchResult()
    claimed_tracks = set()
    claimed_detections = set()

    if active_tracks and detections:
        track_xy = _positions([t.points[-1][1:] for t in active_tracks])
        det_xy = _positions([d.centroid for d in detections])
        distance = np.hypot(
            track_xy[:, None, 0] - det_xy[None, :, 0],
            track_xy[:, None, 1] - det_xy[None, :, 1],
        )
        rows, cols = np.nonzero(distance <= gate)
        ids = np.array([t.id for t in active_tracks], dtype=np.int64)[rows]
        candidate_distance = distance[rows, cols]
        # lexsort: last key is primary
        order = np.lexsort((cols, ids, candidate_distance))

        for k in order:
            row, col = int(rows[k]), int(cols[k])
            if row in claimed_tracks or col in claimed_detections:
                continue
            claimed_tracks.add(row)
            claimed_detections.add(col)
            result.pairs.append((int(ids[k]), col, float(candidate_distance[k])))

    for row, track in enumerate(active_tracks):
        if row in claimed_tracks:
            continue
        result.missed_tracks.append(track.id)
        if track.misses + 1 > miss_tolerance:
            result.ended_tracks.append(track.id)

    result.new_tracks = [i for i in range(len(detections)) if i not in claimed_detections]
    return result


# =========================================================================
# TRACKER
# =========================================================================

class Tracker:
    """
    Stateful frame-by-frame tracker.

    Feed one frame's detections at a time through ``update``; ``tracks()``
    returns every track created so far, ended or active, in id order.

    Example:
        >>> tracker = Tracker(gate=20.0)
        >>> for detections in detections_per_frame:
        ...     tracker.update(detections)
        >>> tracks = tracker.tracks()
    """

    def __init__(self, gate: float, miss_tolerance: int = 0):
        """
        Initialize tracker

        Args:
            gate: Largest matching distance (pixels)
            miss_tolerance: Consecutive misses a track survives
        """
        self.gate = gate
        self.miss_tolerance = miss_tolerance
        self.next_id = 1
        self.active: Dict[int, Track] = {}
        self.ended: Dict[int, Track] = {}

    def register(self, detection: Detection) -> Track:
        track = Track(self.next_id)
        track.append(TrackPoint(detection.frame_index, detection.x, detection.y))
        self.active[track.id] = track
        self.next_id += 1
        return track

    def deregister(self, track_id: int) -> None:
        track = self.active.pop(track_id)
        track.state = TRACK_ENDED
        self.ended[track_id] = track

    def update(self, detections: Sequence[Detection]) -> MatchResult:
        """
        Match one frame's detections and advance track lifecycles

        Args:
            detections: Detections of a single frame, in component order

        Returns:
            The MatchResult applied
        """
        result = match_step(
            list(self.active.values()), detections, self.gate, self.miss_tolerance
        )

        for track_id, index, _ in result.pairs:
            detection = detections[index]
            track = self.active[track_id]
            track.append(TrackPoint(detection.frame_index, detection.x, detection.y))
            track.misses = 0

        for track_id in result.missed_tracks:
            self.active[track_id].misses += 1
        for track_id in result.ended_tracks:
            self.deregister(track_id)

        for index in result.new_tracks:
            self.register(detections[index])

        if result.ended_tracks or result.new_tracks:
            logger.debug(
                "matched %d, new %d, ended %d",
                len(result.pairs), len(result.new_tracks), len(result.ended_tracks),
            )
        return result

    def tracks(self) -> List[Track]:
        merged = {**self.ended, **self.active}
        return [merged[track_id] for track_id in sorted(merged)]


def build_tracks(
    detections_per_frame: Sequence[Sequence[Detection]],
    gate: float,
    miss_tolerance: int = 0,
) -> List[Track]:
    """
    Run the tracker over every frame in order

    Track ids start at 1 in creation order; within a frame new tracks follow
    detection (raster) order.

    Returns:
        All tracks, ended and still active, sorted by id
    """
    tracker = Tracker(gate, miss_tolerance)
    for detections in detections_per_frame:
        tracker.update(detections)
    tracks = tracker.tracks()
    logger.info("built %d track(s) over %d frame(s)", len(tracks), len(detections_per_frame))
    return tracks


def filter_tracks(tracks: Sequence[Track], min_length: int) -> List[Track]:
    """Tracks with at least ``min_length`` points."""
    return [track for track in tracks if track.gamma >= min_length]


# =========================================================================
# GROUND-TRUTH ASSOCIATION
# =========================================================================

def mean_centroid_error(track: Track, reference: Track) -> float:
    """
    Mean distance between two tracks over the frames they share

    Returns:
        ``inf`` when the tracks share no frame
    """
    ours = {p.frame_index: (p.x, p.y) for p in track.points}
    shared = [(ours[p.frame_index], (p.x, p.y)) for p in reference.points if p.frame_index in ours]
    if not shared:
        return float("inf")
    a = np.array([s[0] for s in shared])
    b = np.array([s[1] for s in shared])
    return float(np.hypot(*(a - b).T).mean())


def associate(tracks: Sequence[Track], reference: Sequence[Track],
              max_error: float = float("inf")) -> Dict[int, Tuple[int, float]]:
    """
    Pair each track with the reference track it follows most closely

    Pairs are accepted greedily by ascending mean error (then track id,
    then reference id) so each reference track is claimed at most once.

    Returns:
        Track id to (reference id, mean centroid error)
    """
    candidates = []
    for track in tracks:
        for ref in reference:
            error = mean_centroid_error(track, ref)
            if error <= max_error:
                candidates.append((error, track.id, ref.id))

    pairs: Dict[int, Tuple[int, float]] = {}
    claimed = set()
    for error, track_id, ref_id in sorted(candidates):
        if track_id in pairs or ref_id in claimed:
            continue
        pairs[track_id] = (ref_id, error)
        claimed.add(ref_id)
    return dict(sorted(pairs.items()))
