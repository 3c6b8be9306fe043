# vfold/serializers/tracks.py
"""
Track and Detection Serializers

CSV formats of the segmentation and tracking stages:

    track_id,frame_index,x,y
    frame_index,component_id,x,y,area

Coordinates carry six decimal places.
"""

from collections import OrderedDict
from typing import Dict, List, Sequence

from ..config import Config
from ..segmentation import Detection
from ..tracking import TRACK_ENDED, Track, TrackPoint
from ..exceptions import VFoldValidationError
from ..utils import format_fixed
from .base import BaseSerializer


class TrackCsvSerializer(BaseSerializer):
    """
    Serialize tracks, one row per track point.

    Rows are ordered by track id, then frame index. Loaded tracks are
    marked ``ended``.
    """

    HEADER = ("track_id", "frame_index", "x", "y")

    def __init__(self, decimals: int = Config.TRACK_DECIMALS):
        super().__init__(self.HEADER)
        self.decimals = decimals

    def serialize(self, data: Sequence[Track]) -> str:
        lines = [self.join(self.HEADER)]
        for track in sorted(data, key=lambda t: t.id):
            for point in track.points:
                lines.append(self.join((
                    track.id,
                    point.frame_index,
                    format_fixed(point.x, self.decimals),
                    format_fixed(point.y, self.decimals),
                )))
        return "\n".join(lines) + "\n"

    def deserialize(self, text: str) -> List[Track]:
        header, rows = self.split_lines(text)
        is_valid, errors = self.validate_header(header)
        if not is_valid:
            raise VFoldValidationError("Invalid track CSV", errors=errors)

        tracks: Dict[int, Track] = OrderedDict()
        for lineno, fields in rows:
            if len(fields) != len(self.HEADER):
                raise self.row_error(lineno, f"expected 4 fields, got {len(fields)}")
            try:
                track_id, frame_index = int(fields[0]), int(fields[1])
                x, y = float(fields[2]), float(fields[3])
            except ValueError as e:
                raise self.row_error(lineno, str(e))
            track = tracks.setdefault(track_id, Track(track_id, state=TRACK_ENDED))
            try:
                track.append(TrackPoint(frame_index, x, y))
            except VFoldValidationError as e:
                raise self.row_error(lineno, e.message)

        return [tracks[track_id] for track_id in sorted(tracks)]


class DetectionCsvSerializer(BaseSerializer):
    """Serialize per-frame detections in frame, then component order."""

    HEADER = ("frame_index", "component_id", "x", "y", "area")

    def __init__(self, decimals: int = Config.TRACK_DECIMALS):
        super().__init__(self.HEADER)
        self.decimals = decimals

    def serialize(self, data: Sequence[Detection]) -> str:
        lines = [self.join(self.HEADER)]
        for d in sorted(data, key=lambda d: (d.frame_index, d.component_id)):
            lines.append(self.join((
                d.frame_index,
                d.component_id,
                format_fixed(d.x, self.decimals),
                format_fixed(d.y, self.decimals),
                d.area,
            )))
        return "\n".join(lines) + "\n"

    def deserialize(self, text: str) -> List[Detection]:
        header, rows = self.split_lines(text)
        is_valid, errors = self.validate_header(header)
        if not is_valid:
            raise VFoldValidationError("Invalid detection CSV", errors=errors)

        detections = []
        for lineno, fields in rows:
            if len(fields) != len(self.HEADER):
                raise self.row_error(lineno, f"expected 5 fields, got {len(fields)}")
            try:
                detections.append(Detection(
                    frame_index=int(fields[0]),
                    component_id=int(fields[1]),
                    x=float(fields[2]),
                    y=float(fields[3]),
                    area=int(fields[4]),
                ))
            except ValueError as e:
                raise self.row_error(lineno, str(e))
        return detections
