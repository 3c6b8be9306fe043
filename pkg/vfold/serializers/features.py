# vfold/serializers/features.py
"""
Feature and Label Serializers

Feature CSV: ``track_id,axis,len,v1..vN`` with an optional trailing
``label`` column. Rows shorter than the longest vector leave the unused
``v`` fields empty. Values carry nine significant digits, so a file read
back and written again is byte-identical.

Label CSV: ``track_id,label`` with an optional ``split`` column.
"""

from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

from ..config import Config
from ..exceptions import VFoldValidationError
from ..features import FeatureRecord
from ..foldover import AXES
from ..utils import format_sig
from .base import BaseSerializer

LABEL_COLUMN = "label"
SPLIT_COLUMN = "split"


class LabelRecord(NamedTuple):
    """Ground-truth class (and optional split) of one track."""

    track_id: int
    label: str
    split: Optional[str] = None


def _axis_rank(axis: str) -> int:
    return AXES.index(axis) if axis in AXES else len(AXES)


class FeatureCsvSerializer(BaseSerializer):
    """
    Serialize feature records, one row per (track, axis).

    Rows are written in track id, then X/Y/Z order.
    """

    FIXED = ("track_id", "axis", "len")

    def __init__(self, with_label: bool = False, digits: int = Config.FEATURE_SIG_DIGITS):
        """
        Initialize serializer

        Args:
            with_label: Write a trailing ``label`` column
            digits: Significant digits per value
        """
        super().__init__(self.FIXED)
        self.with_label = with_label
        self.digits = digits

    def header(self, width: int) -> List[str]:
        columns = list(self.FIXED) + [f"v{i}" for i in range(1, width + 1)]
        if self.with_label:
            columns.append(LABEL_COLUMN)
        return columns

    def serialize(self, data: Sequence[FeatureRecord]) -> str:
        records = sorted(data, key=lambda r: (r.track_id, _axis_rank(r.axis)))
        width = max((len(r.values) for r in records), default=0)
        lines = [self.join(self.header(width))]
        for r in records:
            values = [format_sig(float(v), self.digits) for v in r.values]
            fields = [r.track_id, r.axis, len(values)] + values + [""] * (width - len(values))
            if self.with_label:
                fields.append(r.label or "")
            lines.append(self.join(fields))
        return "\n".join(lines) + "\n"

    def _parse_header(self, header: List[str]) -> Tuple[int, bool]:
        has_label = bool(header) and header[-1] == LABEL_COLUMN
        value_columns = header[len(self.FIXED):len(header) - int(has_label)]
        expected = [f"v{i}" for i in range(1, len(value_columns) + 1)]
        if header[:len(self.FIXED)] != list(self.FIXED) or value_columns != expected:
            raise VFoldValidationError(
                "Invalid feature CSV header",
                errors=[f"got '{self.join(header)}'"],
            )
        return len(value_columns), has_label

    def deserialize(self, text: str) -> List[FeatureRecord]:
        header, rows = self.split_lines(text)
        width, has_label = self._parse_header(header)
        self.with_label = has_label

        records = []
        for lineno, fields in rows:
            if len(fields) != len(header):
                raise self.row_error(lineno, f"expected {len(header)} fields, got {len(fields)}")
            try:
                track_id, axis, length = int(fields[0]), fields[1], int(fields[2])
                if not 0 <= length <= width:
                    raise ValueError(f"len {length} outside 0..{width}")
                cells = fields[3:3 + width]
                if any(cell != "" for cell in cells[length:]):
                    raise ValueError(f"values beyond len {length}")
                values = tuple(float(cell) for cell in cells[:length])
            except ValueError as e:
                raise self.row_error(lineno, str(e))
            label = (fields[-1] or None) if has_label else None
            records.append(FeatureRecord(track_id, axis, values, label))
        return records


class LabelCsvSerializer(BaseSerializer):
    """Serialize ground-truth labels, with a ``split`` column when any record has one."""

    FIXED = ("track_id", LABEL_COLUMN)

    def __init__(self):
        super().__init__(self.FIXED)

    def serialize(self, data: Sequence[LabelRecord]) -> str:
        records = sorted(data, key=lambda r: r.track_id)
        with_split = any(r.split for r in records)
        columns = list(self.FIXED) + ([SPLIT_COLUMN] if with_split else [])
        lines = [self.join(columns)]
        for r in records:
            fields = [r.track_id, r.label] + ([r.split or ""] if with_split else [])
            lines.append(self.join(fields))
        return "\n".join(lines) + "\n"

    def deserialize(self, text: str) -> List[LabelRecord]:
        header, rows = self.split_lines(text)
        with_split = header == list(self.FIXED) + [SPLIT_COLUMN]
        if header != list(self.FIXED) and not with_split:
            raise VFoldValidationError(
                "Invalid label CSV header", errors=[f"got '{self.join(header)}'"]
            )

        records = []
        for lineno, fields in rows:
            if len(fields) != len(header):
                raise self.row_error(lineno, f"expected {len(header)} fields, got {len(fields)}")
            try:
                track_id = int(fields[0])
            except ValueError as e:
                raise self.row_error(lineno, str(e))
            split = (fields[2] or None) if with_split else None
            records.append(LabelRecord(track_id, fields[1], split))
        return records


def label_maps(records: Sequence[LabelRecord]) -> Tuple[Dict[int, str], Dict[int, str]]:
    """Split label records into ``{id: label}`` and ``{id: split}`` maps."""
    labels = {r.track_id: r.label for r in records}
    splits = {r.track_id: r.split for r in records if r.split}
    return labels, splits
