# vfold/serializers/base.py
"""
Base Serializer Class

Abstract base class for the text file formats (CSV) every stage reads and
writes.
"""

from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, List, Optional, Sequence, Tuple, Union

from ..exceptions import VFoldValidationError
from ..utils import read_text, write_text


class BaseSerializer(ABC):
    """
    Abstract base class for VFOLD serializers.

    All serializers must inherit from this class and implement
    serialize() and deserialize() methods. ``dump`` and ``load`` wrap them
    with file I/O that raises VFoldIOError.
    """

    DELIMITER = ","

    def __init__(self, schema: Optional[Sequence[str]] = None):
        """
        Initialize serializer

        Args:
            schema: Expected header columns
        """
        self.schema = list(schema) if schema is not None else None

    @abstractmethod
    def serialize(self, data: Any) -> str:
        """
        Serialize records to file text

        Args:
            data: Records to serialize

        Returns:
            Newline-terminated text
        """
        pass

    @abstractmethod
    def deserialize(self, text: str) -> Any:
        """
        Parse file text back into records

        Args:
            text: File contents

        Returns:
            Deserialized records
        """
        pass

    def get_schema(self) -> Optional[List[str]]:
        """
        Get header columns for this serializer

        Returns:
            Column names or None
        """
        return self.schema

    def validate_header(self, header: Sequence[str]) -> Tuple[bool, List[str]]:
        """
        Validate a parsed header row against the schema

        Args:
            header: Column names read from a file

        Returns:
            Tuple of (is_valid, errors)
        """
        if not self.schema:
            return True, []

        errors = []
        if list(header) != self.schema:
            errors.append(
                f"Expected header '{self.DELIMITER.join(self.schema)}', "
                f"got '{self.DELIMITER.join(header)}'"
            )
        return len(errors) == 0, errors

    # -----------------------------------------------------------------
    # Shared helpers
    # -----------------------------------------------------------------

    def join(self, fields: Sequence[Any]) -> str:
        return self.DELIMITER.join(str(f) for f in fields)

    def split_lines(self, text: str) -> Tuple[List[str], List[Tuple[int, List[str]]]]:
        """
        Split text into header fields and numbered data rows

        Blank lines are skipped. Line numbers are 1-based.
        """
        lines = text.splitlines()
        if not lines or not lines[0].strip():
            raise VFoldValidationError(f"{type(self).__name__}: missing header")
        header = lines[0].strip().split(self.DELIMITER)
        rows = [
            (lineno, line.split(self.DELIMITER))
            for lineno, line in enumerate(lines[1:], start=2)
            if line.strip()
        ]
        return header, rows

    def row_error(self, lineno: int, message: str) -> VFoldValidationError:
        return VFoldValidationError(f"{type(self).__name__}: line {lineno}: {message}")

    def dump(self, data: Any, path: Union[str, Path]) -> Path:
        """Serialize ``data`` to ``path``."""
        path = Path(path)
        write_text(path, self.serialize(data))
        return path

    def load(self, path: Union[str, Path]) -> Any:
        """Deserialize the file at ``path``."""
        return self.deserialize(read_text(path))
