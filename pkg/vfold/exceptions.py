# vfold/exceptions.py
"""
VFOLD Custom Exceptions

This module defines all custom exception classes for the VFOLD library.
Each exception provides specific error information and context.

Hierarchy:
    VFoldError
    ├── VFoldValidationError   (contract violations, CLI exit code 1)
    │   ├── MixedDimensionsError, EmptySequenceError, MalformedHeaderError
    │   ├── DimensionMismatchError, EmptyTrackError, AxisMismatchError
    │   ├── LengthMismatchError, UnknownLabelError, EmptyMatrixError
    │   ├── InconsistentDimsError, MissingClassError
    │   └── SpecViolationError, ConfigError
    └── VFoldIOError           (file I/O failures, CLI exit code 2)
"""

from typing import List, Optional


class VFoldError(Exception):
    """
    Base exception class for all VFOLD-related errors.

    All other VFOLD exceptions inherit from this class, allowing
    users to catch all VFOLD errors with a single except block.

    Example:
        try:
            vfold.load_sequence("frames/", "image-dir")
        except vfold.VFoldError as e:
            print(f"VFOLD error: {e}")
    """

    def __init__(self, message: str, context: Optional[dict] = None):
        """
        Initialize VFoldError

        Args:
            message: Error message
            context: Additional context information
        """
        super().__init__(message)
        self.message = message
        self.context = context or {}

    def __str__(self) -> str:
        return f"{type(self).__name__}: {self.message}"


class VFoldValidationError(VFoldError):
    """
    Raised when an input violates an operation's contract.

    Attributes:
        errors: List of individual validation messages
    """

    def __init__(
        self,
        message: str,
        errors: Optional[List[str]] = None,
        context: Optional[dict] = None
    ):
        super().__init__(message, context)
        self.errors = errors or []

    def __str__(self) -> str:
        if self.errors:
            error_str = "\n  ".join(self.errors)
            return f"{type(self).__name__}: {self.message}\n  {error_str}"
        return f"{type(self).__name__}: {self.message}"


class VFoldIOError(VFoldError):
    """
    Raised for file I/O errors.

    This exception is raised when:
    - File cannot be opened
    - File read/write fails
    - Path is invalid

    Attributes:
        filepath: Path to file that caused error
        operation: Operation that failed (read, write, etc.)

    Example:
        try:
            vfold.load_sequence("missing.raw", "raw-planar")
        except vfold.VFoldIOError as e:
            print(f"I/O error on {e.filepath}: {e}")
    """

    def __init__(
        self,
        message: str,
        filepath: Optional[str] = None,
        operation: Optional[str] = None,
        context: Optional[dict] = None
    ):
        """
        Initialize VFoldIOError

        Args:
            message: Error message
            filepath: Path to file
            operation: Operation (read, write, list, etc.)
            context: Additional context
        """
        super().__init__(message, context)
        self.filepath = filepath
        self.operation = operation

    def __str__(self) -> str:
        parts = ["VFoldIOError"]
        if self.operation:
            parts.append(f" during {self.operation}")
        if self.filepath:
            parts.append(f" on '{self.filepath}'")
        parts.append(f": {self.message}")
        return "".join(parts)


# =========================================================================
# FRAME STORE
# =========================================================================

class MixedDimensionsError(VFoldValidationError):
    """Raised when frames of one sequence disagree on width or height."""


class EmptySequenceError(VFoldValidationError):
    """Raised when a sequence holds fewer frames than a pipeline run needs."""


class MalformedHeaderError(VFoldValidationError):
    """
    Raised when a raw-planar header cannot be decoded.

    Attributes:
        filepath: File whose header failed
    """

    def __init__(self, message: str, filepath: Optional[str] = None, context: Optional[dict] = None):
        super().__init__(message, context=context)
        self.filepath = filepath

    def __str__(self) -> str:
        if self.filepath:
            return f"MalformedHeaderError in '{self.filepath}': {self.message}"
        return f"MalformedHeaderError: {self.message}"


# =========================================================================
# FOLDOVER / FEATURES
# =========================================================================

class DimensionMismatchError(VFoldValidationError):
    """Raised when a frame and a mask (or two grids) differ in shape."""


class EmptyTrackError(VFoldValidationError):
    """Raised when a foldover is requested for a track without points."""


class AxisMismatchError(VFoldValidationError):
    """
    Raised when descriptors are passed for the wrong projection axis.

    Attributes:
        expected_axis: Axis the slot requires
        actual_axis: Axis the descriptor carries
    """

    def __init__(
        self,
        message: str,
        expected_axis: Optional[str] = None,
        actual_axis: Optional[str] = None,
        context: Optional[dict] = None
    ):
        super().__init__(message, context=context)
        self.expected_axis = expected_axis
        self.actual_axis = actual_axis

    def __str__(self) -> str:
        if self.expected_axis and self.actual_axis:
            return (
                f"AxisMismatchError: expected {self.expected_axis}, "
                f"got {self.actual_axis}: {self.message}"
            )
        return f"AxisMismatchError: {self.message}"


# =========================================================================
# CLASSIFICATION
# =========================================================================

class LengthMismatchError(VFoldValidationError):
    """Raised when prediction and truth label lists differ in length."""


class UnknownLabelError(VFoldValidationError):
    """
    Raised for a label outside the configured class names.

    Attributes:
        label: Offending label
    """

    def __init__(self, message: str, label=None, context: Optional[dict] = None):
        super().__init__(message, context=context)
        self.label = label


class EmptyMatrixError(VFoldValidationError):
    """Raised when metrics are requested for a confusion matrix with no samples."""


class InconsistentDimsError(VFoldValidationError):
    """Raised when feature vectors handed to a classifier differ in length."""


class MissingClassError(VFoldValidationError):
    """Raised when a class has no training sample."""


# =========================================================================
# SYNTHESIS / CONFIGURATION
# =========================================================================

class SpecViolationError(VFoldValidationError):
    """Raised when a SceneSpec or ObjectSpec breaks its invariants."""


class ConfigError(VFoldValidationError):
    """
    Raised for invalid pipeline configuration.

    Attributes:
        field_name: Name of the offending field, when known
    """

    def __init__(
        self,
        message: str,
        errors: Optional[List[str]] = None,
        field_name: Optional[str] = None,
        context: Optional[dict] = None
    ):
        super().__init__(message, errors=errors, context=context)
        self.field_name = field_name
