# vfold/validators/ranges.py
"""
Range Validators

Primitive checks shared by the config and scene validators. Every check
returns ``(is_valid, error_message)`` so callers can collect all problems
before raising.
"""

from typing import Any, Optional, Sequence, Tuple


class RangeValidator:
    """
    Validate numeric fields and enumerations.

    Supports:
    - Integers (booleans rejected)
    - Real numbers within optional inclusive / exclusive bounds
    - Odd integers (kernel sides)
    - Membership in a fixed set of choices
    """

    @staticmethod
    def validate_int(value: Any, name: str) -> Tuple[bool, Optional[str]]:
        """
        Validate integer type

        Args:
            value: Value to validate
            name: Field name used in the message

        Returns:
            Tuple of (is_valid, error_message)
        """
        if isinstance(value, bool) or not isinstance(value, int):
            return False, f"{name}: expected int, got {type(value).__name__}"
        return True, None

    @staticmethod
    def validate_number(value: Any, name: str) -> Tuple[bool, Optional[str]]:
        """Validate int or float (booleans rejected)"""
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            return False, f"{name}: expected number, got {type(value).__name__}"
        if value != value:
            return False, f"{name}: NaN is not allowed"
        return True, None

    @staticmethod
    def validate_range(
        value: Any,
        name: str,
        min_value: Optional[float] = None,
        max_value: Optional[float] = None,
        min_exclusive: bool = False
    ) -> Tuple[bool, Optional[str]]:
        """
        Validate value is within range

        Args:
            value: Value to validate
            name: Field name used in the message
            min_value: Minimum value (inclusive unless ``min_exclusive``)
            max_value: Maximum value (inclusive)
            min_exclusive: Treat ``min_value`` as a strict bound

        Returns:
            Tuple of (is_valid, error_message)
        """
        is_valid, error = RangeValidator.validate_number(value, name)
        if not is_valid:
            return is_valid, error

        if min_value is not None:
            if min_exclusive and value <= min_value:
                return False, f"{name}: {value} must be > {min_value}"
            if not min_exclusive and value < min_value:
                return False, f"{name}: {value} below minimum {min_value}"

        if max_value is not None and value > max_value:
            return False, f"{name}: {value} above maximum {max_value}"

        return True, None

    @staticmethod
    def validate_int_range(
        value: Any,
        name: str,
        min_value: Optional[int] = None,
        max_value: Optional[int] = None
    ) -> Tuple[bool, Optional[str]]:
        """Validate an integer within inclusive bounds"""
        is_valid, error = RangeValidator.validate_int(value, name)
        if not is_valid:
            return is_valid, error
        return RangeValidator.validate_range(value, name, min_value, max_value)

    @staticmethod
    def validate_odd(value: Any, name: str, min_value: int = 1) -> Tuple[bool, Optional[str]]:
        """Validate an odd integer no smaller than ``min_value``"""
        is_valid, error = RangeValidator.validate_int_range(value, name, min_value=min_value)
        if not is_valid:
            return is_valid, error
        if value % 2 == 0:
            return False, f"{name}: {value} must be odd"
        return True, None

    @staticmethod
    def validate_choice(value: Any, name: str, choices: Sequence[Any]) -> Tuple[bool, Optional[str]]:
        """Validate membership in ``choices``"""
        if value not in choices:
            allowed = ", ".join(str(c) for c in choices)
            return False, f"{name}: '{value}' not one of {allowed}"
        return True, None
