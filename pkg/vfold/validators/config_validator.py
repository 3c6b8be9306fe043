# vfold/validators/config_validator.py
"""
Pipeline Configuration Validator

Checks every PipelineConfig field against the range its owning module
declares.
"""

from typing import Any, List, Tuple

from .ranges import RangeValidator


class ConfigValidator:
    """
    Validate a PipelineConfig.

    Checks:
    - Threshold source (``otsu`` or ``fixed:T`` with T in [0, 255])
    - Polarity
    - Detection, tracking, foldover and descriptor parameters
    """

    POLARITIES = ("bright-object", "dark-object")

    @staticmethod
    def validate_threshold(value: Any) -> Tuple[bool, List[str]]:
        """
        Validate the threshold source string

        Args:
            value: ``otsu`` or ``fixed:T``

        Returns:
            Tuple of (is_valid, errors)
        """
        if value == "otsu":
            return True, []
        if isinstance(value, str) and value.startswith("fixed:"):
            try:
                level = int(value[len("fixed:"):])
            except ValueError:
                return False, [f"threshold: cannot parse level in '{value}'"]
            is_valid, error = RangeValidator.validate_int_range(level, "threshold", 0, 255)
            return is_valid, [error] if error else []
        return False, [f"threshold: '{value}' must be 'otsu' or 'fixed:T'"]

    @staticmethod
    def validate(config) -> Tuple[bool, List[str]]:
        """
        Validate all fields of ``config``

        Args:
            config: PipelineConfig instance

        Returns:
            Tuple of (is_valid, errors)
        """
        _, errors = ConfigValidator.validate_threshold(config.threshold)

        checks = [
            RangeValidator.validate_choice(config.polarity, "polarity", ConfigValidator.POLARITIES),
            RangeValidator.validate_int_range(config.min_area, "min_area", min_value=1),
            RangeValidator.validate_range(config.gate, "gate", 0, min_exclusive=True),
            RangeValidator.validate_int_range(config.miss_tolerance, "miss_tolerance", min_value=0),
            RangeValidator.validate_int_range(config.min_track_length, "min_track_length", min_value=1),
            RangeValidator.validate_range(config.r, "r", 0, min_exclusive=True),
            RangeValidator.validate_range(config.min_displacement, "min_displacement", min_value=0),
            RangeValidator.validate_int_range(config.nu_x, "nu_x", min_value=1),
            RangeValidator.validate_int_range(config.nu_y, "nu_y", min_value=1),
            RangeValidator.validate_int_range(config.nu_z, "nu_z", min_value=1),
            RangeValidator.validate_odd(config.e, "e", min_value=3),
            RangeValidator.validate_int_range(config.passes, "passes", min_value=1),
            RangeValidator.validate_int_range(config.d, "d", min_value=1),
            RangeValidator.validate_range(config.um_per_px, "um_per_px", 0, min_exclusive=True),
        ]
        if config.fps is not None:
            checks.append(RangeValidator.validate_range(config.fps, "fps", 0, min_exclusive=True))

        errors.extend(error for is_valid, error in checks if not is_valid)
        return len(errors) == 0, errors
