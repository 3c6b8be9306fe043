# vfold/validators/scene_validator.py
"""
Synthetic Scene Validators

Specialized validators for synthetic scene descriptions (SceneSpec and
ObjectSpec from ``vfold.synth``).
"""

from typing import List, Tuple

from .ranges import RangeValidator


class SceneValidator:
    """
    Validate scene and object specifications.

    Validates:
    - Frame geometry and count
    - Object kind, label and lifetime
    - Detectability (peak above background plus three noise sigmas)
    - Start position inside the frame
    """

    KINDS = ("stationary", "linear", "circular", "sinusoid")
    LABELS = ("poor", "good", "excellent")

    @staticmethod
    def validate_object(obj, spec, index: int) -> List[str]:
        """
        Validate one ObjectSpec against its scene

        Args:
            obj: ObjectSpec
            spec: Owning SceneSpec
            index: Position in ``spec.objects`` (for messages)

        Returns:
            List of error messages (empty when valid)
        """
        name = f"objects[{index}]"
        errors = []

        checks = [
            RangeValidator.validate_choice(obj.kind, f"{name}.kind", SceneValidator.KINDS),
            RangeValidator.validate_choice(obj.label, f"{name}.label", SceneValidator.LABELS),
            RangeValidator.validate_range(obj.radius, f"{name}.radius", 0, min_exclusive=True),
            RangeValidator.validate_range(obj.speed, f"{name}.speed", min_value=0),
            RangeValidator.validate_range(obj.amplitude, f"{name}.amplitude", min_value=0),
            RangeValidator.validate_range(obj.period, f"{name}.period", 0, min_exclusive=True),
            RangeValidator.validate_range(obj.peak_intensity, f"{name}.peak_intensity", 1, 255),
            RangeValidator.validate_int_range(obj.enter_frame, f"{name}.enter_frame", min_value=0),
        ]
        errors.extend(error for is_valid, error in checks if not is_valid)

        if obj.exit_frame is not None and obj.exit_frame <= obj.enter_frame:
            errors.append(
                f"{name}: exit_frame {obj.exit_frame} must be > enter_frame {obj.enter_frame}"
            )

        floor = spec.background + 3 * spec.noise_sigma
        if obj.peak_intensity <= floor:
            errors.append(
                f"{name}: peak_intensity {obj.peak_intensity} not above "
                f"background + 3*noise_sigma = {floor}"
            )

        if obj.kind == "circular" and obj.speed > 2 * obj.amplitude:
            errors.append(
                f"{name}: circular speed {obj.speed} exceeds the circle diameter {2 * obj.amplitude}"
            )

        x, y = obj.start
        if not (0 <= x <= spec.width - 1 and 0 <= y <= spec.height - 1):
            errors.append(f"{name}: start ({x}, {y}) outside {spec.width}x{spec.height} frame")

        return errors

    @staticmethod
    def validate_scene(spec) -> Tuple[bool, List[str]]:
        """
        Validate a SceneSpec and all of its objects

        Args:
            spec: SceneSpec

        Returns:
            Tuple of (is_valid, errors)
        """
        checks = [
            RangeValidator.validate_int_range(spec.width, "width", min_value=1),
            RangeValidator.validate_int_range(spec.height, "height", min_value=1),
            RangeValidator.validate_int_range(spec.frames, "frames", min_value=2),
            RangeValidator.validate_range(spec.noise_sigma, "noise_sigma", min_value=0),
            RangeValidator.validate_range(spec.background, "background", 0, 255),
            RangeValidator.validate_range(spec.fps, "fps", 0, min_exclusive=True),
        ]
        errors = [error for is_valid, error in checks if not is_valid]
        if errors:
            return False, errors

        for index, obj in enumerate(spec.objects):
            errors.extend(SceneValidator.validate_object(obj, spec, index))

        return len(errors) == 0, errors
