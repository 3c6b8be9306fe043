# tests/test_validators.py
"""Tests for range, config and scene validators."""

import pytest

from vfold.config import PipelineConfig
from vfold.exceptions import SpecViolationError
from vfold.synth import KIND_CIRCULAR, KIND_LINEAR, ObjectSpec, SceneSpec
from vfold.validators import ConfigValidator, RangeValidator, SceneValidator


class TestRangeValidator:

    def test_int_rejects_bool_and_float(self):
        assert RangeValidator.validate_int(3, "n") == (True, None)
        assert not RangeValidator.validate_int(True, "n")[0]
        assert not RangeValidator.validate_int(3.0, "n")[0]

    def test_number_rejects_nan(self):
        is_valid, error = RangeValidator.validate_number(float("nan"), "x")
        assert not is_valid
        assert "NaN" in error

    def test_range_bounds(self):
        assert RangeValidator.validate_range(0, "x", 0)[0]
        assert not RangeValidator.validate_range(0, "x", 0, min_exclusive=True)[0]
        assert not RangeValidator.validate_range(11, "x", 0, 10)[0]

    def test_odd(self):
        assert RangeValidator.validate_odd(5, "e", 3)[0]
        assert not RangeValidator.validate_odd(4, "e", 3)[0]
        assert not RangeValidator.validate_odd(1, "e", 3)[0]

    def test_choice_message_lists_choices(self):
        is_valid, error = RangeValidator.validate_choice("z", "axis", ("X", "Y"))
        assert not is_valid
        assert "X, Y" in error


class TestConfigValidator:

    def test_threshold_forms(self):
        assert ConfigValidator.validate_threshold("otsu") == (True, [])
        assert ConfigValidator.validate_threshold("fixed:0")[0]
        assert ConfigValidator.validate_threshold("fixed:255")[0]
        assert not ConfigValidator.validate_threshold("fixed:256")[0]
        assert not ConfigValidator.validate_threshold("fixed:abc")[0]
        assert not ConfigValidator.validate_threshold(12)[0]

    def test_collects_every_error(self):
        config = PipelineConfig(min_area=0, passes=0, um_per_px=0.0)
        is_valid, errors = ConfigValidator.validate(config)
        assert not is_valid
        assert len(errors) == 3


class TestSceneValidator:

    def _scene(self, *objects, **kwargs):
        return SceneSpec(width=100, height=80, frames=10, objects=objects, **kwargs)

    def test_valid_scene(self):
        spec = self._scene(ObjectSpec(KIND_LINEAR, "good", start=(10.0, 10.0), speed=2.0))
        assert SceneValidator.validate_scene(spec) == (True, [])
        assert spec.validate() is spec

    def test_unknown_kind_and_label(self):
        spec = self._scene(ObjectSpec("spiral", "great", start=(10.0, 10.0)))
        is_valid, errors = SceneValidator.validate_scene(spec)
        assert not is_valid
        assert len(errors) == 2

    def test_exit_before_enter(self):
        spec = self._scene(ObjectSpec(KIND_LINEAR, "good", start=(5.0, 5.0), enter_frame=4, exit_frame=4))
        with pytest.raises(SpecViolationError):
            spec.validate()

    def test_peak_must_clear_noise(self):
        spec = self._scene(
            ObjectSpec(KIND_LINEAR, "good", start=(5.0, 5.0), peak_intensity=60.0),
            background=40.0, noise_sigma=10.0,
        )
        is_valid, errors = SceneValidator.validate_scene(spec)
        assert not is_valid
        assert "peak_intensity" in errors[0]

    def test_circular_speed_limited_by_diameter(self):
        spec = self._scene(ObjectSpec(KIND_CIRCULAR, "good", start=(50.0, 40.0), speed=9.0, amplitude=4.0))
        assert not SceneValidator.validate_scene(spec)[0]

    def test_start_outside_frame(self):
        spec = self._scene(ObjectSpec(KIND_LINEAR, "good", start=(100.0, 10.0)))
        assert not SceneValidator.validate_scene(spec)[0]

    def test_scene_level_errors_short_circuit(self):
        spec = SceneSpec(width=0, frames=1)
        is_valid, errors = SceneValidator.validate_scene(spec)
        assert not is_valid
        assert len(errors) == 2
