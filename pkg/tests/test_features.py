# tests/test_features.py
"""Tests for kinematics, descriptors, assembly and WHO grading."""

import math
import time

import numpy as np
import pytest

from vfold.config import PipelineConfig
from vfold.exceptions import AxisMismatchError, EmptyTrackError, VFoldValidationError
from vfold.features import (
    DescriptorGrid, assemble, conv_descriptor, extract_track_features, fit_average_path,
    grade_distribution, kinematics, polyline_length, to_um_per_s, who_grade,
)
from vfold.foldover import Projection
from vfold.segmentation import segment_frame
from vfold.tracking import Track, TrackPoint, build_tracks


def track_from(points):
    return Track(1, [TrackPoint(j, float(x), float(y)) for j, (x, y) in enumerate(points)])


def projection(grid, axis="Z"):
    return Projection(axis, np.array(grid, dtype=np.int64), 1, 0)


class TestPolyline:

    def test_length(self):
        assert polyline_length(np.array([[0, 0], [3, 4], [3, 10]])) == 11.0

    def test_single_point(self):
        assert polyline_length(np.array([[1.0, 1.0]])) == 0.0


class TestKinematics:

    def test_docstring_example(self):
        k = kinematics(track_from([(2 * j, 0) for j in range(25)]), 0, 0)
        assert (round(k.dist_A, 6), round(k.vcl, 6), round(k.lin, 6)) == (48.0, 1.92, 1.0)

    def test_extents_divided_by_gamma(self):
        k = kinematics(track_from([(j, 0) for j in range(4)]), 12, 6)
        assert (k.fps_x, k.fps_y) == (3.0, 1.5)

    def test_zigzag(self):
        k = kinematics(track_from([(0, 0), (3, 4), (6, 0)]), 0, 0)
        assert k.dist_A == 10.0
        assert k.disp_B == 6.0
        # fewer than four points: the raw path is the average path
        assert k.avg_path_M == 10.0
        assert k.lin == pytest.approx(0.6)
        assert k.wob == 1.0

    def test_empty_track(self):
        with pytest.raises(EmptyTrackError):
            kinematics(Track(1), 0, 0)

    def test_negative_extent(self):
        with pytest.raises(VFoldValidationError):
            kinematics(track_from([(0, 0)]), -1, 0)

    def test_kinematic_part_order(self):
        k = kinematics(track_from([(j, 0) for j in range(5)]), 0, 0)
        assert k.kinematic_part() == (
            k.dist_A, k.disp_B, k.avg_path_M, k.vcl, k.vsl, k.vap, k.lin, k.str_, k.wob,
        )

    def test_scale_equivariance(self):
        rng = np.random.default_rng(21)
        for _ in range(20):
            points = np.cumsum(rng.normal(0.0, 2.0, size=(12, 2)), axis=0) + 50.0
            base = kinematics(track_from(points), 0, 0)
            for s in (0.5, 2.0, 3.7):
                scaled = kinematics(track_from(points * s), 0, 0)
                for name in ("dist_A", "disp_B", "avg_path_M", "vcl", "vsl", "vap"):
                    expected = s * getattr(base, name)
                    assert getattr(scaled, name) == pytest.approx(expected, rel=1e-9), name
                for name in ("lin", "str_", "wob"):
                    expected = getattr(base, name)
                    assert getattr(scaled, name) == pytest.approx(expected, rel=1e-9), name

    @pytest.mark.performance
    def test_straight_lines_closed_form(self):
        began = time.perf_counter()
        rng = np.random.default_rng(11)
        for _ in range(100):
            gamma = int(rng.integers(4, 41))
            start = rng.uniform(0, 500, size=2)
            heading = rng.uniform(0, 2 * math.pi)
            speed = rng.uniform(0.1, 15.0)
            steps = np.arange(gamma)[:, None] * speed * np.array([math.cos(heading), math.sin(heading)])
            k = kinematics(track_from(start + steps), 0, 0)
            assert abs(k.dist_A - k.disp_B) < 1e-9
            assert k.lin == pytest.approx(1.0, abs=1e-9)
            assert k.str_ == pytest.approx(1.0, abs=1e-9)
            assert k.wob == pytest.approx(1.0, abs=1e-9)
        assert time.perf_counter() - began < 1.0

    @pytest.mark.performance
    def test_stationary_is_all_zero(self):
        began = time.perf_counter()
        rng = np.random.default_rng(12)
        for _ in range(100):
            gamma = int(rng.integers(1, 41))
            x, y = rng.uniform(0, 500, size=2)
            k = kinematics(track_from([(x, y)] * gamma), 0, 0)
            assert k.kinematic_part() == (0.0,) * 9
        assert time.perf_counter() - began < 1.0


class TestAveragePath:

    @pytest.mark.performance
    def test_exact_cubics_are_reproduced(self):
        began = time.perf_counter()
        rng = np.random.default_rng(13)
        for _ in range(50):
            gamma = int(rng.integers(4, 41))
            t = np.arange(gamma, dtype=np.float64)
            cx = rng.uniform(-1, 1, size=4) * [50.0, 3.0, 0.2, 0.01]
            cy = rng.uniform(-1, 1, size=4) * [50.0, 3.0, 0.2, 0.01]
            points = np.column_stack([
                cx[0] + cx[1] * t + cx[2] * t ** 2 + cx[3] * t ** 3,
                cy[0] + cy[1] * t + cy[2] * t ** 2 + cy[3] * t ** 3,
            ])
            path, length = fit_average_path(track_from(points))
            assert np.abs(path - points).max() < 1e-6
            assert abs(length - polyline_length(points)) < 1e-6
        assert time.perf_counter() - began < 1.0

    def test_short_track_keeps_points(self):
        points = [(0, 0), (1, 5), (2, 0)]
        path, length = fit_average_path(track_from(points))
        assert path.tolist() == [[0.0, 0.0], [1.0, 5.0], [2.0, 0.0]]
        assert length == polyline_length(np.array(points, dtype=float))

    def test_smooths_jitter(self):
        points = [(j, (-1) ** j * 0.5) for j in range(10)]
        _, length = fit_average_path(track_from(points))
        assert length < polyline_length(np.array(points, dtype=float))

    def test_noisy_sinusoid_average_path_is_shorter(self):
        rng = np.random.default_rng(31)
        t = np.arange(40, dtype=np.float64)
        clean = np.column_stack([2.0 * t, 3.0 * np.sin(2 * math.pi * t / 20.0)])
        for trial in range(100):
            points = clean + rng.normal(0.0, 0.5, size=clean.shape)
            k = kinematics(track_from(points), 0, 0)
            assert k.avg_path_M <= k.dist_A, trial


class TestDescriptor:

    def test_uniform_grid_stays_one(self):
        h = conv_descriptor(projection(np.full((7, 5), 4)), d=4)
        assert np.allclose(h.values, 1.0)
        assert h.values.shape == (16,)

    def test_interior_impulse(self):
        grid = np.zeros((5, 5))
        grid[2, 2] = 3
        h = conv_descriptor(projection(grid), e=3, passes=1, d=5)
        values = h.values.reshape(5, 5)
        assert values[2, 2] == pytest.approx(1 / 9)
        assert values[1:4, 1:4] == pytest.approx(np.full((3, 3), 1 / 9))
        assert values[0].sum() == pytest.approx(0.0)

    def test_values_in_unit_range(self):
        rng = np.random.default_rng(4)
        h = conv_descriptor(projection(rng.integers(0, 40, size=(9, 13))), d=6)
        assert h.values.min() >= 0.0
        assert h.values.max() <= 1.0 + 1e-12

    def test_empty_projection(self):
        h = conv_descriptor(Projection("X", np.zeros((0, 0), dtype=np.int64), 1, 0), d=3)
        assert h.values.tolist() == [0.0] * 9
        assert h.axis == "X"

    def test_upsamples_small_grids(self):
        h = conv_descriptor(projection([[5]]), d=4)
        assert np.allclose(h.values, 1.0)

    @pytest.mark.parametrize("kwargs", [{"e": 4}, {"e": 1}, {"passes": 0}, {"d": 0}])
    def test_bad_parameters(self, kwargs):
        with pytest.raises(VFoldValidationError):
            conv_descriptor(projection([[1]]), **kwargs)

    def test_descriptor_size_check(self):
        with pytest.raises(VFoldValidationError):
            DescriptorGrid(np.zeros(5), "Z", 2)

    def test_more_passes_never_raise_the_peak(self):
        rng = np.random.default_rng(41)
        for _ in range(50):
            grid = rng.integers(0, 51, size=(8, 8))
            grid[rng.integers(8), rng.integers(8)] = 50
            for e in (3, 5):
                for passes in (1, 2, 3):
                    few = conv_descriptor(projection(grid), e=e, passes=passes, d=8)
                    many = conv_descriptor(projection(grid), e=e, passes=2 * passes, d=8)
                    assert many.values.max() <= few.values.max() + 1e-12


class TestAssemble:

    def _parts(self, d=2):
        kin = kinematics(track_from([(j, 0) for j in range(5)]), 5, 1)
        grids = [DescriptorGrid(np.full(d * d, i / 10), axis, d) for i, axis in enumerate("XYZ")]
        return kin, grids

    def test_lengths_and_prefixes(self):
        kin, grids = self._parts()
        fx, fy, fz = assemble(kin, *grids)
        assert (len(fx), len(fy), len(fz)) == (5, 5, 13)
        assert fx.values()[0] == kin.fps_x
        assert fy.values()[0] == kin.fps_y
        assert tuple(fz.values()[:9]) == kin.kinematic_part()
        assert fz.values()[9:].tolist() == [0.2] * 4

    def test_axis_mismatch(self):
        kin, (hx, hy, hz) = self._parts()
        with pytest.raises(AxisMismatchError) as info:
            assemble(kin, hy, hx, hz)
        assert info.value.expected_axis == "X"
        assert info.value.actual_axis == "Y"


class TestGrading:

    @pytest.mark.parametrize("velocity, grade", [
        (25.0, "A"), (80.0, "A"), (24.999, "B"), (15.0, "B"), (5.0001, "B"),
        (5.0, "C"), (0.1, "C"), (0.0, "D"),
    ])
    def test_who_grade(self, velocity, grade):
        assert who_grade(velocity) == grade

    @pytest.mark.parametrize("velocity", [-0.1, float("nan")])
    def test_who_grade_rejects(self, velocity):
        with pytest.raises(VFoldValidationError):
            who_grade(velocity)

    def test_unit_conversion(self):
        assert to_um_per_s(2.0, 0.5, 30.0) == 30.0

    def test_distribution(self):
        assert grade_distribution(["A", "A", "D"]) == {
            "A": pytest.approx(2 / 3), "B": 0.0, "C": 0.0, "D": pytest.approx(1 / 3),
        }
        assert grade_distribution([]) == {"A": 0.0, "B": 0.0, "C": 0.0, "D": 0.0}


class TestExtractTrackFeatures:

    def test_moving_square(self, two_square_video, fixed_config):
        segmented = [segment_frame(f, j, fixed_config) for j, f in enumerate(two_square_video)]
        masks = [s[1] for s in segmented]
        first = build_tracks([s[2] for s in segmented], fixed_config.gate)[0]
        tf = extract_track_features(first, two_square_video, masks, fixed_config)

        assert tf.track_id == first.id
        assert tf.kinematics.dist_A == pytest.approx(14.0)
        assert tf.kinematics.fps_x == pytest.approx(17 / 8)
        assert tf.kinematics.fps_y == pytest.approx(3 / 8)
        assert [len(v) for v in tf.vectors] == [17, 17, 25]
        assert [p.axis for p in tf.projections] == ["X", "Y", "Z"]
        # 14 px / 8 frames at 30 fps and 1 um / px
        assert tf.vcl_um_per_s == pytest.approx(52.5)
        assert tf.grade == "A"
        assert [r.axis for r in tf.records()] == ["X", "Y", "Z"]

    def test_fps_override(self, two_square_video):
        config = PipelineConfig(threshold="fixed:100", d=4, fps=2.0, um_per_px=2.0)
        segmented = [segment_frame(f, j, config) for j, f in enumerate(two_square_video)]
        first = build_tracks([s[2] for s in segmented], config.gate)[0]
        tf = extract_track_features(first, two_square_video, [s[1] for s in segmented], config)
        assert tf.vcl_um_per_s == pytest.approx(1.75 * 2.0 * 2.0)
        assert tf.grade == "B"
