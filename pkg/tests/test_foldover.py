# tests/test_foldover.py
"""Tests for locking, accumulation, rotation and projections."""

import math
import time
from dataclasses import replace

import numpy as np
import pytest

from vfold.config import Config, PipelineConfig
from vfold.exceptions import DimensionMismatchError, EmptyTrackError, VFoldValidationError
from vfold.foldover import (
    Foldover, accumulate, extract_object, lock_region, project, project_all,
    rotate_to_positive_x,
)
from vfold.framestore import Frame
from vfold.segmentation import BinaryMask, segment_frame
from vfold.tracking import Track, TrackPoint, build_tracks


def foldover(grid, origin=(0, 0), start=(0.0, 0.0), end=(0.0, 0.0), gamma=1):
    return Foldover(np.array(grid, dtype=np.int64), origin, gamma, 1, start, end)


def voxel_oracle(grid):
    """Brute-force X / Y / Z slice counts of the solid under ``grid``."""
    rows = np.flatnonzero(grid.any(axis=1))
    cols = np.flatnonzero(grid.any(axis=0))
    support = grid[rows[0]:rows[-1] + 1, cols[0]:cols[-1] + 1]
    peak = int(support.max())
    # solid[z - 1, y, x] is set when 1 <= z <= grid(y, x)
    solid = np.stack([support >= z for z in range(1, peak + 1)])
    u_x = solid.sum(axis=2).T
    u_y = solid.sum(axis=1).T
    u_z = solid.sum(axis=0)
    return u_x, u_y, u_z, int(solid.sum())


class TestLocking:

    def test_lock_disk(self):
        locked = lock_region(BinaryMask(np.ones((11, 11), bool)), (5, 5), 1)
        assert locked.count() == 5

    def test_lock_keeps_only_mask_bits(self):
        bits = np.zeros((5, 5), bool)
        bits[2, 2] = bits[0, 0] = True
        assert lock_region(BinaryMask(bits), (2.0, 2.0), 2).count() == 1

    def test_center_outside(self):
        with pytest.raises(VFoldValidationError):
            lock_region(BinaryMask(np.ones((3, 3), bool)), (5.0, 1.0), 2)

    def test_bad_radius(self):
        with pytest.raises(VFoldValidationError):
            lock_region(BinaryMask(np.ones((3, 3), bool)), (1.0, 1.0), 0)

    def test_extract(self):
        frame = Frame(np.array([[5, 6], [7, 8]], dtype=np.uint8))
        lock = BinaryMask(np.array([[True, False], [False, True]]))
        assert extract_object(frame, lock).data.tolist() == [[5, 0], [0, 8]]

    def test_extract_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            extract_object(Frame(np.zeros((2, 2))), BinaryMask(np.zeros((3, 2), bool)))

    def test_lock_is_idempotent(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            bits = rng.random((15, 20)) < 0.5
            center = (float(rng.uniform(0, 19)), float(rng.uniform(0, 14)))
            r = float(rng.uniform(0.5, 8.0))
            once = lock_region(BinaryMask(bits), center, r)
            twice = lock_region(once, center, r)
            assert np.array_equal(once.bits, twice.bits)


class TestAccumulate:

    def _masks(self, video):
        config = PipelineConfig(threshold="fixed:100")
        return [segment_frame(f, j, config)[1] for j, f in enumerate(video)]

    def test_moving_square(self, two_square_video):
        masks = self._masks(two_square_video)
        detections = [segment_frame(f, j, PipelineConfig(threshold="fixed:100"))[2]
                      for j, f in enumerate(two_square_video)]
        first = build_tracks(detections, gate=20.0)[0]
        f = accumulate(first, two_square_video, masks, r=13.0)
        assert f.gamma == 8
        assert f.origin == (5, 8)
        assert f.grid.shape == (3, 17)
        # the second square is 22 px away and stays out
        assert f.mass() == 200 * 9 * 8
        assert f.grid[0].tolist() == [200, 200] + [400, 200] * 6 + [400, 200, 200]
        assert (f.start, f.end) == (first.start, first.end)

    def test_split_track_sums_to_whole(self, two_square_video):
        masks = self._masks(two_square_video)
        detections = [segment_frame(f, j, PipelineConfig(threshold="fixed:100"))[2]
                      for j, f in enumerate(two_square_video)]
        whole = build_tracks(detections, gate=20.0)[0]
        height, width = two_square_video.height, two_square_video.width
        expected = accumulate(whole, two_square_video, masks, 13.0).paste(width, height)
        for t in range(1, whole.gamma):
            head = Track(whole.id, whole.points[:t])
            tail = Track(whole.id, whole.points[t:])
            parts = (
                accumulate(head, two_square_video, masks, 13.0).paste(width, height)
                + accumulate(tail, two_square_video, masks, 13.0).paste(width, height)
            )
            assert np.array_equal(parts, expected), t

    def test_empty_track(self, two_square_video):
        with pytest.raises(EmptyTrackError):
            accumulate(Track(1), two_square_video, self._masks(two_square_video), 13.0)

    def test_mask_count_mismatch(self, two_square_video):
        masks = self._masks(two_square_video)[:-1]
        track = Track(1, [TrackPoint(0, 6.0, 9.0)])
        with pytest.raises(DimensionMismatchError):
            accumulate(track, two_square_video, masks, 13.0)

    def test_no_lock_bits(self, two_square_video):
        blank = [BinaryMask(np.zeros((48, 64), bool)) for _ in range(8)]
        track = Track(1, [TrackPoint(0, 6.4, 9.6), TrackPoint(1, 8.0, 9.0)])
        f = accumulate(track, two_square_video, blank, 13.0)
        assert f.grid.tolist() == [[0]]
        assert f.origin == (6, 10)


class TestFoldover:

    def test_support(self):
        f = foldover([[0, 0, 0], [0, 4, 0], [0, 2, 1]])
        assert f.support_bbox() == (1, 3, 1, 3)
        assert f.support().tolist() == [[4, 0], [2, 1]]
        assert f.support_extent() == (2, 2, 4)

    def test_empty_support(self):
        f = foldover([[0, 0]])
        assert f.support_bbox() is None
        assert f.support().shape == (0, 0)
        assert f.support_extent() == (0, 0, 0)

    def test_paste(self):
        canvas = foldover([[1, 2]], origin=(3, 1)).paste(5, 3)
        assert canvas[1].tolist() == [0, 0, 0, 1, 2]
        assert canvas.sum() == 3

    def test_paste_clips(self):
        canvas = foldover([[1, 2]], origin=(4, 0)).paste(5, 2)
        assert canvas.tolist() == [[0, 0, 0, 0, 1], [0, 0, 0, 0, 0]]


class TestRotation:

    def test_horizontal_motion_is_identity(self):
        f = foldover([[1, 2, 3]], start=(0.0, 0.0), end=(2.0, 0.0))
        assert rotate_to_positive_x(f) is f

    def test_small_displacement_is_identity(self):
        f = foldover([[1]], start=(0.0, 0.0), end=(0.0, 0.5))
        assert rotate_to_positive_x(f, min_displacement=1.0) is f

    def test_downward_motion_turns_to_x(self):
        f = foldover([[1], [2], [3]], origin=(10, 20), start=(10.0, 20.0), end=(10.0, 22.0))
        rotated = rotate_to_positive_x(f)
        assert rotated.grid.tolist() == [[1, 2, 3]]
        assert rotated.end[0] - rotated.start[0] == pytest.approx(2.0)
        assert rotated.end[1] == pytest.approx(rotated.start[1])
        assert rotated.mass() == f.mass()

    def test_leftward_motion_flips(self):
        f = foldover([[1, 2, 3]], start=(2.0, 0.0), end=(0.0, 0.0))
        rotated = rotate_to_positive_x(f)
        assert rotated.grid.tolist() == [[3, 2, 1]]
        assert rotated.end[0] > rotated.start[0]

    def test_mass_centroid_is_fixed(self):
        f = foldover([[1], [2], [3]], origin=(10, 20), start=(10.0, 20.0), end=(10.0, 22.0))
        rotated = rotate_to_positive_x(f)
        rows, cols = np.nonzero(rotated.grid)
        weights = rotated.grid[rows, cols]
        cx = rotated.origin[0] + (weights * cols).sum() / rotated.mass()
        cy = rotated.origin[1] + (weights * rows).sum() / rotated.mass()
        assert cx == pytest.approx(10.0)
        assert cy == pytest.approx(20.0 + 8.0 / 6.0)

    @staticmethod
    def _moving(grid, degrees, length=10.0):
        start = (4.0, 4.0)
        end = (start[0] + length * math.cos(math.radians(degrees)),
               start[1] + length * math.sin(math.radians(degrees)))
        return foldover(grid, start=start, end=end)

    @staticmethod
    def _heading(f):
        return math.degrees(math.atan2(f.end[1] - f.start[1], f.end[0] - f.start[0]))

    def test_square_moving_down_turns_to_x(self):
        f = self._moving(np.full((9, 9), 5), 90.0)
        rotated = rotate_to_positive_x(f)
        assert abs(self._heading(rotated)) < 2.0
        assert abs(rotated.mass() - f.mass()) <= Config.MASS_TOLERANCE * f.mass()

    @pytest.mark.parametrize("grid", [np.full((9, 9), 5), np.full((1, 20), 7),
                                      np.arange(1, 49).reshape(6, 8)])
    def test_mass_is_conserved_at_every_angle(self, grid):
        for degrees in range(0, 360, 15):
            f = self._moving(grid, degrees)
            rotated = rotate_to_positive_x(f)
            assert rotated.mass() == f.mass(), degrees
            assert rotated.grid.min() >= 0
            assert abs(self._heading(rotated)) < 2.0, degrees

    def test_diagonal_keeps_mass(self):
        f = self._moving(np.full((9, 9), 5), 45.0)
        assert rotate_to_positive_x(f).mass() == 405

    def test_single_cell_diagonal(self):
        f = foldover([[7]], start=(0.0, 0.0), end=(3.0, 3.0))
        rotated = rotate_to_positive_x(f)
        assert rotated.mass() == 7
        assert np.count_nonzero(rotated.grid) == 1

    def test_rotating_twice_keeps_mass(self):
        f = self._moving(np.arange(1, 82).reshape(9, 9), 45.0)
        once = rotate_to_positive_x(f)
        # point the motion somewhere else and turn it back again
        sx, sy = once.start
        turned = replace(once, end=(sx + 6.0, sy + 8.0))
        twice = rotate_to_positive_x(turned)
        drift = abs(twice.mass() - f.mass()) / f.mass()
        assert drift <= Config.MASS_TOLERANCE
        assert twice.mass() == f.mass()


class TestProjection:

    GRID = [[1, 2], [0, 3]]

    def test_z_is_height_map(self):
        p = project(foldover(self.GRID), "Z")
        assert p.grid.tolist() == self.GRID
        assert p.extent == 3

    def test_x(self):
        p = project(foldover(self.GRID), "X")
        assert p.grid.tolist() == [[2, 1, 0], [1, 1, 1]]
        assert p.extent == 2

    def test_y(self):
        p = project(foldover(self.GRID), "Y")
        assert p.grid.tolist() == [[1, 0, 0], [2, 2, 1]]
        assert p.extent == 2

    def test_crops_to_support(self):
        p = project(foldover([[0, 0, 0], [0, 5, 0]]), "Z")
        assert p.grid.tolist() == [[5]]

    def test_step_pools(self):
        f = foldover(self.GRID)
        assert project(f, "Z", 2).grid.tolist() == [[6]]
        assert project(f, "X", 2).grid.tolist() == [[1, 1]]

    def test_empty(self):
        p = project(foldover([[0]]), "X")
        assert p.grid.shape == (0, 0)
        assert p.extent == 0

    def test_bad_axis_and_step(self):
        f = foldover(self.GRID)
        with pytest.raises(VFoldValidationError):
            project(f, "W")
        with pytest.raises(VFoldValidationError):
            project(f, "X", 0)

    def test_project_all_axes(self):
        assert [p.axis for p in project_all(foldover(self.GRID))] == ["X", "Y", "Z"]


@pytest.mark.performance
class TestVolumeInvariant:
    """Projections of random grids against a brute-force voxel count."""

    def test_random_grids(self):
        began = time.perf_counter()
        rng = np.random.default_rng(2024)
        for _ in range(200):
            rows, cols = rng.integers(1, 65, size=2)
            grid = rng.integers(0, 51, size=(rows, cols))
            grid[rng.integers(rows), rng.integers(cols)] = rng.integers(1, 51)
            f = foldover(grid)
            u_x, u_y, u_z, voxels = voxel_oracle(f.grid)
            px, py, pz = project_all(f)
            assert np.array_equal(px.grid, u_x)
            assert np.array_equal(py.grid, u_y)
            assert np.array_equal(pz.grid, u_z)
            assert px.total() == py.total() == pz.total() == voxels == f.mass()
        assert time.perf_counter() - began < 5.0
