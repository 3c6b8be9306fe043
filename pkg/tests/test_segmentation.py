# tests/test_segmentation.py
"""Tests for Otsu thresholding, binarization and component detection."""

import numpy as np
import pytest

from vfold.config import PipelineConfig
from vfold.exceptions import VFoldValidationError
from vfold.framestore import Frame
from vfold.segmentation import (
    BinaryMask, Detection, binarize, count_per_frame, detect, group_by_frame, otsu_threshold,
    segment_frame,
)


def mask(rows):
    return BinaryMask(np.array(rows, dtype=bool))


class TestOtsu:

    def test_two_levels_tie_goes_low(self):
        assert otsu_threshold(Frame(np.array([[10, 200]], dtype=np.uint8))) == 10

    def test_constant_frame_returns_value(self):
        assert otsu_threshold(Frame(np.full((4, 4), 77, dtype=np.uint8))) == 77

    def test_bimodal(self):
        data = np.full((10, 10), 20, dtype=np.uint8)
        data[:3, :3] = 220
        threshold = otsu_threshold(Frame(data))
        assert 20 <= threshold < 220
        assert binarize(Frame(data), threshold).count() == 9

    def test_three_levels(self):
        # 0,0,0,0 | 100,100 | 200,200 : best split isolates the dark block
        data = np.array([[0, 0, 0, 0, 100, 100, 200, 200]], dtype=np.uint8)
        assert otsu_threshold(Frame(data)) == 0


class TestBinarize:

    def test_bright_is_strict(self):
        frame = Frame(np.array([[9, 10, 11]], dtype=np.uint8))
        assert binarize(frame, 10).bits.tolist() == [[False, False, True]]

    def test_dark_is_inclusive(self):
        frame = Frame(np.array([[9, 10, 11]], dtype=np.uint8))
        assert binarize(frame, 10, "dark-object").bits.tolist() == [[True, True, False]]

    @pytest.mark.parametrize("threshold", [-1, 256, 1.5, True])
    def test_bad_threshold(self, threshold):
        with pytest.raises(VFoldValidationError):
            binarize(Frame(np.zeros((1, 1), dtype=np.uint8)), threshold)

    def test_bad_polarity(self):
        with pytest.raises(VFoldValidationError):
            binarize(Frame(np.zeros((1, 1), dtype=np.uint8)), 0, "grey")


class TestBinaryMask:

    def test_accepts_zero_one(self):
        assert BinaryMask(np.array([[0, 1]])).count() == 1

    def test_rejects_other_values(self):
        with pytest.raises(VFoldValidationError):
            BinaryMask(np.array([[0, 2]]))


class TestDetect:

    def test_square_centroid(self):
        bits = np.zeros((8, 10), dtype=bool)
        bits[2:5, 5:8] = True
        (det,) = detect(BinaryMask(bits), 3)
        assert det == Detection(frame_index=3, x=6.0, y=3.0, area=9, component_id=1)
        assert det.centroid == (6.0, 3.0)

    def test_diagonal_pixels_join(self):
        found = detect(mask([
            [1, 0, 0, 0],
            [0, 1, 0, 0],
            [0, 0, 1, 0],
            [0, 0, 0, 1],
        ]), 0)
        assert len(found) == 1
        assert found[0].area == 4
        assert (found[0].x, found[0].y) == (1.5, 1.5)

    def test_raster_order_of_first_pixel(self):
        # the right component starts on row 0, the left one on row 1
        found = detect(mask([
            [0, 0, 0, 0, 1, 1],
            [1, 1, 0, 0, 1, 1],
            [1, 1, 0, 0, 0, 0],
        ]), 0)
        assert [d.component_id for d in found] == [1, 2]
        assert found[0].x == 4.5
        assert found[1].x == 0.5

    def test_min_area_filters_and_renumbers(self):
        found = detect(mask([
            [1, 0, 0, 1, 1],
            [0, 0, 0, 1, 1],
        ]), 0, min_area=2)
        assert len(found) == 1
        assert found[0].component_id == 1
        assert found[0].area == 4

    def test_empty_mask(self):
        assert detect(mask([[0, 0], [0, 0]]), 0) == []

    def test_bad_min_area(self):
        with pytest.raises(VFoldValidationError):
            detect(mask([[1]]), 0, min_area=0)

    def test_translation_shifts_centroids(self):
        rng = np.random.default_rng(5)
        bits = np.zeros((30, 40), dtype=bool)
        bits[2:12, 2:14] = rng.random((10, 12)) < 0.6
        base = detect(BinaryMask(bits), 0, min_area=1)
        assert base
        for dx, dy in ((0, 0), (3, 0), (0, 7), (11, 15), (25, 17)):
            shifted = np.zeros_like(bits)
            shifted[dy:, dx:] = bits[:30 - dy, :40 - dx]
            moved = detect(BinaryMask(shifted), 0, min_area=1)
            assert [(d.area, d.component_id) for d in moved] == [
                (d.area, d.component_id) for d in base
            ]
            for before, after in zip(base, moved):
                assert after.x == pytest.approx(before.x + dx, abs=1e-12)
                assert after.y == pytest.approx(before.y + dy, abs=1e-12)


class TestSegmentFrame:

    def test_fixed_threshold(self):
        data = np.zeros((6, 6), dtype=np.uint8)
        data[1:3, 1:3] = 150
        threshold, bits, found = segment_frame(Frame(data), 4, PipelineConfig(threshold="fixed:100"))
        assert threshold == 100
        assert bits.count() == 4
        assert [(d.frame_index, d.x, d.y) for d in found] == [(4, 1.5, 1.5)]

    def test_otsu(self):
        data = np.full((6, 6), 10, dtype=np.uint8)
        data[1:3, 1:3] = 150
        threshold, _, found = segment_frame(Frame(data), 0, PipelineConfig())
        assert threshold == 10
        assert len(found) == 1


class TestGrouping:

    def test_count_per_frame(self):
        assert count_per_frame([[1, 2], [], [3]]) == [2, 0, 1]

    def test_group_by_frame(self):
        dets = [Detection(2, 0.0, 0.0, 4, 1), Detection(0, 1.0, 1.0, 4, 1)]
        grouped = group_by_frame(dets, 3)
        assert [len(g) for g in grouped] == [1, 0, 1]

    def test_group_by_frame_out_of_range(self):
        with pytest.raises(VFoldValidationError):
            group_by_frame([Detection(5, 0.0, 0.0, 4, 1)], 3)
