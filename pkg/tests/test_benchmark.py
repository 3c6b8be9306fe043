# tests/test_benchmark.py
"""End-to-end runs on the full labelled benchmark."""

import time

import pytest

from vfold.config import ConfigProfiles
from vfold.core import FoldoverPipeline
from vfold.synth import default_benchmark

pytestmark = [pytest.mark.integration, pytest.mark.performance]


@pytest.fixture(scope="module")
def benchmark_run(tmp_path_factory):
    """Write the benchmark, run every scene, and time the run."""
    root = default_benchmark(seed=0, noise_sigma=3.0).write(
        tmp_path_factory.mktemp("benchmark"), jobs=4
    )
    began = time.perf_counter()
    result = FoldoverPipeline(ConfigProfiles.benchmark(), jobs=4).run_dataset(root)
    return result, time.perf_counter() - began


def test_every_object_is_tracked(benchmark_run):
    result, elapsed = benchmark_run
    assert sum(len(scene.tracks) for _, scene in result.scenes) == 180
    for name, scene in result.scenes:
        # one track per ground-truth object, no fragments and no swaps
        assert len(scene.matches) == len(scene.tracks) == 6, name
        assert sorted(gt_id for gt_id, _ in scene.matches.values()) == [1, 2, 3, 4, 5, 6]
        for track in scene.tracks:
            gt_id, error = scene.matches[track.id]
            assert track.gamma == 40, name
            assert error < 0.5, (name, track.id, gt_id)
    assert elapsed < 120


def test_every_track_has_features(benchmark_run):
    result, _ = benchmark_run
    assert len({r.track_id for r in result.records}) == 180
    assert len(result.records) == 3 * 180


def test_height_projection_separates_best(benchmark_run):
    result, _ = benchmark_run
    accuracy = {e.axis: e.report.accuracy for e in result.evaluations}
    assert all(e.confusion.total == 90 for e in result.evaluations)
    assert accuracy["Z"] >= 0.95
    assert accuracy["Z"] >= accuracy["X"]
    assert accuracy["Z"] >= accuracy["Y"]
