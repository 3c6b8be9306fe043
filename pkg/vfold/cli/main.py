# vfold/cli/main.py
"""
VFOLD CLI Main Entry Point

Provides the command-line interface: synthetic data, every pipeline stage
on its own, the whole pipeline, and evaluation.

Exit codes: 0 success, 1 validation error or bad usage, 2 I/O error.
"""

import argparse
import sys
from pathlib import Path
from typing import List, Optional

from ..classify import confusion, import_csv, metrics, predict_axis, report_to_dict, stratified_split
from ..config import Config, PipelineConfig, POLARITY_BRIGHT, POLARITY_DARK
from ..core import (
    ARTIFACT_METRICS, ARTIFACT_REPORT, DatasetResult, FoldoverPipeline, SequenceResult,
    evaluate, load_labels, metrics_table, row_name, run_pipeline,
)
from ..exceptions import VFoldError, VFoldIOError
from ..foldover import AXES
from ..framestore import FORMATS, load_sequence
from ..segmentation import group_by_frame
from ..serializers import DetectionCsvSerializer, LabelCsvSerializer, LabelRecord, TrackCsvSerializer
from ..synth import default_benchmark, write_scene
from ..tracking import build_tracks
from ..utils import configure_logging, ensure_dir, stable_json, write_text
from .commands import PROFILES, CLIFormatter, build_config, print_counts, require_exists

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2


class VFoldArgumentParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with the validation code."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def _config_parent() -> argparse.ArgumentParser:
    """Flags shared by every subcommand (config, workers, every tunable)."""
    parent = argparse.ArgumentParser(add_help=False)
    group = parent.add_argument_group("configuration")
    group.add_argument('--config', help='key = value config file (flags override it)')
    group.add_argument('--profile', choices=sorted(PROFILES), default='default',
                       help='Base profile under the config file')
    group.add_argument('-j', '--jobs', type=int, default=Config.DEFAULT_JOBS, help='Worker threads')
    group.add_argument('--threshold', help="'otsu' or 'fixed:T'")
    group.add_argument('--polarity', choices=[POLARITY_BRIGHT, POLARITY_DARK])
    group.add_argument('--min-area', dest='min_area', type=int)
    group.add_argument('--gate', type=float)
    group.add_argument('--miss-tolerance', dest='miss_tolerance', type=int)
    group.add_argument('--min-track-length', dest='min_track_length', type=int)
    group.add_argument('--lock-radius', dest='r', type=float)
    group.add_argument('--min-displacement', dest='min_displacement', type=float)
    group.add_argument('--nu-x', dest='nu_x', type=int)
    group.add_argument('--nu-y', dest='nu_y', type=int)
    group.add_argument('--nu-z', dest='nu_z', type=int)
    group.add_argument('--kernel', dest='e', type=int, help='Mean-filter kernel side (odd)')
    group.add_argument('--passes', type=int)
    group.add_argument('--descriptor-size', dest='d', type=int)
    group.add_argument('--um-per-px', dest='um_per_px', type=float)
    group.add_argument('--fps', help="Frame rate override or 'auto'")
    return parent


def build_parser() -> argparse.ArgumentParser:
    """Top-level parser with every subcommand registered"""

    parser = VFoldArgumentParser(
        prog='vfold',
        description='VFOLD - foldover motion features for micro-objects in video',
    )

    parser.add_argument(
        '--version', action='version',
        version=f'vfold {Config.VFOLD_VERSION} (config schema {PipelineConfig.schema_hash()})',
    )
    parser.add_argument('-v', '--verbose', action='store_true', help='Verbose output')

    subparsers = parser.add_subparsers(dest='command', help='Commands')
    common = [_config_parent()]

    # =====================================================================
    # SIMULATE COMMAND
    # =====================================================================
    sim_parser = subparsers.add_parser('simulate', parents=common, help='Write synthetic video')
    sim_parser.add_argument('--preset', choices=['single', 'benchmark'], default='benchmark')
    sim_parser.add_argument('--seed', type=int, default=0)
    sim_parser.add_argument('--noise-sigma', dest='noise_sigma', type=float, default=3.0)
    sim_parser.add_argument('-o', '--out', required=True, help='Output directory')
    sim_parser.set_defaults(func=simulate_command)

    # =====================================================================
    # SEGMENT COMMAND
    # =====================================================================
    seg_parser = subparsers.add_parser('segment', parents=common, help='Detect objects per frame')
    seg_parser.add_argument('-i', '--input', required=True, help='Frame source')
    seg_parser.add_argument('--format', choices=FORMATS)
    seg_parser.add_argument('--masks', action='store_true', help='Also write mask PGMs')
    seg_parser.add_argument('-o', '--out', required=True, help='Output directory')
    seg_parser.set_defaults(func=segment_command)

    # =====================================================================
    # TRACK COMMAND
    # =====================================================================
    track_parser = subparsers.add_parser('track', parents=common, help='Link detections into tracks')
    track_parser.add_argument('--detections', required=True, help='detections.csv')
    track_parser.add_argument('--frames', type=int, help='Frame count (default: last frame + 1)')
    track_parser.add_argument('-o', '--out', required=True, help='Output directory')
    track_parser.set_defaults(func=track_command)

    # =====================================================================
    # FOLDOVER / FEATURES COMMANDS
    # =====================================================================
    for name, func, help_text in (
        ('foldover', foldover_command, 'Write foldover and projection PGMs'),
        ('features', features_command, 'Write feature vectors'),
    ):
        stage_parser = subparsers.add_parser(name, parents=common, help=help_text)
        stage_parser.add_argument('-i', '--input', required=True, help='Frame source')
        stage_parser.add_argument('--format', choices=FORMATS)
        stage_parser.add_argument('--tracks', required=True, help='tracks.csv')
        stage_parser.add_argument('-o', '--out', required=True, help='Output directory')
        stage_parser.set_defaults(func=func)

    # =====================================================================
    # CLASSIFY COMMAND
    # =====================================================================
    cls_parser = subparsers.add_parser('classify', parents=common, help='Nearest-centroid predictions')
    cls_parser.add_argument('--features', required=True, help='features.csv')
    cls_parser.add_argument('--labels', required=True, help='labels.csv')
    cls_parser.add_argument('--axis', choices=AXES, default='Z')
    cls_parser.add_argument('--seed', type=int, default=0, help='Split seed when labels carry none')
    cls_parser.add_argument('-o', '--out', required=True, help='Output directory')
    cls_parser.set_defaults(func=classify_command)

    # =====================================================================
    # EVAL COMMAND
    # =====================================================================
    eval_parser = subparsers.add_parser('eval', parents=common, help='Per-axis metrics table')
    eval_parser.add_argument('--features', required=True, help='features.csv')
    eval_parser.add_argument('--labels', required=True, help='labels.csv')
    eval_parser.add_argument('--axis', choices=list(AXES) + ['all'], default='all')
    eval_parser.add_argument('--seed', type=int, default=0, help='Split seed when labels carry none')
    eval_parser.add_argument('--decimals', type=int, default=4)
    eval_parser.add_argument('-o', '--out', help='Also write metrics.txt and report.json here')
    eval_parser.set_defaults(func=eval_command)

    # =====================================================================
    # PIPELINE COMMAND
    # =====================================================================
    pipe_parser = subparsers.add_parser('pipeline', parents=common, help='Run every stage')
    pipe_parser.add_argument('-i', '--input', required=True, help='Frame source or dataset directory')
    pipe_parser.add_argument('-o', '--out', required=True, help='Output directory')
    pipe_parser.set_defaults(func=pipeline_command)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI entry point"""

    parser = build_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return EXIT_VALIDATION

    configure_logging(args.verbose)

    try:
        config = build_config(args)
        pipeline = FoldoverPipeline(config, args.jobs)
        args.func(args, pipeline)
    except VFoldIOError as e:
        CLIFormatter.error(str(e))
        return EXIT_IO
    except OSError as e:
        CLIFormatter.error(f"I/O error: {e}")
        return EXIT_IO
    except VFoldError as e:
        CLIFormatter.error(str(e))
        return EXIT_VALIDATION
    return EXIT_OK


# =========================================================================
# COMMAND IMPLEMENTATIONS
# =========================================================================

def simulate_command(args, pipeline: FoldoverPipeline):
    """Write the benchmark dataset, or its first scene on its own"""
    dataset = default_benchmark(args.seed, noise_sigma=args.noise_sigma)
    out = ensure_dir(args.out)

    if args.preset == 'benchmark':
        dataset.write(out, jobs=pipeline.jobs)
        counts = [("Scenes", len(dataset.scenes)), ("Tracks", len(dataset))]
    else:
        scene = dataset.render(0, jobs=pipeline.jobs)
        write_scene(scene, out)
        counts = [("Frames", scene.video.frame_count), ("Tracks", len(scene.ground_truth))]
    pipeline.write_config(out)

    CLIFormatter.success(f"Simulated {args.preset} (seed {args.seed})")
    print_counts(counts + [("Output", out)])


def segment_command(args, pipeline: FoldoverPipeline):
    """Threshold and label every frame"""
    video = load_sequence(require_exists(args.input), args.format)
    segmentation = pipeline.segment(video)
    out = ensure_dir(args.out)
    pipeline.write_config(out)
    pipeline.write_segmentation(segmentation, out, masks=args.masks)
    write_text(out / ARTIFACT_REPORT, stable_json({
        "vfold_version": Config.VFOLD_VERSION,
        "source": video.id,
        "frames": video.frame_count,
        "thresholds": [int(t) for t in segmentation.thresholds],
        "objects_per_frame": segmentation.counts,
    }))

    CLIFormatter.success("Segmented")
    print_counts([
        ("Frames", video.frame_count),
        ("Detections", sum(segmentation.counts)),
        ("Output", out),
    ])


def track_command(args, pipeline: FoldoverPipeline):
    """Link a detections CSV into tracks"""
    detections = DetectionCsvSerializer().load(require_exists(args.detections))
    frames = args.frames
    if frames is None:
        frames = max((d.frame_index for d in detections), default=-1) + 1
    config = pipeline.config
    tracks = build_tracks(group_by_frame(detections, frames), config.gate, config.miss_tolerance)
    out = ensure_dir(args.out)
    pipeline.write_config(out)
    pipeline.write_tracks(tracks, out)

    CLIFormatter.success("Tracked")
    print_counts([("Detections", len(detections)), ("Tracks", len(tracks)), ("Output", out)])


def _stage_result(args, pipeline: FoldoverPipeline) -> SequenceResult:
    video = load_sequence(require_exists(args.input), args.format)
    tracks = TrackCsvSerializer().load(require_exists(args.tracks))
    segmentation = pipeline.segment(video)
    features = pipeline.extract(video, segmentation.masks, tracks)
    return SequenceResult(video, segmentation, tracks, features)


def foldover_command(args, pipeline: FoldoverPipeline):
    """Accumulate, rotate and project each track"""
    result = _stage_result(args, pipeline)
    out = ensure_dir(args.out)
    pipeline.write_config(out)
    fold_dir = pipeline.write_foldovers(result.features, out)

    CLIFormatter.success("Foldovers written")
    print_counts([("Foldovers", len(result.features)), ("Output", fold_dir)])


def features_command(args, pipeline: FoldoverPipeline):
    """Extract feature vectors for each track"""
    result = _stage_result(args, pipeline)
    out = ensure_dir(args.out)
    pipeline.write_config(out)
    pipeline.write_features(result.records(), out)
    write_text(out / ARTIFACT_REPORT, stable_json(pipeline.sequence_report(result)))

    CLIFormatter.success("Features written")
    print_counts([("Tracks", len(result.features)), ("Output", out)])


def _labels_and_splits(args, records):
    labels, splits = load_labels(require_exists(args.labels))
    if not splits:
        known = {r.track_id for r in records}
        splits = stratified_split({i: c for i, c in labels.items() if i in known}, 0.5, args.seed)
    return labels, splits


def classify_command(args, pipeline: FoldoverPipeline):
    """Predict the test split with nearest-centroid on one axis"""
    records = import_csv(require_exists(args.features))
    labels, splits = _labels_and_splits(args, records)
    test_ids, predicted = predict_axis(records, labels, splits, args.axis)
    cm = confusion(predicted, [labels[i] for i in test_ids])
    report = metrics(cm)

    out = ensure_dir(args.out)
    pipeline.write_config(out)
    LabelCsvSerializer().dump(
        [LabelRecord(i, label, 'test') for i, label in zip(test_ids, predicted)],
        out / 'predictions.csv',
    )
    write_text(out / ARTIFACT_REPORT, stable_json({
        "vfold_version": Config.VFOLD_VERSION,
        "axis": args.axis,
        "metrics": report_to_dict(report, cm),
    }))

    CLIFormatter.success(f"Classified {len(test_ids)} track(s) on {row_name(args.axis)}")
    print_counts([("Accuracy", f"{report.accuracy:.4f}"), ("Output", out)])


def eval_command(args, pipeline: FoldoverPipeline):
    """Print the per-axis metrics table"""
    records = import_csv(require_exists(args.features))
    labels, splits = _labels_and_splits(args, records)
    axes = AXES if args.axis == 'all' else (args.axis,)
    evaluations = evaluate(records, labels, splits, axes)
    table = metrics_table(evaluations, args.decimals)
    print(table, end='')

    if args.out:
        out = ensure_dir(args.out)
        pipeline.write_config(out)
        write_text(out / ARTIFACT_METRICS, table)
        write_text(out / ARTIFACT_REPORT, stable_json({
            "vfold_version": Config.VFOLD_VERSION,
            "metrics": {row_name(e.axis): report_to_dict(e.report, e.confusion) for e in evaluations},
        }))


def pipeline_command(args, pipeline: FoldoverPipeline):
    """Run every stage and write all artifacts"""
    source = require_exists(args.input)
    result = run_pipeline(source, args.out, pipeline.config, pipeline.jobs)
    out = Path(args.out)

    if isinstance(result, DatasetResult):
        CLIFormatter.success(f"Pipeline finished on {len(result.scenes)} scene(s)")
        print_counts([
            ("Feature tracks", len({r.track_id for r in result.records})),
            ("Output", out),
        ])
        if result.evaluations:
            CLIFormatter.section("Nearest-centroid metrics")
            print(metrics_table(result.evaluations), end='')
    else:
        CLIFormatter.success(f"Pipeline finished on {result.video.id}")
        print_counts([
            ("Frames", result.video.frame_count),
            ("Tracks", len(result.tracks)),
            ("Feature tracks", len(result.features)),
            ("Output", out),
        ])


if __name__ == '__main__':
    sys.exit(main())
