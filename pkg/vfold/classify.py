# vfold/classify.py
"""
VFOLD Classification

Confusion matrices, the multiclass metric suite, a deterministic
nearest-centroid baseline, and feature CSV export for external
classifiers.

Metric conventions:
- accuracy is trace / total
- per-class rates use the one-vs-rest reduction of the confusion matrix
- any 0/0 rate is 0
"""

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .config import Config
from .exceptions import (
    EmptyMatrixError,
    InconsistentDimsError,
    LengthMismatchError,
    MissingClassError,
    UnknownLabelError,
)
from .features import FeatureRecord
from .serializers.features import FeatureCsvSerializer
from .utils import get_logger

logger = get_logger(__name__)

CLASS_NAMES = Config.CLASS_NAMES
SPLIT_TRAIN = "train"
SPLIT_TEST = "test"


# =========================================================================
# DOMAIN TYPES
# =========================================================================

@dataclass(eq=False)
class ConfusionMatrix:
    """
    Rows are true classes, columns predicted classes.

    Attributes:
        counts: Non-negative ``int64`` array, ``(k, k)``
        class_names: Class order of rows and columns
    """

    counts: np.ndarray
    class_names: Tuple[str, ...] = CLASS_NAMES

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        k = len(self.class_names)
        if counts.shape != (k, k):
            raise InconsistentDimsError(
                f"Confusion matrix shape {counts.shape} does not match {k} classes"
            )
        if (counts < 0).any():
            raise InconsistentDimsError("Confusion matrix counts must be >= 0")
        self.counts = counts
        self.class_names = tuple(self.class_names)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class ClassMetrics:
    """One-vs-rest counts and rates of one class."""

    name: str
    tp: int
    tn: int
    fp: int
    fn: int
    accuracy: float
    precision: float
    recall: float
    specificity: float
    f1: float


@dataclass(frozen=True)
class MetricsReport:
    """
    Multiclass metrics.

    Attributes:
        accuracy: Trace over total
        per_class: ClassMetrics in class order
        macro_p, macro_r: Means of per-class precision and recall
        macro_f1: Harmonic mean of macro_p and macro_r
        variance: Mean squared deviation of the recalls from macro_r
    """

    accuracy: float
    per_class: Tuple[ClassMetrics, ...]
    macro_p: float
    macro_r: float
    macro_f1: float
    variance: float

    @property
    def precision(self) -> Tuple[float, ...]:
        return tuple(c.precision for c in self.per_class)

    @property
    def recall(self) -> Tuple[float, ...]:
        return tuple(c.recall for c in self.per_class)

    @property
    def specificity(self) -> Tuple[float, ...]:
        return tuple(c.specificity for c in self.per_class)

    @property
    def f1(self) -> Tuple[float, ...]:
        return tuple(c.f1 for c in self.per_class)


# =========================================================================
# METRICS
# =========================================================================

def _rate(numerator: float, denominator: float) -> float:
    return numerator / denominator if denominator else 0.0


def _class_index(label: str, class_names: Sequence[str]) -> int:
    try:
        return class_names.index(label)
    except ValueError:
        raise UnknownLabelError(
            f"Label '{label}' is not one of {', '.join(class_names)}", label=label
        )


def confusion(pred: Sequence[str], truth: Sequence[str],
              class_names: Sequence[str] = CLASS_NAMES) -> ConfusionMatrix:
    """
    Count (true, predicted) label pairs

    Raises:
        LengthMismatchError: Sequences differ in length or are empty
        UnknownLabelError: A label outside ``class_names``
    """
    if len(pred) != len(truth):
        raise LengthMismatchError(
            f"{len(pred)} predictions for {len(truth)} true labels"
        )
    if not pred:
        raise LengthMismatchError("Need at least one scored sample")

    class_names = tuple(class_names)
    counts = np.zeros((len(class_names), len(class_names)), dtype=np.int64)
    for p, t in zip(pred, truth):
        counts[_class_index(t, class_names), _class_index(p, class_names)] += 1
    return ConfusionMatrix(counts, class_names)


def metrics(cm: ConfusionMatrix) -> MetricsReport:
    """
    Metric suite of a confusion matrix

    Example:
        >>> report = metrics(ConfusionMatrix(np.array([[8, 2, 0], [1, 6, 1], [0, 2, 4]])))
        >>> report.accuracy, report.precision[0], report.recall[0]
        (0.75, 0.8888888888888888, 0.8)

    Raises:
        EmptyMatrixError: No samples
    """
    total = cm.total
    if total == 0:
        raise EmptyMatrixError("Confusion matrix holds no samples")

    counts = cm.counts
    per_class = []
    for i, name in enumerate(cm.class_names):
        tp = int(counts[i, i])
        fp = int(counts[:, i].sum()) - tp
        fn = int(counts[i, :].sum()) - tp
        tn = total - tp - fp - fn
        per_class.append(ClassMetrics(
            name=name,
            tp=tp, tn=tn, fp=fp, fn=fn,
            accuracy=_rate(tp + tn, total),
            precision=_rate(tp, tp + fp),
            recall=_rate(tp, tp + fn),
            specificity=_rate(tn, tn + fp),
            f1=_rate(2 * tp, 2 * tp + fp + fn),
        ))

    k = len(per_class)
    macro_p = sum(c.precision for c in per_class) / k
    macro_r = sum(c.recall for c in per_class) / k
    macro_f1 = _rate(2 * macro_p * macro_r, macro_p + macro_r)
    variance = sum((c.recall - macro_r) ** 2 for c in per_class) / k

    return MetricsReport(
        accuracy=_rate(int(np.trace(counts)), total),
        per_class=tuple(per_class),
        macro_p=macro_p,
        macro_r=macro_r,
        macro_f1=macro_f1,
        variance=variance,
    )


# =========================================================================
# BASELINE CLASSIFIER
# =========================================================================

def _as_matrix(rows, name: str) -> np.ndarray:
    if not len(rows):
        return np.zeros((0, 0), dtype=np.float64)
    lengths = {len(row) for row in rows}
    if len(lengths) > 1:
        raise InconsistentDimsError(
            f"{name} vectors have differing lengths", errors=[str(n) for n in sorted(lengths)]
        )
    return np.asarray(rows, dtype=np.float64).reshape(len(rows), -1)


def nearest_centroid(train: Sequence[Sequence[float]], train_labels: Sequence[str],
                     test: Sequence[Sequence[float]],
                     class_names: Sequence[str] = CLASS_NAMES) -> List[str]:
    """
    Predict the class of the nearest class mean

    Features are z-scored with the training mean and population standard
    deviation; zero-variance dimensions are dropped. Distance ties go to
    the class listed first in ``class_names``.

    Raises:
        LengthMismatchError: ``train`` and ``train_labels`` differ in length
        InconsistentDimsError: Vectors of differing length
        MissingClassError: A class without training samples
        UnknownLabelError: A training label outside ``class_names``
    """
    class_names = tuple(class_names)
    if len(train) != len(train_labels):
        raise LengthMismatchError(f"{len(train)} training vectors for {len(train_labels)} labels")

    x_train = _as_matrix(train, "Training")
    x_test = _as_matrix(test, "Test")
    if len(test) and x_test.shape[1] != x_train.shape[1]:
        raise InconsistentDimsError(
            f"Test vectors have {x_test.shape[1]} dims, training vectors {x_train.shape[1]}"
        )

    indices = np.array([_class_index(label, class_names) for label in train_labels], dtype=np.int64)
    missing = [name for i, name in enumerate(class_names) if not (indices == i).any()]
    if missing:
        raise MissingClassError(
            "Every class needs at least one training sample", errors=missing
        )
    if not len(test):
        return []

    mean = x_train.mean(axis=0)
    std = x_train.std(axis=0)
    keep = std > 0
    z_train = (x_train[:, keep] - mean[keep]) / std[keep]
    z_test = (x_test[:, keep] - mean[keep]) / std[keep]

    centroids = np.stack([z_train[indices == i].mean(axis=0) for i in range(len(class_names))])
    distance = ((z_test[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    # argmin returns the first minimum
    return [class_names[i] for i in distance.argmin(axis=1)]


# =========================================================================
# DATASET HELPERS
# =========================================================================

def stratified_split(labels: Mapping[int, str], fraction: float = 0.5, seed: int = 0,
                     class_names: Sequence[str] = CLASS_NAMES) -> Dict[int, str]:
    """
    Assign each id to ``train`` or ``test``, class by class

    Ids of each class are shuffled with a seeded generator and the first
    ``round(n * fraction)`` go to training.
    """
    rng = np.random.default_rng(seed)
    splits: Dict[int, str] = {}
    for name in class_names:
        ids = sorted(track_id for track_id, label in labels.items() if label == name)
        order = rng.permutation(len(ids))
        n_train = int(math.floor(len(ids) * fraction + 0.5))
        for rank, position in enumerate(order):
            splits[ids[position]] = SPLIT_TRAIN if rank < n_train else SPLIT_TEST
    unknown = sorted(set(labels) - set(splits))
    if unknown:
        raise UnknownLabelError(
            f"Track {unknown[0]} has label '{labels[unknown[0]]}'", label=labels[unknown[0]]
        )
    return dict(sorted(splits.items()))


def vectors_for_axis(records: Sequence[FeatureRecord], axis: str) -> Dict[int, Tuple[float, ...]]:
    """Track id to feature values for one axis, in id order."""
    rows = {r.track_id: r.values for r in records if r.axis == axis}
    return dict(sorted(rows.items()))


def predict_axis(records: Sequence[FeatureRecord], labels: Mapping[int, str],
                 splits: Mapping[int, str], axis: str,
                 class_names: Sequence[str] = CLASS_NAMES) -> Tuple[List[int], List[str]]:
    """
    Train nearest-centroid on the ``train`` split and predict the ``test`` split

    Only tracks present in ``records``, ``labels`` and ``splits`` take part.

    Returns:
        Tuple of (test ids in id order, predicted labels)
    """
    vectors = vectors_for_axis(records, axis)
    ids = [i for i in vectors if i in labels and i in splits]
    train_ids = [i for i in ids if splits[i] == SPLIT_TRAIN]
    test_ids = [i for i in ids if splits[i] == SPLIT_TEST]

    predicted = nearest_centroid(
        [vectors[i] for i in train_ids],
        [labels[i] for i in train_ids],
        [vectors[i] for i in test_ids],
        class_names,
    )
    logger.info("axis %s: %d train / %d test", axis, len(train_ids), len(test_ids))
    return test_ids, predicted


def evaluate_axis(records: Sequence[FeatureRecord], labels: Mapping[int, str],
                  splits: Mapping[int, str], axis: str,
                  class_names: Sequence[str] = CLASS_NAMES) -> Tuple[ConfusionMatrix, MetricsReport]:
    """Confusion matrix and metrics of ``predict_axis`` on the test split."""
    test_ids, predicted = predict_axis(records, labels, splits, axis, class_names)
    cm = confusion(predicted, [labels[i] for i in test_ids], class_names)
    return cm, metrics(cm)


# =========================================================================
# REPORTING
# =========================================================================

def table_columns(k: int = len(CLASS_NAMES)) -> List[str]:
    """Column heads of the metrics table."""
    numbered = lambda stem: [f"{stem}{i}" for i in range(1, k + 1)]  # noqa: E731
    return (["Acc"] + numbered("Pre") + ["Mac_P"] + numbered("Rec") + ["Mac_R"]
            + numbered("Spe") + numbered("F1-mea") + ["Mac_F1", "Var"])


def _table_row(report: MetricsReport) -> List[float]:
    return ([report.accuracy] + list(report.precision) + [report.macro_p]
            + list(report.recall) + [report.macro_r] + list(report.specificity)
            + list(report.f1) + [report.macro_f1, report.variance])


def format_table(reports: Mapping[str, MetricsReport], decimals: int = 4) -> str:
    """
    Aligned plain-text metrics table, one row per report

    Args:
        reports: Row name (e.g. ``F^Z``) to report, in display order
        decimals: Digits after the decimal point
    """
    k = len(next(iter(reports.values())).per_class) if reports else len(CLASS_NAMES)
    header = ["Feature"] + table_columns(k)
    rows = [[name] + [f"{v:.{decimals}f}" for v in _table_row(report)]
            for name, report in reports.items()]
    widths = [max(len(row[i]) for row in [header] + rows) for i in range(len(header))]
    lines = []
    for row in [header] + rows:
        cells = [row[0].ljust(widths[0])] + [cell.rjust(w) for cell, w in zip(row[1:], widths[1:])]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines) + "\n"


def report_to_dict(report: MetricsReport, cm: Optional[ConfusionMatrix] = None) -> Dict:
    """JSON-ready view of a report (and its confusion matrix)."""
    data = {
        "accuracy": report.accuracy,
        "macro_p": report.macro_p,
        "macro_r": report.macro_r,
        "macro_f1": report.macro_f1,
        "variance": report.variance,
        "per_class": {
            c.name: {
                "tp": c.tp, "tn": c.tn, "fp": c.fp, "fn": c.fn,
                "accuracy": c.accuracy,
                "precision": c.precision,
                "recall": c.recall,
                "specificity": c.specificity,
                "f1": c.f1,
            }
            for c in report.per_class
        },
    }
    if cm is not None:
        data["confusion"] = {
            "class_names": list(cm.class_names),
            "counts": cm.counts.tolist(),
        }
    return data


# =========================================================================
# EXPORT
# =========================================================================

def export_csv(features: Sequence[FeatureRecord], labels: Optional[Mapping[int, str]],
               path: Union[str, Path]) -> Path:
    """
    Write the feature CSV with a trailing ``label`` column

    Tracks missing from ``labels`` get an empty label.
    """
    labels = labels or {}
    rows = [r._replace(label=labels.get(r.track_id, "")) for r in features]
    return FeatureCsvSerializer(with_label=True).dump(rows, path)


def import_csv(path: Union[str, Path]) -> List[FeatureRecord]:
    """Read a feature CSV written by ``export_csv`` (or without labels)."""
    return FeatureCsvSerializer().load(path)
