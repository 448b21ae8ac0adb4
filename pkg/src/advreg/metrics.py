"""Evaluation metrics: accuracy, per-class generalization error, and
member/non-member distribution gap statistics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import LabeledDataset
from .errors import InputError
from .models import ClassifierModel


def model_accuracy(classifier: ClassifierModel, dataset: LabeledDataset) -> float:
    """Fraction of rows whose argmax prediction matches the label.

    Argmax ties break toward the lowest class index.
    """
    if len(dataset) == 0:
        raise InputError("empty dataset")
    preds = classifier.predict(dataset.features)
    return float(np.mean(np.argmax(preds, axis=1) == dataset.labels))


def prediction_accuracy(classifier: ClassifierModel, x: np.ndarray, y: int) -> float:
    """Probability the model assigns to the true class of one data point."""
    if not 0 <= y < classifier.class_count:
        raise InputError(f"label {y} out of range")
    pred = classifier.predict(np.atleast_2d(x))[0]
    return float(pred[y])


def normalized_entropy(prediction: np.ndarray) -> float:
    """Entropy of a probability vector divided by log k; in [0, 1]."""
    p = np.asarray(prediction, dtype=float)
    k = p.shape[-1]
    if k < 2:
        raise InputError("normalized entropy needs at least 2 classes")
    nonzero = p[p > 0.0]
    return float(-np.sum(nonzero * np.log(nonzero)) / np.log(k))


def per_class_generalization_error(
    classifier: ClassifierModel,
    train_set: LabeledDataset,
    test_set: LabeledDataset,
) -> dict[int, float | None]:
    """Per-class train accuracy minus test accuracy.

    Classes missing from either set map to None and are excluded from CDFs.
    """
    train_preds = np.argmax(classifier.predict(train_set.features), axis=1)
    test_preds = np.argmax(classifier.predict(test_set.features), axis=1)
    out: dict[int, float | None] = {}
    for c in range(classifier.class_count):
        tr_mask = train_set.labels == c
        te_mask = test_set.labels == c
        if not tr_mask.any() or not te_mask.any():
            out[c] = None
            continue
        tr_acc = float(np.mean(train_preds[tr_mask] == c))
        te_acc = float(np.mean(test_preds[te_mask] == c))
        out[c] = tr_acc - te_acc
    return out


def generalization_cdf(errors: dict[int, float | None]) -> list[tuple[float, float]]:
    """Empirical CDF points (error value, fraction of classes at or below)."""
    vals = sorted(v for v in errors.values() if v is not None)
    if not vals:
        return []
    n = len(vals)
    return [(v, (i + 1) / n) for i, v in enumerate(vals)]


@dataclass
class DistributionGap:
    """Histogram comparison of a per-row statistic on members vs non-members."""

    max_gap: float
    avg_gap: float
    member_histogram: np.ndarray
    nonmember_histogram: np.ndarray
    bin_edges: np.ndarray

    def to_dict(self) -> dict:
        return {
            "max_gap": self.max_gap,
            "avg_gap": self.avg_gap,
            "member_histogram": self.member_histogram.tolist(),
            "nonmember_histogram": self.nonmember_histogram.tolist(),
            "bin_edges": self.bin_edges.tolist(),
        }


def _row_statistic(classifier: ClassifierModel, dataset: LabeledDataset, statistic: str) -> np.ndarray:
    preds = classifier.predict(dataset.features)
    if statistic == "prediction_accuracy":
        return preds[np.arange(len(dataset)), dataset.labels]
    if statistic == "normalized_entropy":
        k = classifier.class_count
        safe = np.where(preds > 0.0, preds, 1.0)
        return -np.sum(preds * np.log(safe), axis=1) / np.log(k)
    raise InputError(f"unknown statistic {statistic!r}")


def distribution_gap(
    classifier: ClassifierModel,
    member_set: LabeledDataset,
    nonmember_set: LabeledDataset,
    statistic: str = "prediction_accuracy",
    bins: int = 20,
) -> DistributionGap:
    """Equal-width histograms of the statistic on [0, 1] plus gap statistics.

    Gaps are computed on normalized frequencies so unequal set sizes compare
    fairly: max_gap is the largest absolute per-bin frequency difference,
    avg_gap the mean absolute difference.
    """
    if bins < 2:
        raise InputError("need at least 2 bins")
    if len(member_set) == 0 or len(nonmember_set) == 0:
        raise InputError("empty set")
    edges = np.linspace(0.0, 1.0, bins + 1)
    m_stat = _row_statistic(classifier, member_set, statistic)
    n_stat = _row_statistic(classifier, nonmember_set, statistic)
    m_counts, _ = np.histogram(np.clip(m_stat, 0.0, 1.0), bins=edges)
    n_counts, _ = np.histogram(np.clip(n_stat, 0.0, 1.0), bins=edges)
    m_freq = m_counts / m_counts.sum()
    n_freq = n_counts / n_counts.sum()
    diff = np.abs(m_freq - n_freq)
    return DistributionGap(
        max_gap=float(diff.max()),
        avg_gap=float(diff.mean()),
        member_histogram=m_counts,
        nonmember_histogram=n_counts,
        bin_edges=edges,
    )
