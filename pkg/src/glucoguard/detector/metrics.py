"""Accuracy, confusion counts and ROC analysis."""
import logging
from typing import Tuple

import numpy as np

from glucoguard.datagen.dataset import Dataset
from glucoguard.detector.data import (
    Classifier,
    Confusion,
    EmptyTestSet,
    Metrics,
    NonFiniteFeature,
    RocPoint,
    SingleClassTest,
)

__author__ = "glucoguard"

logger = logging.getLogger(__name__)


def confusion(predicted: np.ndarray, labels: np.ndarray) -> Confusion:
    predicted = np.asarray(predicted).astype(bool)
    labels = np.asarray(labels).astype(bool)
    if labels.size == 0:
        raise EmptyTestSet("Confusion counts over zero samples")
    return Confusion(
        tp=int(np.count_nonzero(predicted & labels)),
        fp=int(np.count_nonzero(predicted & ~labels)),
        tn=int(np.count_nonzero(~predicted & ~labels)),
        fn=int(np.count_nonzero(~predicted & labels)),
    )


def accuracy(predicted: np.ndarray, labels: np.ndarray) -> float:
    counts = confusion(predicted, labels)
    return (counts.tp + counts.tn) / sum(counts)


def roc_curve(scores: np.ndarray, labels: np.ndarray) -> Tuple[Tuple[RocPoint, ...], float]:
    """
    ROC points for every distinct score threshold, highest threshold first, and the
    trapezoidal area under them.

    The first point is (0, 0) at threshold +inf. A sample counts as positive when
    its score is >= the threshold.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels).astype(bool)
    if labels.size == 0:
        raise EmptyTestSet("ROC over zero samples")
    if not np.isfinite(scores).all():
        raise NonFiniteFeature("Scores must be finite")
    positives = int(np.count_nonzero(labels))
    negatives = labels.size - positives
    if positives == 0 or negatives == 0:
        raise SingleClassTest("ROC needs both classes in the test labels")

    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    tp = np.cumsum(labels[order])
    fp = np.cumsum(~labels[order])
    # last position of every distinct score
    last = np.r_[np.nonzero(sorted_scores[:-1] != sorted_scores[1:])[0], sorted_scores.size - 1]
    fpr = np.r_[0.0, fp[last] / negatives]
    tpr = np.r_[0.0, tp[last] / positives]
    thresholds = np.r_[np.inf, sorted_scores[last]]
    auc = float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2.0))
    points = tuple(
        RocPoint(float(f), float(t), float(th)) for f, t, th in zip(fpr, tpr, thresholds)
    )
    return points, auc


def evaluate(model: Classifier, dataset: Dataset, threshold: float = 0.5) -> Metrics:
    """
    Accuracy, confusion counts and ROC of a model on a labeled set.

    With a single class in the labels the ROC is left empty and the AUC is None.
    """
    if len(dataset) == 0:
        raise EmptyTestSet("Cannot evaluate on an empty test set")
    scores = model.predict_proba(dataset.X)
    counts = confusion(scores >= threshold, dataset.y)
    try:
        roc, auc = roc_curve(scores, dataset.y)
    except SingleClassTest as exc:
        logger.warning(f"AUC undefined: {exc}")
        roc, auc = (), None
    return Metrics(
        accuracy=(counts.tp + counts.tn) / len(dataset),
        confusion=counts,
        roc=roc,
        auc=auc,
    )
