"""Train and compare the forest against its baselines on one holdout split."""
from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from typing import List, Optional, Sequence

import pandas as pd

from glucoguard.common.integrity import checksum_bytes2str
from glucoguard.datagen.dataset import Dataset
from glucoguard.detector.data import Classifier, ForestConfig, Metrics, decision_tree_config
from glucoguard.detector.forest import fit_forest
from glucoguard.detector.knn import fit_knn
from glucoguard.detector.metrics import evaluate
from glucoguard.detector.split import train_test_split

__author__ = "glucoguard"

logger = logging.getLogger(__name__)

DEFAULT_KNN_K = (9, 11)
KNN_SWEEP_K = (3, 5, 7, 9, 11, 13, 15)


@dataclass(frozen=True)
class ModelReport:
    name: str
    train: Metrics
    test: Metrics


def compare_models(
    dataset: Dataset,
    config: ForestConfig = ForestConfig(),
    knn_k: Sequence[int] = DEFAULT_KNN_K,
    test_fraction: float = 0.2,
    seed: int = 42,
) -> List[ModelReport]:
    """
    Fit the forest, the decision tree baseline and one KNN per k on the same 80/20 split.

    Both training and testing metrics are reported for every model.
    """
    train_idx, test_idx = train_test_split(len(dataset), test_fraction, seed)
    train, test = dataset.subset(train_idx), dataset.subset(test_idx)
    models: List[tuple] = [
        ("random_forest", fit_forest(train, config)),
        ("decision_tree", fit_forest(train, decision_tree_config(config.max_depth, config.seed))),
    ]
    models += [(f"knn_{k}", fit_knn(train, k)) for k in knn_k]
    res = []
    for name, model in models:
        report = _report(name, model, train, test)
        logger.info(
            f"{name}: train accuracy {report.train.accuracy:.4f}, test accuracy {report.test.accuracy:.4f}, "
            f"test AUC {report.test.auc}"
        )
        res.append(report)
    return res


def _report(name: str, model: Classifier, train: Dataset, test: Dataset) -> ModelReport:
    return ModelReport(name=name, train=evaluate(model, train), test=evaluate(model, test))


def metrics_frame(reports: Sequence[ModelReport]) -> pd.DataFrame:
    rows = []
    for report in reports:
        for split, metrics in (("train", report.train), ("test", report.test)):
            rows.append(
                {"model": report.name, "split": split, "accuracy": metrics.accuracy, "auc": metrics.auc}
            )
    return pd.DataFrame(rows, columns=["model", "split", "accuracy", "auc"])


def roc_frame(metrics: Metrics) -> pd.DataFrame:
    return pd.DataFrame(
        [(p.threshold, p.fpr, p.tpr) for p in metrics.roc], columns=["threshold", "fpr", "tpr"]
    )


def write_frame(frame: pd.DataFrame, path: str) -> None:
    data = frame.to_csv(index=False, float_format="%.6g", lineterminator="\n")
    with open(path, "w") as fd:
        fd.write(data)
    logger.info(f"Wrote {len(frame)} rows to file {path} {checksum_bytes2str(data.encode())}")


def write_reports(
    reports: Sequence[ModelReport], metrics_path: str, roc_dir: Optional[str] = None
) -> List[str]:
    """
    Write the metrics CSV and, with a directory, one `<model>_roc.csv' per model
    from the test split. Returns the written paths.
    """
    write_frame(metrics_frame(reports), metrics_path)
    written = [metrics_path]
    if roc_dir is not None:
        os.makedirs(roc_dir, exist_ok=True)
        for report in reports:
            path = os.path.join(roc_dir, f"{report.name}_roc.csv")
            write_frame(roc_frame(report.test), path)
            written.append(path)
    return written
