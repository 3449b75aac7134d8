"""k nearest neighbours baseline over z-score standardized features."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from glucoguard.datagen.dataset import Dataset
from glucoguard.detector.data import EvenK, KExceedsN, as_matrix

__author__ = "glucoguard"

logger = logging.getLogger(__name__)

# queries per distance block, bounds memory to chunk * n_train * 5 floats
_CHUNK = 32


@dataclass(frozen=True, eq=False)
class KnnModel:
    X: np.ndarray
    y: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    k: int

    def standardize(self, X: np.ndarray) -> np.ndarray:
        return (X - self.mean) / self.std

    def neighbours(self, X: np.ndarray) -> np.ndarray:
        """
        Training indices of the k nearest neighbours for every query row.

        Equal distances are broken by the lower training index.
        """
        queries = self.standardize(as_matrix(X))
        res = np.empty((queries.shape[0], self.k), dtype=np.int64)
        for start in range(0, queries.shape[0], _CHUNK):
            chunk = queries[start : start + _CHUNK]
            dist = ((chunk[:, None, :] - self.X[None, :, :]) ** 2).sum(axis=2)
            res[start : start + _CHUNK] = np.argsort(dist, axis=1, kind="stable")[:, : self.k]
        return res

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        """Fraction of positive neighbours."""
        return self.y[self.neighbours(X)].mean(axis=1)

    def predict(self, X: np.ndarray, threshold: float = 0.5) -> np.ndarray:
        return (self.predict_proba(X) >= threshold).astype(np.int64)


def fit_knn(dataset: Dataset, k: int) -> KnnModel:
    """Memorize the standardized training set. Constant features get unit scale."""
    if k < 1 or k % 2 == 0:
        raise EvenK(f"k must be a positive odd number, got {k}")
    if k > len(dataset):
        raise KExceedsN(f"k={k} exceeds the {len(dataset)} training samples")
    X = as_matrix(dataset.X)
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std[std == 0] = 1.0
    logger.debug(f"Fitted {k}-NN on {len(dataset)} samples")
    return KnnModel(X=(X - mean) / std, y=dataset.y.astype(np.float64), mean=mean, std=std, k=k)


def predict_knn(model: KnnModel, sample: np.ndarray) -> int:
    """Majority label among the k nearest neighbours of one sample."""
    return int(model.predict(np.asarray(sample, dtype=np.float64).reshape(-1))[0])
