"""Random forest of CART trees with soft voting."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from glucoguard.datagen.dataset import Dataset
from glucoguard.detector.data import EmptyNode, ForestConfig, as_matrix
from glucoguard.detector.tree import DecisionTree, fit_tree
from glucoguard.fog.data import MODEL_FEATURE_NAMES

__author__ = "glucoguard"

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class RandomForest:
    """A fitted forest. Predictions average the leaf probabilities of all trees."""

    trees: Tuple[DecisionTree, ...]
    config: ForestConfig
    n_samples: int
    trained_at: int
    feature_names: Tuple[str, ...] = field(default=MODEL_FEATURE_NAMES)

    def __len__(self) -> int:
        return len(self.trees)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        matrix = as_matrix(X)
        total = np.zeros(matrix.shape[0], dtype=np.float64)
        for tree in self.trees:
            total += tree.value[tree.apply(matrix)]
        return total / len(self.trees)

    def predict(self, X: np.ndarray, threshold: float = 0.5) -> np.ndarray:
        return (self.predict_proba(X) >= threshold).astype(np.int64)

    def equals(self, other: RandomForest) -> bool:
        """Same configuration and identical trees, training time aside."""
        return (
            self.config == other.config
            and self.n_samples == other.n_samples
            and self.feature_names == other.feature_names
            and len(self.trees) == len(other.trees)
            and all(a.equals(b) for a, b in zip(self.trees, other.trees))
        )


def tree_rng(seed: int, tree_index: int) -> np.random.Generator:
    """Independent random stream for one tree, derived from the forest seed."""
    return np.random.default_rng([seed, tree_index])


def fit_forest(
    dataset: Dataset, config: ForestConfig, trained_at: int = 0
) -> RandomForest:
    """
    Fit config.n_trees trees, each on a bootstrap resample of size n.

    Every tree draws its resample and its candidate features from its own stream,
    so identical (dataset, config) pairs give identical forests. trained_at is
    stored as given, the model file never depends on the wall clock.
    """
    config.validate()
    n = len(dataset)
    if n == 0:
        raise EmptyNode("Cannot fit a forest on zero samples")
    trees = []
    for i in range(config.n_trees):
        rng = tree_rng(config.seed, i)
        if config.bootstrap:
            idx = rng.integers(0, n, size=n)
            trees.append(fit_tree(dataset.X[idx], dataset.y[idx], config, rng))
        else:
            trees.append(fit_tree(dataset.X, dataset.y, config, rng))
    logger.info(
        f"Fitted forest of {config.n_trees} trees (depth {config.max_depth}, "
        f"seed {config.seed}) on {n} samples"
    )
    return RandomForest(trees=tuple(trees), config=config, n_samples=n, trained_at=trained_at)


def predict_proba(model: RandomForest, sample: np.ndarray) -> float:
    """Hypoglycemia probability of one sample."""
    return float(model.predict_proba(np.asarray(sample, dtype=np.float64).reshape(-1))[0])


def predict(model: RandomForest, sample: np.ndarray, threshold: float = 0.5) -> int:
    """Label of one sample, 1 when the probability is >= threshold."""
    return int(predict_proba(model, sample) >= threshold)
