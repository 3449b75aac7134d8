"""Holdout and k-fold splits, cross-validation and the hyperparameter grid search."""
from __future__ import annotations

import itertools
import logging
from typing import Any, Callable, Dict, List, Mapping, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from glucoguard.datagen.dataset import Dataset
from glucoguard.detector.data import (
    N_FEATURES,
    Classifier,
    ForestConfig,
    InvalidConfig,
    TooFewSamples,
)
from glucoguard.detector.forest import fit_forest
from glucoguard.detector.metrics import accuracy

__author__ = "glucoguard"

logger = logging.getLogger(__name__)

# Hyperparameter grid of the reference tuning run, in scikit-learn parameter names
TUNING_GRID: Dict[str, List[Any]] = {
    "bootstrap": [True],
    "max_depth": [3, 6, 10],
    "max_features": [2, 3, 5, 7, 9],
    "min_samples_leaf": [3, 4, 5, 9, 12],
    "min_samples_split": [8, 10, 12],
    "n_estimators": [100, 200, 300, 500],
}

_GRID_FIELDS = {
    "bootstrap": "bootstrap",
    "max_depth": "max_depth",
    "max_features": "features_per_split",
    "min_samples_leaf": "min_samples_leaf",
    "min_samples_split": "min_samples_split",
    "n_estimators": "n_trees",
}


class GridResult(NamedTuple):
    config: ForestConfig
    mean_accuracy: float
    fold_accuracies: Tuple[float, ...]


def train_test_split(
    n: int, test_fraction: float = 0.2, seed: int = 42
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Shuffle 0..n-1 and cut off round(test_fraction * n) indices for testing.

    Halves round up, so 16969 samples give a test set of 3394.
    """
    if not 0.0 < test_fraction < 1.0:
        raise TooFewSamples(f"test_fraction must be in (0, 1), got {test_fraction}")
    n_test = int(np.floor(test_fraction * n + 0.5))
    if n_test < 1 or n_test >= n:
        raise TooFewSamples(f"Cannot split {n} samples with test fraction {test_fraction}")
    perm = np.random.default_rng(seed).permutation(n)
    return perm[n_test:], perm[:n_test]


def kfold_split(n: int, k: int = 5, seed: int = 42) -> List[np.ndarray]:
    """Shuffled disjoint folds covering 0..n-1, sizes differing by at most one."""
    if k < 2:
        raise TooFewSamples(f"k-fold needs k >= 2, got {k}")
    if n < k:
        raise TooFewSamples(f"Cannot split {n} samples into {k} folds")
    perm = np.random.default_rng(seed).permutation(n)
    return list(np.array_split(perm, k))


def cross_validate(
    dataset: Dataset, fit: Callable[[Dataset], Classifier], k: int = 5, seed: int = 42
) -> List[float]:
    """Accuracy on every held-out fold of a model fitted on the remaining folds."""
    folds = kfold_split(len(dataset), k, seed)
    res = []
    for i, test_idx in enumerate(folds):
        train_idx = np.concatenate([f for j, f in enumerate(folds) if j != i])
        model = fit(dataset.subset(train_idx))
        test = dataset.subset(test_idx)
        res.append(accuracy(model.predict(test.X), test.y))
    return res


def expand_grid(grid: Mapping[str, Sequence[Any]], seed: int = 42) -> List[ForestConfig]:
    """
    Every combination of a parameter grid as a ForestConfig, in grid order.

    max_features values beyond the available features are clipped, and configurations
    that become identical are only kept once.
    """
    unknown = set(grid) - set(_GRID_FIELDS)
    if unknown:
        raise InvalidConfig(f"Unknown grid parameters: {sorted(unknown)}")
    names = list(grid)
    res: List[ForestConfig] = []
    seen = set()
    for values in itertools.product(*(grid[name] for name in names)):
        params: Dict[str, Any] = {"seed": seed}
        for name, value in zip(names, values):
            if name == "max_features":
                value = min(int(value), N_FEATURES)
            params[_GRID_FIELDS[name]] = value
        config = ForestConfig(**params)
        if config not in seen:
            seen.add(config)
            res.append(config)
    return res


def grid_search(
    dataset: Dataset,
    grid: Mapping[str, Sequence[Any]] = TUNING_GRID,
    k: int = 5,
    seed: int = 42,
    limit: Optional[int] = None,
) -> List[GridResult]:
    """
    Rank configurations by mean k-fold accuracy, best first.

    With a limit only that many configurations from the start of the grid are tried.
    Equal scores keep grid order.
    """
    configs = expand_grid(grid, seed)
    if limit is not None:
        configs = configs[:limit]
    results = []
    for i, config in enumerate(configs):
        scores = cross_validate(dataset, lambda d, c=config: fit_forest(d, c), k, seed)
        results.append(GridResult(config, float(np.mean(scores)), tuple(scores)))
        logger.info(f"Grid {i + 1}/{len(configs)}: {config} mean accuracy {results[-1].mean_accuracy:.4f}")
    return sorted(results, key=lambda r: -r.mean_accuracy)
