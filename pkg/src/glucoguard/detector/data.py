"""Detector configuration, errors and the interface shared by all classifiers."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Mapping, NamedTuple, Optional, Tuple

import numpy as np
from typing_extensions import Protocol

from glucoguard.common.config_misc import DetectorPolicy
from glucoguard.common.errors import GlucoguardError
from glucoguard.fog.data import MODEL_FEATURE_NAMES

__author__ = "glucoguard"

N_FEATURES = len(MODEL_FEATURE_NAMES)


class DetectorError(GlucoguardError):
    """Base class for detector errors."""


class EmptyNode(DetectorError):
    """Impurity or a tree requested over zero samples."""


class InvalidConfig(DetectorError):
    """Forest hyperparameters out of range."""


class NonFiniteFeature(DetectorError):
    """A sample handed to a model has a NaN or infinite feature."""


class TooFewSamples(DetectorError):
    """Not enough samples to split into the requested parts."""


class EmptyTestSet(DetectorError):
    """Metrics requested over zero samples."""


class SingleClassTest(DetectorError):
    """ROC is undefined when the test labels hold only one class."""


class EvenK(DetectorError):
    """KNN needs an odd number of neighbours for an unambiguous majority."""


class KExceedsN(DetectorError):
    """KNN asked for more neighbours than there are training samples."""


class ModelFormatError(DetectorError):
    """A model file could not be parsed."""


@dataclass(frozen=True)
class ForestConfig:
    """Random forest hyperparameters. The defaults give a 100 tree forest of depth 4."""

    n_trees: int = 100
    max_depth: int = 4
    seed: int = 42
    features_per_split: int = math.ceil(math.sqrt(N_FEATURES))
    bootstrap: bool = True
    min_samples_leaf: int = 1
    min_samples_split: int = 2

    def validate(self) -> None:
        """Raise InvalidConfig unless usable."""
        if self.n_trees < 1:
            raise InvalidConfig(f"n_trees must be >= 1, got {self.n_trees}")
        if self.max_depth < 1:
            raise InvalidConfig(f"max_depth must be >= 1, got {self.max_depth}")
        if not 1 <= self.features_per_split <= N_FEATURES:
            raise InvalidConfig(
                f"features_per_split must be in 1..{N_FEATURES}, got {self.features_per_split}"
            )
        if self.min_samples_leaf < 1:
            raise InvalidConfig(f"min_samples_leaf must be >= 1, got {self.min_samples_leaf}")
        if self.min_samples_split < 2:
            raise InvalidConfig(f"min_samples_split must be >= 2, got {self.min_samples_split}")
        if self.seed < 0:
            raise InvalidConfig(f"seed must be unsigned, got {self.seed}")

    @classmethod
    def from_policy(cls, policy: DetectorPolicy) -> ForestConfig:
        return cls(
            n_trees=policy.n_trees,
            max_depth=policy.max_depth,
            seed=policy.seed,
            features_per_split=policy.features_per_split,
            bootstrap=policy.bootstrap,
            min_samples_leaf=policy.min_samples_leaf,
            min_samples_split=policy.min_samples_split,
        )

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> ForestConfig:
        return cls(**dict(data))


def decision_tree_config(max_depth: int = 4, seed: int = 42) -> ForestConfig:
    """The single decision tree baseline: one tree on all data and all features."""
    return ForestConfig(
        n_trees=1,
        max_depth=max_depth,
        seed=seed,
        features_per_split=N_FEATURES,
        bootstrap=False,
    )


class Split(NamedTuple):
    feature: int
    threshold: float
    decrease: float


class Confusion(NamedTuple):
    tp: int
    fp: int
    tn: int
    fn: int


class RocPoint(NamedTuple):
    fpr: float
    tpr: float
    threshold: float


@dataclass(frozen=True)
class Metrics:
    """
    Outcome of evaluating a model on a labeled set.

    The ROC curve and AUC are empty/None when the labels hold a single class.
    """

    accuracy: float
    confusion: Confusion
    roc: Tuple[RocPoint, ...]
    auc: Optional[float]

    @property
    def n(self) -> int:
        return sum(self.confusion)


class Classifier(Protocol):
    """What evaluation, cross-validation and the dosing pipeline need from a model."""

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        ...

    def predict(self, X: np.ndarray, threshold: float = 0.5) -> np.ndarray:
        ...


def as_matrix(X: np.ndarray) -> np.ndarray:
    """
    Validate model input and return it as a float matrix of shape (n, 5).

    A single sample may be given as a 1-D array.
    """
    matrix = np.asarray(X, dtype=np.float64)
    if matrix.ndim == 1:
        matrix = matrix.reshape(1, -1)
    if matrix.ndim != 2 or matrix.shape[1] != N_FEATURES:
        raise DetectorError(f"Expected samples with {N_FEATURES} features, got shape {matrix.shape}")
    if not np.isfinite(matrix).all():
        raise NonFiniteFeature("Samples must not contain NaN or infinite features")
    return matrix
