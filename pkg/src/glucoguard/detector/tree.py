"""
CART decision trees with Gini impurity.

Trees are stored as flat node arrays in pre-order. A node with feature -1 is a leaf,
samples go left when feature value <= threshold.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

import numpy as np

from glucoguard.detector.data import (
    N_FEATURES,
    EmptyNode,
    ForestConfig,
    Split,
    as_matrix,
)

__author__ = "glucoguard"

logger = logging.getLogger(__name__)

LEAF = -1

# Decreases closer than this are ties, resolved by lower feature index then lower threshold
TIE_TOLERANCE = 1e-12


class _NoSplit:
    def __repr__(self) -> str:
        return "NoSplit"


NoSplit = _NoSplit()


def gini(labels: Union[np.ndarray, Sequence[int]]) -> float:
    """Gini impurity of binary labels."""
    y = np.asarray(labels)
    if y.size == 0:
        raise EmptyNode("Gini impurity of an empty node is undefined")
    p1 = float(np.count_nonzero(y)) / y.size
    return 1.0 - p1 ** 2 - (1.0 - p1) ** 2


def _feature_splits(x: np.ndarray, y: np.ndarray, min_samples_leaf: int):
    """Weighted child impurity for every midpoint of one feature, thresholds ascending."""
    order = np.argsort(x, kind="stable")
    xs = x[order]
    positives = np.cumsum(y[order])
    n = xs.size
    # position i splits into xs[:i + 1] and xs[i + 1:]
    pos = np.nonzero(xs[:-1] < xs[1:])[0]
    n_left = pos + 1
    n_right = n - n_left
    keep = (n_left >= min_samples_leaf) & (n_right >= min_samples_leaf)
    pos, n_left, n_right = pos[keep], n_left[keep], n_right[keep]
    p_left = positives[pos]
    p_right = positives[-1] - p_left
    weighted = (
        2.0 * p_left * (n_left - p_left) / n_left + 2.0 * p_right * (n_right - p_right) / n_right
    ) / n
    thresholds = (xs[pos] + xs[pos + 1]) / 2.0
    return thresholds, weighted


def best_split(
    X: np.ndarray,
    y: np.ndarray,
    candidates: Optional[Sequence[int]] = None,
    min_samples_leaf: int = 1,
) -> Union[Split, _NoSplit]:
    """
    Exhaustive search for the split with the largest Gini decrease.

    Thresholds are midpoints between consecutive distinct values. Returns NoSplit
    when no split has a positive decrease.
    """
    if candidates is None:
        candidates = range(X.shape[1])
    n = y.size
    if n < 2:
        return NoSplit
    parent = gini(y)
    features: List[np.ndarray] = []
    thresholds: List[np.ndarray] = []
    weighted: List[np.ndarray] = []
    for feature in sorted(candidates):
        t, w = _feature_splits(X[:, feature], y, min_samples_leaf)
        features.append(np.full(t.size, feature))
        thresholds.append(t)
        weighted.append(w)
    if not weighted:
        return NoSplit
    decrease = parent - np.concatenate(weighted)
    if decrease.size == 0:
        return NoSplit
    best = float(decrease.max())
    if best <= TIE_TOLERANCE:
        return NoSplit
    # first in (feature, threshold) order among the ties
    idx = int(np.argmax(decrease >= best - TIE_TOLERANCE))
    return Split(
        feature=int(np.concatenate(features)[idx]),
        threshold=float(np.concatenate(thresholds)[idx]),
        decrease=float(decrease[idx]),
    )


@dataclass(frozen=True, eq=False)
class DecisionTree:
    """Flat node arrays of a fitted tree."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    max_depth: int

    def __len__(self) -> int:
        return int(self.feature.size)

    def equals(self, other: DecisionTree) -> bool:
        return self.max_depth == other.max_depth and all(
            np.array_equal(getattr(self, name), getattr(other, name))
            for name in ("feature", "threshold", "left", "right", "value")
        )

    def depth(self) -> int:
        """Length of the longest root to leaf path."""
        deepest = 0
        stack = [(0, 0)]
        while stack:
            node, depth = stack.pop()
            if self.feature[node] == LEAF:
                deepest = max(deepest, depth)
            else:
                stack.append((int(self.left[node]), depth + 1))
                stack.append((int(self.right[node]), depth + 1))
        return deepest

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf node index for every sample."""
        node = np.zeros(X.shape[0], dtype=np.int64)
        while True:
            feat = self.feature[node]
            inner = np.nonzero(feat != LEAF)[0]
            if inner.size == 0:
                return node
            at = node[inner]
            go_left = X[inner, feat[inner]] <= self.threshold[at]
            node[inner] = np.where(go_left, self.left[at], self.right[at])

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(as_matrix(X))]

    def predict(self, X: np.ndarray, threshold: float = 0.5) -> np.ndarray:
        return (self.predict_proba(X) >= threshold).astype(np.int64)


class _Builder:
    def __init__(self, config: ForestConfig, rng: np.random.Generator):
        """Collect nodes in pre-order while growing."""
        self.config = config
        self.rng = rng
        self.feature: List[int] = []
        self.threshold: List[float] = []
        self.left: List[int] = []
        self.right: List[int] = []
        self.value: List[float] = []

    def _add(self, value: float) -> int:
        self.feature.append(LEAF)
        self.threshold.append(0.0)
        self.left.append(LEAF)
        self.right.append(LEAF)
        self.value.append(value)
        return len(self.feature) - 1

    def grow(self, X: np.ndarray, y: np.ndarray, depth: int) -> int:
        node = self._add(float(np.mean(y)))
        n = y.size
        if (
            depth >= self.config.max_depth
            or n < self.config.min_samples_split
            or n < 2 * self.config.min_samples_leaf
        ):
            return node
        candidates = self.rng.choice(N_FEATURES, size=self.config.features_per_split, replace=False)
        split = best_split(X, y, candidates, self.config.min_samples_leaf)
        if not isinstance(split, Split):
            return node
        mask = X[:, split.feature] <= split.threshold
        self.feature[node] = split.feature
        self.threshold[node] = split.threshold
        self.left[node] = self.grow(X[mask], y[mask], depth + 1)
        self.right[node] = self.grow(X[~mask], y[~mask], depth + 1)
        return node

    def build(self) -> DecisionTree:
        return DecisionTree(
            feature=np.array(self.feature, dtype=np.int64),
            threshold=np.array(self.threshold, dtype=np.float64),
            left=np.array(self.left, dtype=np.int64),
            right=np.array(self.right, dtype=np.int64),
            value=np.array(self.value, dtype=np.float64),
            max_depth=self.config.max_depth,
        )


def fit_tree(
    X: np.ndarray, y: np.ndarray, config: ForestConfig, rng: np.random.Generator
) -> DecisionTree:
    """
    Grow one tree.

    Each node draws features_per_split candidate features without replacement from rng.
    Growth stops at max_depth, below min_samples_split or 2 * min_samples_leaf samples,
    and where no split decreases impurity. Leaves hold the positive fraction.
    """
    if y.size == 0:
        raise EmptyNode("Cannot fit a tree on zero samples")
    builder = _Builder(config, rng)
    builder.grow(X, y, 0)
    tree = builder.build()
    logger.debug(f"Fitted tree with {len(tree)} nodes on {y.size} samples")
    return tree
