"""Descriptive statistics per feature, seeded with the reference dataset description."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Mapping

__author__ = "glucoguard"

STAT_NAMES = ["count", "mean", "std", "min", "25%", "50%", "75%", "max"]


@dataclass(frozen=True)
class FeatureStats:
    count: float
    mean: float
    std: float
    min: float
    q25: float
    q50: float
    q75: float
    max: float

    def as_list(self) -> List[float]:
        """Values in count, mean, std, min, 25%, 50%, 75%, max order."""
        return [
            self.count,
            self.mean,
            self.std,
            self.min,
            self.q25,
            self.q50,
            self.q75,
            self.max,
        ]


class ReferenceStats:
    """Statistics for a set of named features (and the label)."""

    def __init__(self, features: Mapping[str, FeatureStats]):
        """Keep the features in the order given."""
        self._features: Dict[str, FeatureStats] = dict(features)

    def __getitem__(self, name: str) -> FeatureStats:
        return self._features[name]

    def __contains__(self, name: object) -> bool:
        return name in self._features

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ReferenceStats) and self._features == other._features

    @property
    def names(self) -> List[str]:
        """Feature names in order."""
        return list(self._features)

    def mean(self, name: str) -> float:
        """Mean of one feature."""
        return self._features[name].mean

    def without(self, name: str) -> ReferenceStats:
        """Copy lacking one feature."""
        return ReferenceStats({k: v for k, v in self._features.items() if k != name})


# Sample dataset description: 16969 observations
REFERENCE_STATS = ReferenceStats(
    {
        "glucose": FeatureStats(16969, 95.74, 42.99, 50.0, 68.0, 83.0, 108.0, 250.0),
        "systolic_bp": FeatureStats(16969, 118.19, 7.70, 95.0, 113.0, 119.0, 124.0, 145.0),
        "heart_rate": FeatureStats(16969, 662.85, 68.68, 461.0, 631.0, 674.0, 714.0, 769.0),
        "sweating": FeatureStats(16969, 0.12, 0.33, 0.0, 0.0, 0.0, 0.0, 1.0),
        "shivering": FeatureStats(16969, 0.15, 0.35, 0.0, 0.0, 0.0, 0.0, 1.0),
        "hypoglycemia": FeatureStats(16969, 0.49, 0.50, 0.0, 0.0, 0.0, 1.0, 1.0),
    }
)
