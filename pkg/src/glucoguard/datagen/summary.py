"""Descriptive statistics of a dataset in the count/mean/std/min/quartiles/max layout."""
import pandas as pd

from glucoguard.datagen.dataset import Dataset, EmptyDataset
from glucoguard.fog.stats import STAT_NAMES, FeatureStats, ReferenceStats

__author__ = "glucoguard"


def summarize(dataset: Dataset) -> ReferenceStats:
    """
    Exact statistics per feature and for the label.

    Standard deviation is the sample (n - 1) one, 0 for a single sample.
    Quartiles are linearly interpolated.
    """
    if len(dataset) == 0:
        raise EmptyDataset("Cannot summarize an empty dataset")
    described = dataset.to_frame().astype("float64").describe()
    described = described.fillna(0.0)
    return ReferenceStats(
        {
            name: FeatureStats(*(float(described.at[stat, name]) for stat in STAT_NAMES))
            for name in described.columns
        }
    )


def format_stats(stats: ReferenceStats) -> str:
    """Render statistics as a table, one row per statistic and one column per feature."""
    frame = pd.DataFrame(
        {name: stats[name].as_list() for name in stats.names}, index=STAT_NAMES
    )
    return frame.to_string(float_format=lambda x: f"{x:.2f}")
