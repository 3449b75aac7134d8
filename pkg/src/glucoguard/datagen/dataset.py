"""Labeled datasets of the five model features, and their CSV form."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

from glucoguard.common.errors import GlucoguardError
from glucoguard.common.integrity import checksum_bytes2str
from glucoguard.fog.data import MODEL_FEATURE_NAMES, VitalsSample

__author__ = "glucoguard"

logger = logging.getLogger(__name__)

LABEL_NAME = "hypoglycemia"
CSV_COLUMNS = list(MODEL_FEATURE_NAMES) + [LABEL_NAME]


class DatagenError(GlucoguardError):
    """Base class for dataset errors."""


class InvalidGeneratorConfig(DatagenError):
    """Generator parameters out of range."""


class EmptyDataset(DatagenError):
    """Statistics over zero samples."""


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    Feature matrix X (n, 5) in model feature order and labels y (n,) of 0/1.

    Use `equals' for comparisons, numpy arrays do not support ==.
    """

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        """Check shapes."""
        if self.X.ndim != 2 or self.X.shape[1] != len(MODEL_FEATURE_NAMES):
            raise DatagenError(f"Feature matrix must have shape (n, 5), got {self.X.shape}")
        if self.y.shape != (self.X.shape[0],):
            raise DatagenError(f"Label vector shape {self.y.shape} does not match {self.X.shape}")

    def __len__(self) -> int:
        return int(self.X.shape[0])

    def equals(self, other: Dataset) -> bool:
        """Exact equality of features and labels."""
        return np.array_equal(self.X, other.X) and np.array_equal(self.y, other.y)

    def subset(self, idx: np.ndarray) -> Dataset:
        """Rows at the given indices."""
        return Dataset(X=self.X[idx], y=self.y[idx])

    def to_frame(self) -> pd.DataFrame:
        """DataFrame with the CSV columns."""
        frame = pd.DataFrame(self.X, columns=list(MODEL_FEATURE_NAMES))
        frame[LABEL_NAME] = self.y.astype(np.int64)
        return frame

    def to_samples(self, start_timestamp: int = 0, step: int = 0) -> List[VitalsSample]:
        """Labeled VitalsSample objects."""
        return [
            VitalsSample(
                glucose=float(row[0]),
                systolic_bp=float(row[1]),
                heart_rate=float(row[2]),
                sweating=float(row[3]),
                shivering=float(row[4]),
                timestamp=start_timestamp + i * step,
                label=int(label),
            )
            for i, (row, label) in enumerate(zip(self.X, self.y))
        ]

    @classmethod
    def from_samples(cls, samples: Sequence[VitalsSample]) -> Dataset:
        """Build a dataset from labeled samples."""
        if any(s.label is None for s in samples):
            raise DatagenError("All samples must be labeled")
        X = np.array([s.features() for s in samples], dtype=np.float64).reshape(-1, 5)
        y = np.array([s.label for s in samples], dtype=np.int64)
        return cls(X=X, y=y)

    @classmethod
    def empty(cls) -> Dataset:
        """Dataset without rows."""
        return cls(X=np.zeros((0, 5), dtype=np.float64), y=np.zeros(0, dtype=np.int64))


def write_csv(dataset: Dataset, path: Optional[str] = None) -> str:
    """Write (or just render, without a path) the dataset as CSV with 6 significant digits."""
    data = dataset.to_frame().to_csv(index=False, float_format="%.6g", lineterminator="\n")
    if path is not None:
        with open(path, "w") as fd:
            fd.write(data)
        logger.info(
            f"Wrote {len(dataset)} samples to file {path} {checksum_bytes2str(data.encode())}"
        )
    return data


def read_csv(path: str) -> Dataset:
    """Read a dataset written by write_csv."""
    frame = pd.read_csv(path)
    if list(frame.columns) != CSV_COLUMNS:
        raise DatagenError(
            f"Unexpected CSV header {list(frame.columns)}, expected {CSV_COLUMNS}"
        )
    if frame.isna().any().any():
        raise DatagenError(f"Missing values in {path}")
    y = frame[LABEL_NAME].to_numpy()
    if not np.isin(y, [0, 1]).all():
        raise DatagenError(f"Labels in {path} must be 0 or 1")
    return Dataset(
        X=frame[list(MODEL_FEATURE_NAMES)].to_numpy(dtype=np.float64),
        y=y.astype(np.int64),
    )
