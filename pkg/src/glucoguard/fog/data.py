"""Readings as received from devices, and the preprocessed samples the model sees."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple, Union

import numpy as np

from glucoguard.common.errors import GlucoguardError

__author__ = "glucoguard"


class FogError(GlucoguardError):
    """Base class for preprocessing errors."""


class NoReferenceMean(FogError):
    """Imputation needs a reference mean that the statistics do not have."""


class NonPositiveRate(FogError):
    """Heart rate must be positive to convert into an R-R interval."""


class Source(Enum):
    CGM = "CGM"
    Smartwatch = "Smartwatch"
    Manual = "Manual"


class Feature(Enum):
    """The seven collected features."""

    glucose = "glucose"
    diastolic_bp = "diastolic_bp"
    systolic_bp = "systolic_bp"
    heart_rate = "heart_rate"
    body_temp = "body_temp"
    sweating = "sweating"
    shivering = "shivering"


# The five features related to hypoglycemia, in model (and payload) order
MODEL_FEATURES: Tuple[Feature, ...] = (
    Feature.glucose,
    Feature.systolic_bp,
    Feature.heart_rate,
    Feature.sweating,
    Feature.shivering,
)
MODEL_FEATURE_NAMES: Tuple[str, ...] = tuple(f.value for f in MODEL_FEATURES)
BINARY_FEATURES = (Feature.sweating, Feature.shivering)

RawValue = Union[str, int, float, None]


@dataclass(frozen=True)
class RawReading:
    """
    One value from one device.

    Heart rate arrives in beats per minute unless unit is 'ms', in which case it
    already is an R-R interval and is not converted again.
    """

    patient_id: bytes = field(repr=False)
    source: Source
    feature: Feature
    value: RawValue
    timestamp: int
    unit: Optional[str] = None


@dataclass(frozen=True)
class VitalsSample:
    """
    A preprocessed observation.

    glucose in mg/dl, systolic_bp in mmHg, heart_rate as R-R interval in ms, sweating
    and shivering 0.0 or 1.0. Diastolic BP and body temperature are carried along
    for storage only, NaN when not reported.
    """

    glucose: float
    systolic_bp: float
    heart_rate: float
    sweating: float
    shivering: float
    timestamp: int = 0
    label: Optional[int] = None
    patient_id: Optional[bytes] = field(default=None, repr=False)
    diastolic_bp: float = math.nan
    body_temp: float = math.nan

    def features(self) -> np.ndarray:
        """The five model features as a float64 vector."""
        return np.array(
            [self.glucose, self.systolic_bp, self.heart_rate, self.sweating, self.shivering],
            dtype=np.float64,
        )

    def is_complete(self) -> bool:
        """True if all five model features are finite."""
        return bool(np.all(np.isfinite(self.features())))
