"""Fog preprocessing: numeric coercion, imputation and heart rate conversion."""
from __future__ import annotations

import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

from glucoguard.common.integrity import hexlify
from glucoguard.fog.data import (
    BINARY_FEATURES,
    MODEL_FEATURES,
    Feature,
    NoReferenceMean,
    NonPositiveRate,
    RawReading,
    RawValue,
    Source,
    VitalsSample,
)
from glucoguard.fog.stats import REFERENCE_STATS, ReferenceStats

__author__ = "glucoguard"

logger = logging.getLogger(__name__)

# Physical plausibility, wide enough to never clip the reference ranges
PLAUSIBLE: Dict[Feature, Tuple[float, float]] = {
    Feature.glucose: (20.0, 600.0),
    Feature.systolic_bp: (60.0, 250.0),
    Feature.diastolic_bp: (30.0, 150.0),
    Feature.body_temp: (30.0, 45.0),
    # beats per minute
    Feature.heart_rate: (25.0, 250.0),
}
# R-R interval in ms for the same heart rate bounds
PLAUSIBLE_RR_MS = (60000.0 / 250.0, 60000.0 / 25.0)

# Missing is represented by None
PartialSample = Dict[Feature, Optional[float]]


def _parse(value: RawValue) -> Optional[float]:
    if value is None or isinstance(value, bool):
        return None
    try:
        res = float(value.strip() if isinstance(value, str) else value)
    except (TypeError, ValueError, OverflowError):
        return None
    if not math.isfinite(res):
        return None
    return res


def coerce_numeric(raw: RawReading) -> Optional[float]:
    """
    Turn a received value into a finite float, or None for Missing.

    Non-numeric, non-finite and physically implausible values are Missing.
    Binary features must be exactly 0 or 1.
    """
    res = _parse(raw.value)
    if res is None:
        return None
    if raw.feature in BINARY_FEATURES:
        return res if res in (0.0, 1.0) else None
    if raw.feature is Feature.heart_rate and raw.unit == "ms":
        low, high = PLAUSIBLE_RR_MS
    else:
        low, high = PLAUSIBLE[raw.feature]
    if not low <= res <= high:
        return None
    return res


def convert_heart_rate(rate_bpm: float) -> float:
    """Beats per minute to mean R-R interval in milliseconds."""
    if not rate_bpm > 0:
        raise NonPositiveRate(f"Heart rate must be positive, got {rate_bpm}")
    return 60000.0 / rate_bpm


def impute(
    samples: Sequence[PartialSample], stats: ReferenceStats = REFERENCE_STATS
) -> List[Dict[Feature, float]]:
    """
    Fill in Missing model features.

    Continuous features get the reference mean, binary features get 0 (the mode).
    """
    res: List[Dict[Feature, float]] = []
    for sample in samples:
        filled: Dict[Feature, float] = {}
        for feature in MODEL_FEATURES:
            value = sample.get(feature)
            if value is None:
                if feature in BINARY_FEATURES:
                    value = 0.0
                elif feature.value in stats:
                    value = stats.mean(feature.value)
                else:
                    raise NoReferenceMean(f"No reference mean for {feature.value}")
            filled[feature] = value
        res.append(filled)
    return res


def preprocess_batch(
    raw: Sequence[RawReading], stats: ReferenceStats = REFERENCE_STATS
) -> List[VitalsSample]:
    """
    Group readings per patient and timestamp into complete samples.

    Groups keep the order they are first seen in. When a feature is reported more
    than once in a group, the last reading wins.
    """
    groups: Dict[Tuple[bytes, int], PartialSample] = {}
    for reading in raw:
        group = groups.setdefault((reading.patient_id, reading.timestamp), {})
        value = coerce_numeric(reading)
        if (
            value is not None
            and reading.feature is Feature.heart_rate
            and reading.unit != "ms"
        ):
            value = convert_heart_rate(value)
        group[reading.feature] = value

    partial = list(groups.values())
    filled = impute(partial, stats)
    res: List[VitalsSample] = []
    for (patient_id, timestamp), before, after in zip(groups.keys(), partial, filled):
        missing = [f.value for f in MODEL_FEATURES if before.get(f) is None]
        if missing:
            logger.info(
                f"FOG: Imputed {', '.join(missing)} for {hexlify(patient_id)[:16]} at {timestamp}"
            )
        diastolic = before.get(Feature.diastolic_bp)
        body_temp = before.get(Feature.body_temp)
        res.append(
            VitalsSample(
                glucose=after[Feature.glucose],
                systolic_bp=after[Feature.systolic_bp],
                heart_rate=after[Feature.heart_rate],
                sweating=after[Feature.sweating],
                shivering=after[Feature.shivering],
                timestamp=timestamp,
                patient_id=patient_id,
                diastolic_bp=math.nan if diastolic is None else diastolic,
                body_temp=math.nan if body_temp is None else body_temp,
            )
        )
    logger.debug(f"FOG: {len(raw)} readings preprocessed into {len(res)} samples")
    return res


def readings_from_sample(
    sample: VitalsSample, patient_id: bytes, source: Source = Source.Manual
) -> List[RawReading]:
    """Readings that preprocess back into the same sample (heart rate given in ms)."""
    values = [
        (Feature.glucose, sample.glucose, None),
        (Feature.systolic_bp, sample.systolic_bp, None),
        (Feature.heart_rate, sample.heart_rate, "ms"),
        (Feature.sweating, sample.sweating, None),
        (Feature.shivering, sample.shivering, None),
    ]
    if math.isfinite(sample.diastolic_bp):
        values.append((Feature.diastolic_bp, sample.diastolic_bp, None))
    if math.isfinite(sample.body_temp):
        values.append((Feature.body_temp, sample.body_temp, None))
    return [
        RawReading(
            patient_id=patient_id,
            source=source,
            feature=feature,
            value=value,
            timestamp=sample.timestamp,
            unit=unit,
        )
        for feature, value, unit in values
    ]
