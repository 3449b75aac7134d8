"""Simulated CGM and smartwatch, and the glucose response to rescue doses."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from glucoguard.datagen.generator import HYPO_THRESHOLD, Calibration
from glucoguard.devices.clock import VirtualClock
from glucoguard.devices.data import GLUCOSE_RANGE, OutsideScenario, ScenarioScript
from glucoguard.fog.data import Feature, RawReading, Source
from glucoguard.fog.stats import REFERENCE_STATS
from glucoguard.identity.data import AgeClass

__author__ = "glucoguard"

logger = logging.getLogger(__name__)

# Full glucose increase of one dose (mg/dl), reached after the ramp
DOSE_EFFECT: Dict[AgeClass, float] = {
    AgeClass.Adult: 40.0,
    AgeClass.Child: 20.0,
}
RAMP_SECONDS = 15 * 60

# Vitals not modelled by the classifier, stored along for completeness
DIASTOLIC = (78.0, 6.0)
BODY_TEMP = (36.7, 0.3)


@dataclass
class GlucoseKinetics:
    """
    Toy response to injected glucose.

    Each dose raises glucose linearly from the dose time to its full increment
    RAMP_SECONDS later and holds it there. Doses add up.
    """

    scale: float = 1.0
    doses: List[Tuple[int, float]] = field(default_factory=list)

    def add_dose(self, t: int, age_class: AgeClass = AgeClass.Adult) -> None:
        self.doses.append((t, DOSE_EFFECT[age_class] * self.scale))

    def effect(self, t: float) -> float:
        """Total glucose increase at t seconds."""
        return float(sum(inc * np.clip((t - td) / RAMP_SECONDS, 0.0, 1.0) for td, inc in self.doses))


def next_reading(
    script: ScenarioScript,
    kinetics: GlucoseKinetics,
    clock: VirtualClock,
    rng: np.random.Generator,
    patient_id: bytes,
    calibration: Calibration = Calibration(),
) -> List[RawReading]:
    """
    All seven readings of the patient at the current simulated time.

    The values are drawn in a fixed order from rng, so a seeded generator gives the
    same readings every run. Heart rate is reported in beats per minute, the way a
    smartwatch does; the fog converts it.
    """
    now = clock.now
    if not 0 <= now <= script.duration_s:
        raise OutsideScenario(f"{script.name}: no readings at {now} s, the scenario covers 0-{script.duration_s} s")
    true_glucose = script.glucose_at(now) + kinetics.effect(now)
    glucose = float(np.clip(true_glucose + rng.normal(0.0, script.noise_mg_dl), *GLUCOSE_RANGE))
    hypo = true_glucose < HYPO_THRESHOLD

    systolic_stats = REFERENCE_STATS["systolic_bp"]
    shift = calibration.systolic_shift / 2 if hypo else -calibration.systolic_shift / 2
    systolic = float(
        np.clip(
            rng.normal(systolic_stats.mean + shift, calibration.systolic_std),
            systolic_stats.min,
            systolic_stats.max,
        )
    )
    rr_stats = REFERENCE_STATS["heart_rate"]
    rr_shift = -calibration.heart_rate_shift / 2 if hypo else calibration.heart_rate_shift / 2
    rr_center = calibration.heart_rate_mean + rr_shift
    rr = float(np.clip(rng.normal(rr_center, calibration.heart_rate_std), rr_stats.min, rr_stats.max))
    diastolic = float(rng.normal(*DIASTOLIC))
    body_temp = float(rng.normal(*BODY_TEMP))
    policy = script.symptom_policy
    sweating = int(rng.random() < policy.sweating[0 if hypo else 1])
    shivering = int(rng.random() < policy.shivering[0 if hypo else 1])

    def _reading(source: Source, feature: Feature, value: float) -> RawReading:
        return RawReading(patient_id=patient_id, source=source, feature=feature, value=value, timestamp=now)

    return [
        _reading(Source.CGM, Feature.glucose, glucose),
        _reading(Source.Smartwatch, Feature.systolic_bp, systolic),
        _reading(Source.Smartwatch, Feature.heart_rate, 60000.0 / rr),
        _reading(Source.Smartwatch, Feature.diastolic_bp, diastolic),
        _reading(Source.Smartwatch, Feature.body_temp, body_temp),
        _reading(Source.Smartwatch, Feature.sweating, sweating),
        _reading(Source.Smartwatch, Feature.shivering, shivering),
    ]
