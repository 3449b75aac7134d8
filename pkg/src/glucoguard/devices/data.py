"""Scenario scripts and simulation errors."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np

from glucoguard.common.errors import GlucoguardError
from glucoguard.identity.data import AgeClass

__author__ = "glucoguard"

GLUCOSE_RANGE = (20.0, 600.0)


class SimulationError(GlucoguardError):
    """Base class for simulation errors."""


class TimeReversal(SimulationError):
    """The virtual clock was asked to go backwards."""


class OutsideScenario(SimulationError):
    """A reading was requested outside the scripted duration."""


class ScenarioFormatError(SimulationError):
    """A scenario file does not describe a usable scenario."""


@dataclass(frozen=True)
class SymptomPolicy:
    """Probability of each symptom when glucose is below 70 mg/dl, and otherwise."""

    sweating: Tuple[float, float] = (0.20, 0.0434)
    shivering: Tuple[float, float] = (0.25, 0.0543)


@dataclass(frozen=True)
class ScenarioScript:
    """
    One simulated patient over a stretch of time.

    The glucose trajectory is piecewise linear between its (seconds, mg/dl) control
    points and flat before the first and after the last one.
    """

    name: str
    trajectory: Tuple[Tuple[int, float], ...]
    duration_s: int
    age_class: AgeClass = AgeClass.Adult
    interval_s: int = 300
    symptom_policy: SymptomPolicy = field(default_factory=SymptomPolicy)
    seed: int = 0
    kinetics_scale: float = 1.0
    noise_mg_dl: float = 2.0
    reservoir_ml: Optional[float] = None

    def validate(self) -> None:
        """Raise ScenarioFormatError unless usable."""
        if not self.trajectory:
            raise ScenarioFormatError(f"{self.name}: empty trajectory")
        times = [t for t, _ in self.trajectory]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ScenarioFormatError(f"{self.name}: trajectory times must be strictly increasing")
        low, high = GLUCOSE_RANGE
        for t, value in self.trajectory:
            if not low <= value <= high:
                raise ScenarioFormatError(f"{self.name}: glucose {value} at {t} s outside [{low}, {high}]")
        if self.interval_s < 1:
            raise ScenarioFormatError(f"{self.name}: interval_s must be >= 1")
        if self.duration_s < 0:
            raise ScenarioFormatError(f"{self.name}: duration_s must be >= 0")
        if self.seed < 0:
            raise ScenarioFormatError(f"{self.name}: seed must be unsigned")
        if self.kinetics_scale < 0 or self.noise_mg_dl < 0:
            raise ScenarioFormatError(f"{self.name}: kinetics_scale and noise_mg_dl must be >= 0")
        if self.reservoir_ml is not None and self.reservoir_ml < 0:
            raise ScenarioFormatError(f"{self.name}: reservoir_ml must be >= 0")
        for p in self.symptom_policy.sweating + self.symptom_policy.shivering:
            if not 0.0 <= p <= 1.0:
                raise ScenarioFormatError(f"{self.name}: symptom probability {p} outside [0, 1]")

    def glucose_at(self, t: float) -> float:
        """Scripted glucose at t seconds."""
        times = [p[0] for p in self.trajectory]
        values = [p[1] for p in self.trajectory]
        return float(np.interp(t, times, values))

    def to_dict(self) -> Dict[str, Any]:
        res: Dict[str, Any] = {
            "name": self.name,
            "profile": {"age_class": self.age_class.value},
            "interval_s": self.interval_s,
            "trajectory": [[t, v] for t, v in self.trajectory],
            "symptom_policy": {
                "sweating": list(self.symptom_policy.sweating),
                "shivering": list(self.symptom_policy.shivering),
            },
            "duration_s": self.duration_s,
            "seed": self.seed,
            "kinetics_scale": self.kinetics_scale,
            "noise_mg_dl": self.noise_mg_dl,
        }
        if self.reservoir_ml is not None:
            res["reservoir_ml"] = self.reservoir_ml
        return res
