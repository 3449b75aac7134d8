"""
Synthetic vitals calibrated to the reference dataset description.

Glucose is a two part mixture. Hypoglycemic samples are 50 + 20*sqrt(U), a density
rising towards 70 mg/dl. The rest are 70 + a gamma tail clipped at 250 mg/dl, whose
density does not vanish just above the threshold. With the default mixture weight the
sample mean is about 95.7 mg/dl and the standard deviation about 43.7 mg/dl.

The base label is glucose < 70. Systolic pressure shifts up and the R-R interval
down during hypoglycemia; sweating and shivering are more likely. The final label
is the base label flipped with probability label_noise, so no classifier can be
expected to beat 1 - label_noise.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from glucoguard.datagen.dataset import Dataset, InvalidGeneratorConfig
from glucoguard.fog.stats import REFERENCE_STATS, ReferenceStats

__author__ = "glucoguard"

logger = logging.getLogger(__name__)

HYPO_THRESHOLD = 70.0


def _gamma_params(mean: float, std: float) -> Tuple[float, float]:
    """Shape and scale of the gamma distribution with the given moments."""
    return (mean / std) ** 2, std ** 2 / mean


@dataclass(frozen=True)
class Calibration:
    """Fitted distribution parameters. Marginal means land on the reference statistics."""

    # Base label prevalence; 0.4889 * 0.9 + 0.05 = 0.49 with the default noise
    hypo_fraction: float = 0.4889
    # Glucose above the threshold: pre-clip mean and std of the gamma tail
    tail_mean: float = 57.5
    tail_std: float = 45.0
    # Systolic: within-group std and the upward shift during hypoglycemia (mmHg)
    systolic_std: float = 7.44
    systolic_shift: float = 4.0
    # R-R interval: pre-clip mean, within-group std and the downward shift (ms)
    heart_rate_mean: float = 665.0
    heart_rate_std: float = 71.3
    heart_rate_shift: float = 20.0
    # P(symptom | hypo), P(symptom | no hypo); marginals 0.12 and 0.15
    sweating_p: Tuple[float, float] = (0.20, 0.0434)
    shivering_p: Tuple[float, float] = (0.25, 0.0543)


@dataclass(frozen=True)
class GeneratorConfig:
    n_samples: int = 16969
    seed: int = 42
    label_noise: float = 0.05
    target: ReferenceStats = field(default_factory=lambda: REFERENCE_STATS, compare=False)
    calibration: Calibration = Calibration()

    def validate(self) -> None:
        """Raise InvalidGeneratorConfig unless usable."""
        if self.n_samples < 0:
            raise InvalidGeneratorConfig(f"n_samples must be >= 0, got {self.n_samples}")
        if not 0.0 <= self.label_noise < 0.5:
            raise InvalidGeneratorConfig(
                f"label_noise must be in [0, 0.5), got {self.label_noise}"
            )
        if self.seed < 0:
            raise InvalidGeneratorConfig(f"seed must be unsigned, got {self.seed}")


def generate_dataset(config: GeneratorConfig) -> Dataset:
    """Draw a labeled dataset. Identical configs give identical datasets."""
    config.validate()
    n = config.n_samples
    cal = config.calibration
    target = config.target
    rng = np.random.default_rng(config.seed)

    base = rng.random(n) < cal.hypo_fraction
    glucose_min, glucose_max = target["glucose"].min, target["glucose"].max
    shape, scale = _gamma_params(cal.tail_mean, cal.tail_std)
    low = glucose_min + (HYPO_THRESHOLD - glucose_min) * np.sqrt(rng.random(n))
    high = HYPO_THRESHOLD + rng.gamma(shape, scale, n)
    glucose = np.clip(np.where(base, low, high), glucose_min, glucose_max)

    # shifts are centered so the marginal mean stays on the target
    p = cal.hypo_fraction
    systolic_mean = target["systolic_bp"].mean
    systolic_center = np.where(
        base,
        systolic_mean + (1 - p) * cal.systolic_shift,
        systolic_mean - p * cal.systolic_shift,
    )
    systolic = np.clip(
        systolic_center + rng.normal(0.0, cal.systolic_std, n),
        target["systolic_bp"].min,
        target["systolic_bp"].max,
    )
    heart_center = np.where(
        base,
        cal.heart_rate_mean - (1 - p) * cal.heart_rate_shift,
        cal.heart_rate_mean + p * cal.heart_rate_shift,
    )
    heart_rate = np.clip(
        heart_center + rng.normal(0.0, cal.heart_rate_std, n),
        target["heart_rate"].min,
        target["heart_rate"].max,
    )
    sweating = rng.random(n) < np.where(base, *cal.sweating_p)
    shivering = rng.random(n) < np.where(base, *cal.shivering_p)
    flip = rng.random(n) < config.label_noise

    X = np.column_stack(
        [glucose, systolic, heart_rate, sweating.astype(np.float64), shivering.astype(np.float64)]
    ).reshape(n, 5)
    y = np.logical_xor(glucose < HYPO_THRESHOLD, flip).astype(np.int64)
    logger.info(
        f"Generated {n} samples (seed {config.seed}, label noise {config.label_noise}), "
        f"{int(y.sum())} positive"
    )
    return Dataset(X=X, y=y)
