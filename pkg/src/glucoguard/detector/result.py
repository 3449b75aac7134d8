"""Detection results as stored on the ledger and handed to dosing."""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

from glucoguard.common.integrity import hexlify, sha256
from glucoguard.detector.forest import RandomForest, predict_proba
from glucoguard.detector.model_io import model_to_bytes
from glucoguard.fog.data import VitalsSample

__author__ = "glucoguard"

# probability, label, timestamp, model id
_DETECTION_PAYLOAD = struct.Struct(">dBI32s")
DETECTION_PAYLOAD_SIZE = _DETECTION_PAYLOAD.size


@dataclass(frozen=True)
class DetectionResult:
    probability: float
    label: int
    timestamp: int
    model_id: bytes = field(repr=False)
    patient_id: Optional[bytes] = field(default=None, repr=False)

    def to_payload(self) -> bytes:
        return _DETECTION_PAYLOAD.pack(self.probability, self.label, self.timestamp, self.model_id)

    @classmethod
    def from_payload(cls, data: bytes, patient_id: Optional[bytes] = None) -> DetectionResult:
        if len(data) != DETECTION_PAYLOAD_SIZE:
            raise ValueError(f"Detection payload must be {DETECTION_PAYLOAD_SIZE} bytes, got {len(data)}")
        probability, label, timestamp, model_id = _DETECTION_PAYLOAD.unpack(data)
        return cls(probability, label, timestamp, model_id, patient_id)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "probability": self.probability,
            "label": self.label,
            "timestamp": self.timestamp,
            "model_id": hexlify(self.model_id),
        }


def model_id(model: RandomForest) -> bytes:
    """SHA-256 of the serialized model."""
    return sha256(model_to_bytes(model))


def detect(
    model: RandomForest, sample: VitalsSample, threshold: float = 0.5, identifier: Optional[bytes] = None
) -> DetectionResult:
    """Classify one preprocessed sample."""
    probability = predict_proba(model, sample.features())
    return DetectionResult(
        probability=probability,
        label=int(probability >= threshold),
        timestamp=sample.timestamp,
        model_id=identifier if identifier is not None else model_id(model),
        patient_id=sample.patient_id,
    )
