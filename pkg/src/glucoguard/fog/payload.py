"""Canonical VitalsData transaction payload."""
import struct

from glucoguard.fog.data import VitalsSample

__author__ = "glucoguard"

# glucose, systolic_bp, heart_rate, sweating, shivering, timestamp, diastolic_bp, body_temp
_VITALS = struct.Struct(">5dI2d")
VITALS_PAYLOAD_SIZE = _VITALS.size


def encode_vitals_payload(sample: VitalsSample) -> bytes:
    """Five model features, timestamp, then the two stored-only features (NaN if not reported)."""
    return _VITALS.pack(
        sample.glucose,
        sample.systolic_bp,
        sample.heart_rate,
        sample.sweating,
        sample.shivering,
        sample.timestamp,
        sample.diastolic_bp,
        sample.body_temp,
    )


def decode_vitals_payload(data: bytes) -> VitalsSample:
    """Inverse of encode_vitals_payload."""
    if len(data) != VITALS_PAYLOAD_SIZE:
        raise ValueError(f"Vitals payload must be {VITALS_PAYLOAD_SIZE} bytes, got {len(data)}")
    glucose, systolic, heart_rate, sweating, shivering, ts, diastolic, body_temp = _VITALS.unpack(data)
    return VitalsSample(
        glucose=glucose,
        systolic_bp=systolic,
        heart_rate=heart_rate,
        sweating=sweating,
        shivering=shivering,
        timestamp=ts,
        diastolic_bp=diastolic,
        body_temp=body_temp,
    )
