"""Gateway errors, ingest summaries and JSON renderings of ledger transactions."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from glucoguard.common.errors import GlucoguardError
from glucoguard.common.integrity import hexlify
from glucoguard.detector.result import DetectionResult
from glucoguard.dosing.data import DoseEvent, DosingOutcome, Notification
from glucoguard.fog.data import Feature, RawReading, Source, VitalsSample
from glucoguard.fog.payload import decode_vitals_payload
from glucoguard.ledger.data import TransactionKind, TransactionRecord

__author__ = "glucoguard"


class GatewayError(GlucoguardError):
    """Base class for errors of the Health Information Unit."""


class AuthenticationFailed(GatewayError):
    """Unknown id, wrong key or blocked user."""


class NotAuthorized(GatewayError):
    """The policy list denied the interaction."""


class PatientNotFound(GatewayError):
    """No patient (or no pump) with the given id."""


class MalformedRequest(GatewayError):
    """Request body or parameters could not be understood."""


class BatchPending(GatewayError):
    """A batch of the patient is still waiting for miner approvals."""


class NoPendingBatch(GatewayError):
    """An approval was posted, but nothing of the patient is waiting for one."""


class InvalidApproval(GatewayError):
    """An interactive approval did not verify against the pending Merkle root."""


class ModelUnavailable(GatewayError):
    """No detection model is loaded."""


def _finite_or_none(value: float) -> Optional[float]:
    return value if math.isfinite(value) else None


def sample_to_dict(sample: VitalsSample) -> Dict[str, Any]:
    """Preprocessed sample as JSON, NaN stored-only features as null."""
    return {
        "glucose": sample.glucose,
        "systolic_bp": sample.systolic_bp,
        "heart_rate": sample.heart_rate,
        "sweating": sample.sweating,
        "shivering": sample.shivering,
        "diastolic_bp": _finite_or_none(sample.diastolic_bp),
        "body_temp": _finite_or_none(sample.body_temp),
        "timestamp": sample.timestamp,
    }


def transaction_to_dict(tx: TransactionRecord) -> Dict[str, Any]:
    """A transaction with its payload decoded according to its kind."""
    data: Dict[str, Any]
    if tx.kind is TransactionKind.VitalsData:
        data = sample_to_dict(decode_vitals_payload(tx.payload))
    elif tx.kind is TransactionKind.DetectionResult:
        data = DetectionResult.from_payload(tx.payload).to_dict()
    elif tx.kind is TransactionKind.DoseEvent:
        data = DoseEvent.from_payload(tx.patient_id, tx.created_at, tx.payload).to_dict()
    else:
        data = {"reader_id": hexlify(tx.payload)}
    return {
        "kind": tx.kind.name,
        "patient_id": hexlify(tx.patient_id),
        "created_at": tx.created_at,
        "data": data,
    }


def readings_from_json(patient_id: bytes, items: Sequence[Mapping[str, Any]]) -> List[RawReading]:
    """
    Parse the readings of an ingest body.

    Each item has feature, value, source and t, and optionally unit. Values are
    passed on as received, fog decides what is Missing.
    """
    res: List[RawReading] = []
    for pos, item in enumerate(items):
        try:
            feature = Feature(item["feature"])
            source = Source(item.get("source", Source.Manual.value))
            timestamp = item["t"]
            value = item.get("value")
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedRequest(f"Reading {pos}: {exc}") from exc
        if not isinstance(timestamp, int) or isinstance(timestamp, bool) or not 0 <= timestamp < 2 ** 32:
            raise MalformedRequest(f"Reading {pos}: t must be unsigned 32-bit seconds")
        if isinstance(value, (list, dict)):
            raise MalformedRequest(f"Reading {pos}: value must be a scalar")
        res.append(
            RawReading(
                patient_id=patient_id,
                source=source,
                feature=feature,
                value=value,
                timestamp=timestamp,
                unit=item.get("unit"),
            )
        )
    return res


@dataclass(frozen=True)
class IngestSummary:
    """
    What one ingest (or one approval completing a block) did.

    status is 'appended' when the blocks made it onto the chain, 'pending' when
    the pooled transactions wait for approvals with the given merkle_root.
    """

    status: str
    vitals_block: Optional[int] = None
    detection_block: Optional[int] = None
    samples: Tuple[VitalsSample, ...] = ()
    detections: Tuple[DetectionResult, ...] = ()
    outcomes: Tuple[DosingOutcome, ...] = ()
    merkle_root: Optional[bytes] = field(default=None, repr=False)
    approvals: int = 0

    @property
    def doses(self) -> List[DoseEvent]:
        return [o.dose for o in self.outcomes if o.dose is not None]

    @property
    def notifications(self) -> List[Notification]:
        return [n for o in self.outcomes for n in o.notifications]

    def to_dict(self) -> Dict[str, Any]:
        res: Dict[str, Any] = {
            "status": self.status,
            "block_index": self.vitals_block,
            "detection_block": self.detection_block,
            "detection": self.detections[-1].to_dict() if self.detections else None,
            "detections": [d.to_dict() for d in self.detections],
            "dose_summary": None,
            "notifications": [n.to_dict() for n in self.notifications],
        }
        if self.outcomes:
            last = self.outcomes[-1]
            res["dose_summary"] = {
                "doses": [d.to_dict() for d in self.doses],
                "phase": last.state.phase.value,
                **last.pump.to_dict(),
            }
        if self.merkle_root is not None:
            res["merkle_root"] = hexlify(self.merkle_root)
            res["approvals"] = self.approvals
        return res
