"""Rescue dosing data classes: dose presets, pump state, phases, doses and notifications."""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Mapping, NamedTuple, Optional, Tuple

from glucoguard.common.errors import GlucoguardError
from glucoguard.common.integrity import hexlify
from glucoguard.identity.data import AgeClass

__author__ = "glucoguard"

_DOSE_PAYLOAD = struct.Struct(">BII")


class DosingError(GlucoguardError):
    """Base class for dosing errors."""


class InsufficientReservoir(DosingError):
    """The reservoir holds less than the requested volume. No partial doses."""


class RecheckTooEarly(DosingError):
    """Recheck before its due time."""


class IllegalTransition(DosingError):
    """Event not valid in the current phase."""


class DosePreset(NamedTuple):
    volume_ul: int
    mass_mg: float


DOSE_PRESETS: Dict[AgeClass, DosePreset] = {
    AgeClass.Adult: DosePreset(volume_ul=200, mass_mg=1.0),
    AgeClass.Child: DosePreset(volume_ul=100, mass_mg=0.5),
}


def ml_to_ul(volume_ml: float) -> int:
    """Volumes are kept in whole microliters so reservoir accounting is exact."""
    return int(round(volume_ml * 1000))


def ul_to_ml(volume_ul: int) -> float:
    return volume_ul / 1000


@dataclass(frozen=True)
class PatientProfile:
    patient_id: bytes
    age_class: AgeClass = AgeClass.Adult

    @property
    def dose(self) -> DosePreset:
        return DOSE_PRESETS[self.age_class]


@dataclass(frozen=True)
class PumpState:
    """
    Reservoir of a rescue pump.

    `refill_armed' is cleared when a refill alert has been sent and set again by a refill,
    so the alert fires once per crossing of the refill threshold.
    """

    reservoir_ul: int
    dose_volume_ul: int
    last_dispense: Optional[int] = None
    refill_armed: bool = True

    @property
    def doses_remaining(self) -> int:
        return self.reservoir_ul // self.dose_volume_ul

    @property
    def reservoir_ml(self) -> float:
        return ul_to_ml(self.reservoir_ul)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "reservoir_ml": self.reservoir_ml,
            "doses_remaining": self.doses_remaining,
            "dose_volume_ml": ul_to_ml(self.dose_volume_ul),
            "last_dispense": self.last_dispense,
        }


class Phase(Enum):
    """
    Rescue protocol phase of one patient.

    FirstDoseGiven and Resolved are passed through during a transition, a stored
    state is Idle, AwaitingRecheck, ReservoirEmpty or Escalated.

    A dose that empties the reservoir still leaves the patient AwaitingRecheck,
    since the recheck decides whether another dose is needed. ReservoirEmpty is
    only entered when a dose is due and cannot be given. Pump status reports the
    empty reservoir in the meantime.
    """

    Idle = "Idle"
    FirstDoseGiven = "FirstDoseGiven"
    AwaitingRecheck = "AwaitingRecheck"
    Resolved = "Resolved"
    ReservoirEmpty = "ReservoirEmpty"
    Escalated = "Escalated"


@dataclass(frozen=True)
class DosingState:
    phase: Phase = Phase.Idle
    # recheck due time, set in AwaitingRecheck and Escalated
    due: Optional[int] = None
    # dose cycles in the current episode
    cycles: int = 0


@dataclass(frozen=True)
class DoseEvent:
    patient_id: bytes = field(repr=False)
    volume_ul: int
    ordinal: int
    timestamp: int
    reservoir_after_ul: int

    @property
    def volume_ml(self) -> float:
        return ul_to_ml(self.volume_ul)

    def to_payload(self) -> bytes:
        """Ledger payload: ordinal || volume in microliters || reservoir after, in microliters."""
        return _DOSE_PAYLOAD.pack(self.ordinal, self.volume_ul, self.reservoir_after_ul)

    @classmethod
    def from_payload(cls, patient_id: bytes, timestamp: int, data: bytes) -> DoseEvent:
        if len(data) != _DOSE_PAYLOAD.size:
            raise ValueError(f"Dose payload must be {_DOSE_PAYLOAD.size} bytes, got {len(data)}")
        ordinal, volume_ul, reservoir_after_ul = _DOSE_PAYLOAD.unpack(data)
        return cls(patient_id, volume_ul, ordinal, timestamp, reservoir_after_ul)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "patient_id": hexlify(self.patient_id),
            "volume_ml": self.volume_ml,
            "ordinal": self.ordinal,
            "timestamp": self.timestamp,
            "reservoir_after_ml": ul_to_ml(self.reservoir_after_ul),
        }


class NotificationKind(Enum):
    HypoAlert = "HypoAlert"
    RepeatDose = "RepeatDose"
    Resolved = "Resolved"
    RefillAlert = "RefillAlert"
    ReservoirEmpty = "ReservoirEmpty"
    Escalation = "Escalation"


class Severity(Enum):
    Info = "Info"
    Warning = "Warning"
    Critical = "Critical"


# Who is notified is not settled, so both the patient and the caregivers are
RECIPIENTS = ("patient", "caregiver")


@dataclass(frozen=True)
class Notification:
    patient_id: bytes = field(repr=False)
    kind: NotificationKind
    severity: Severity
    timestamp: int
    details: Mapping[str, Any] = field(default_factory=dict)
    recipients: Tuple[str, ...] = RECIPIENTS

    def to_dict(self) -> Dict[str, Any]:
        return {
            "patient_id": hexlify(self.patient_id),
            "kind": self.kind.value,
            "severity": self.severity.value,
            "timestamp": self.timestamp,
            "recipients": list(self.recipients),
            "details": dict(self.details),
        }


class NoActionReason(Enum):
    AlreadyInCycle = "AlreadyInCycle"
    ReservoirEmpty = "ReservoirEmpty"
    Escalated = "Escalated"


@dataclass(frozen=True)
class NoAction:
    reason: NoActionReason


@dataclass(frozen=True)
class DosingOutcome:
    """Result of one protocol event. `phase' is the phase passed through, `state' what is stored."""

    state: DosingState
    pump: PumpState
    phase: Phase
    dose: Optional[DoseEvent] = None
    notifications: Tuple[Notification, ...] = ()
    no_action: Optional[NoAction] = None
