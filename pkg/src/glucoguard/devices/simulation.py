"""
Closed loop simulation.

A scenario's patient wears a CGM and a smartwatch. Every sampling tick the readings
go through the gateway service exactly as an HTTP ingest would, and the detections,
doses and notifications that come back are written to an event log. Doses feed the
glucose kinetics, so they show up in later readings.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from glucoguard.common.config_misc import DosingPolicy
from glucoguard.common.errors import GlucoguardError
from glucoguard.common.integrity import checksum_bytes2str, hexlify
from glucoguard.detector.forest import RandomForest
from glucoguard.devices.clock import VirtualClock
from glucoguard.devices.data import ScenarioScript
from glucoguard.devices.sensors import GlucoseKinetics, next_reading
from glucoguard.dosing.controller import DosingController
from glucoguard.dosing.data import PatientProfile
from glucoguard.gateway.notify import Notifier
from glucoguard.gateway.service import GlucoguardService
from glucoguard.identity.data import LinkedCredentials, Profile, RegistrationRequest, Role
from glucoguard.identity.registry import Registry
from glucoguard.ledger.chain import Ledger

__author__ = "glucoguard"

logger = logging.getLogger(__name__)

TICK = "tick"


@dataclass(frozen=True)
class LogEntry:
    t: int
    type: str
    payload: Dict[str, Any]

    def to_dict(self) -> Dict[str, Any]:
        return {"t": self.t, "type": self.type, "payload": self.payload}


@dataclass
class EventLog:
    """Everything that happened during a simulation, in order."""

    entries: List[LogEntry] = field(default_factory=list)

    def add(self, t: int, type_: str, payload: Optional[Dict[str, Any]] = None) -> None:
        self.entries.append(LogEntry(t, type_, payload or {}))

    def of_type(self, type_: str) -> List[LogEntry]:
        return [e for e in self.entries if e.type == type_]

    def __len__(self) -> int:
        return len(self.entries)

    def to_jsonl(self) -> str:
        return "".join(json.dumps(e.to_dict(), sort_keys=True) + "\n" for e in self.entries)

    def write(self, path: str) -> None:
        data = self.to_jsonl().encode()
        with open(path, "wb") as fd:
            fd.write(data)
        logger.info(f"Wrote {len(self.entries)} events to {path} {checksum_bytes2str(data)}")


@dataclass
class SimulatedSystem:
    """A complete in-process system with one patient and the patient's doctor."""

    service: GlucoguardService
    clock: VirtualClock
    patient_id: bytes
    patient_key: bytes
    doctor_id: bytes


def fresh_system(
    script: ScenarioScript,
    model: Optional[RandomForest],
    policy: Optional[DosingPolicy] = None,
    notifier: Optional[Notifier] = None,
) -> SimulatedSystem:
    """
    Build a system for one scenario run.

    Identities are derived from the scenario seed, and the ledger is stamped by the
    simulated clock, so two runs of the same scenario produce identical chains.
    """
    clock = VirtualClock()
    registry = Registry(seed=script.seed)
    ledger = Ledger(directory=registry, clock=clock)
    controller = DosingController(policy or DosingPolicy())
    service = GlucoguardService(registry, ledger, controller, model=model, notifier=notifier, clock=clock)
    patient_id, patient_key = registry.register(
        RegistrationRequest(
            role=Role.Patient,
            profile=Profile(name="Simulated patient", date_of_birth="1980-01-01", email="patient@sim.invalid"),
            age_class=script.age_class,
        )
    )
    service.add_patient(PatientProfile(patient_id, script.age_class), reservoir_ml=script.reservoir_ml)
    doctor_id, _ = registry.register(
        RegistrationRequest(
            role=Role.Doctor,
            profile=Profile(name="Simulated doctor", date_of_birth="1970-01-01", email="doctor@sim.invalid"),
            qualification="MD",
            job_details="Endocrinology",
            linked=(LinkedCredentials(patient_id, patient_key),),
        )
    )
    return SimulatedSystem(service, clock, patient_id, patient_key, doctor_id)


def run_scenario(script: ScenarioScript, system: SimulatedSystem) -> EventLog:
    """
    Drive a system through a scenario, one sampling tick at a time.

    An error ends the run with an 'error' entry. A run that completes ends with an
    'end' entry holding the final pump status.
    """
    script.validate()
    clock = system.clock
    service = system.service
    patient_id = system.patient_id
    rng = np.random.default_rng(script.seed)
    kinetics = GlucoseKinetics(scale=script.kinetics_scale)
    log = EventLog()

    for t in range(clock.now, script.duration_s + 1, script.interval_s):
        clock.schedule(t, TICK)
    logger.info(f"Simulating {script.name} for patient {hexlify(patient_id)[:16]}: {len(clock)} ticks")

    while clock.next_due is not None:
        for _event in clock.advance(clock.next_due):
            now = clock.now
            try:
                readings = next_reading(script, kinetics, clock, rng, patient_id)
                log.add(now, "reading", {r.feature.value: r.value for r in readings})
                summary = service.ingest(patient_id, patient_id, readings)
            except GlucoguardError as exc:
                logger.error(f"Simulation of {script.name} stopped at {now} s: {exc}")
                log.add(now, "error", {"error": type(exc).__name__, "message": str(exc)})
                return log
            log.add(now, "ingest", {"vitals_block": summary.vitals_block, "detection_block": summary.detection_block})
            for detection in summary.detections:
                log.add(detection.timestamp, "detection", detection.to_dict())
            for outcome in summary.outcomes:
                payload: Dict[str, Any] = {"phase": outcome.phase.value, "state": outcome.state.phase.value}
                if outcome.no_action is not None:
                    payload["no_action"] = outcome.no_action.reason.value
                log.add(now, "phase", payload)
                if outcome.dose is not None:
                    kinetics.add_dose(outcome.dose.timestamp, script.age_class)
                    log.add(outcome.dose.timestamp, "dose", outcome.dose.to_dict())
                for notification in outcome.notifications:
                    log.add(notification.timestamp, "notification", notification.to_dict())

    log.add(clock.now, "end", service.controller.status(patient_id))
    return log
