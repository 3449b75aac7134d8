"""
Rescue protocol state machine.

A positive detection in Idle dispenses the first dose and schedules a recheck
recheck_minutes later. A recheck below the hypoglycemia threshold dispenses another
dose and schedules the next recheck; at or above it the episode is resolved. After
max_cycles doses the patient is escalated and no more doses are given until a
recheck resolves.

The functions here are pure, DosingController keeps the per-patient state.
"""
from __future__ import annotations

import logging
import threading
from dataclasses import replace
from typing import Any, Dict, List, Mapping, Optional, Tuple

from glucoguard.common.config_misc import DosingPolicy
from glucoguard.common.integrity import hexlify
from glucoguard.dosing.data import (
    DoseEvent,
    DosingError,
    DosingOutcome,
    DosingState,
    IllegalTransition,
    InsufficientReservoir,
    NoAction,
    NoActionReason,
    Notification,
    NotificationKind,
    PatientProfile,
    Phase,
    PumpState,
    RecheckTooEarly,
    Severity,
    ml_to_ul,
)

__author__ = "glucoguard"

logger = logging.getLogger(__name__)


def dispense(pump: PumpState, volume_ul: int, now: int) -> PumpState:
    """Take exactly volume_ul from the reservoir."""
    if volume_ul <= 0:
        raise DosingError(f"Dose volume must be positive, got {volume_ul} ul")
    if pump.reservoir_ul < volume_ul:
        raise InsufficientReservoir(
            f"Reservoir holds {pump.reservoir_ul} ul, cannot dispense {volume_ul} ul"
        )
    return replace(pump, reservoir_ul=pump.reservoir_ul - volume_ul, last_dispense=now)


def refill_check(pump: PumpState, refill_alert_doses: int = 5) -> Tuple[PumpState, bool]:
    """Returns True the first time doses_remaining is at or below the alert level, until a refill."""
    if pump.refill_armed and pump.doses_remaining <= refill_alert_doses:
        return replace(pump, refill_armed=False), True
    return pump, False


def refill(pump: PumpState, volume_ul: int) -> PumpState:
    """Add volume to the reservoir and re-arm the refill alert."""
    if volume_ul <= 0:
        raise DosingError(f"Refill volume must be positive, got {volume_ul} ul")
    return replace(pump, reservoir_ul=pump.reservoir_ul + volume_ul, refill_armed=True)


def _pump_details(pump: PumpState) -> Dict[str, Any]:
    return {"reservoir_ml": pump.reservoir_ml, "doses_remaining": pump.doses_remaining}


def _empty(
    state: DosingState, profile: PatientProfile, pump: PumpState, now: int
) -> DosingOutcome:
    notification = Notification(
        profile.patient_id,
        NotificationKind.ReservoirEmpty,
        Severity.Critical,
        now,
        _pump_details(pump),
    )
    logger.warning(f"DOSING: Reservoir of patient {hexlify(profile.patient_id)} is empty, no dose given")
    return DosingOutcome(
        state=DosingState(Phase.ReservoirEmpty, None, state.cycles),
        pump=pump,
        phase=Phase.ReservoirEmpty,
        notifications=(notification,),
    )


def _give_dose(
    state: DosingState,
    profile: PatientProfile,
    pump: PumpState,
    now: int,
    policy: DosingPolicy,
    kind: NotificationKind,
    details: Mapping[str, Any],
) -> DosingOutcome:
    volume_ul = profile.dose.volume_ul
    try:
        pump = dispense(pump, volume_ul, now)
    except InsufficientReservoir:
        return _empty(state, profile, pump, now)
    ordinal = state.cycles + 1
    dose = DoseEvent(profile.patient_id, volume_ul, ordinal, now, pump.reservoir_ul)
    notifications: List[Notification] = [
        Notification(
            profile.patient_id,
            kind,
            Severity.Warning,
            now,
            {**details, "dose_ml": dose.volume_ml, "dose_mg": profile.dose.mass_mg, **_pump_details(pump)},
        )
    ]
    pump, alert = refill_check(pump, policy.refill_alert_doses)
    if alert:
        notifications.append(
            Notification(profile.patient_id, NotificationKind.RefillAlert, Severity.Warning, now, _pump_details(pump))
        )
    if pump.doses_remaining == 0:
        notifications.append(
            Notification(
                profile.patient_id, NotificationKind.ReservoirEmpty, Severity.Critical, now, _pump_details(pump)
            )
        )
    logger.info(
        f"DOSING: Dose {ordinal} of {dose.volume_ml} ml to patient {hexlify(profile.patient_id)}, "
        f"{pump.reservoir_ml} ml left"
    )
    return DosingOutcome(
        state=DosingState(Phase.AwaitingRecheck, now + policy.recheck_minutes * 60, ordinal),
        pump=pump,
        phase=Phase.FirstDoseGiven,
        dose=dose,
        notifications=tuple(notifications),
    )


def on_detection(
    state: DosingState,
    profile: PatientProfile,
    pump: PumpState,
    now: int,
    policy: DosingPolicy = DosingPolicy(),
    vitals: Optional[Mapping[str, Any]] = None,
) -> DosingOutcome:
    """Positive detection: first dose when Idle, otherwise no action."""
    if state.phase is not Phase.Idle:
        reason = {
            Phase.ReservoirEmpty: NoActionReason.ReservoirEmpty,
            Phase.Escalated: NoActionReason.Escalated,
        }.get(state.phase, NoActionReason.AlreadyInCycle)
        logger.debug(f"DOSING: Detection for patient {hexlify(profile.patient_id)} ignored ({reason.value})")
        return DosingOutcome(state=state, pump=pump, phase=state.phase, no_action=NoAction(reason))
    details = {"vitals": dict(vitals or {})}
    return _give_dose(DosingState(), profile, pump, now, policy, NotificationKind.HypoAlert, details)


def on_recheck(
    state: DosingState,
    glucose: float,
    profile: PatientProfile,
    pump: PumpState,
    now: int,
    policy: DosingPolicy = DosingPolicy(),
) -> DosingOutcome:
    """
    Recheck at or after the due time.

    Glucose exactly at the threshold resolves the episode.
    """
    if state.phase not in (Phase.AwaitingRecheck, Phase.Escalated) or state.due is None:
        raise IllegalTransition(f"No recheck pending in phase {state.phase.value}")
    if now < state.due:
        raise RecheckTooEarly(f"Recheck due at {state.due}, now is {now}")
    if glucose >= policy.hypo_threshold:
        notification = Notification(
            profile.patient_id, NotificationKind.Resolved, Severity.Info, now, {"glucose": glucose}
        )
        logger.info(f"DOSING: Patient {hexlify(profile.patient_id)} resolved at {glucose} mg/dl")
        return DosingOutcome(state=DosingState(), pump=pump, phase=Phase.Resolved, notifications=(notification,))
    if state.phase is Phase.Escalated:
        return DosingOutcome(
            state=replace(state, due=now + policy.recheck_minutes * 60), pump=pump, phase=Phase.Escalated
        )
    if state.cycles >= policy.max_cycles:
        notification = Notification(
            profile.patient_id,
            NotificationKind.Escalation,
            Severity.Critical,
            now,
            {"glucose": glucose, "doses_given": state.cycles},
        )
        logger.warning(
            f"DOSING: Patient {hexlify(profile.patient_id)} still at {glucose} mg/dl after {state.cycles} doses, "
            "escalating"
        )
        return DosingOutcome(
            state=DosingState(Phase.Escalated, now + policy.recheck_minutes * 60, state.cycles),
            pump=pump,
            phase=Phase.Escalated,
            notifications=(notification,),
        )
    return _give_dose(state, profile, pump, now, policy, NotificationKind.RepeatDose, {"glucose": glucose})


class DosingController:
    """Rescue protocol state and rescue pump of every known patient."""

    def __init__(self, policy: DosingPolicy = DosingPolicy()):
        """Initialise an empty controller."""
        self.policy = policy
        self._profiles: Dict[bytes, PatientProfile] = {}
        self._states: Dict[bytes, DosingState] = {}
        self._pumps: Dict[bytes, PumpState] = {}
        self._lock = threading.Lock()

    def add_patient(self, profile: PatientProfile, reservoir_ml: Optional[float] = None) -> PumpState:
        """Attach a pump filled with reservoir_ml (the configured volume by default)."""
        if reservoir_ml is None:
            reservoir_ml = self.policy.reservoir_ml
        pump = PumpState(reservoir_ul=ml_to_ul(reservoir_ml), dose_volume_ul=profile.dose.volume_ul)
        with self._lock:
            self._profiles[profile.patient_id] = profile
            self._states[profile.patient_id] = DosingState()
            self._pumps[profile.patient_id] = pump
        logger.info(
            f"DOSING: Pump for patient {hexlify(profile.patient_id)} ({profile.age_class.value}) "
            f"holds {pump.reservoir_ml} ml"
        )
        return pump

    def __contains__(self, patient_id: bytes) -> bool:
        return patient_id in self._profiles

    def _get(self, patient_id: bytes) -> Tuple[PatientProfile, DosingState, PumpState]:
        if patient_id not in self._profiles:
            raise DosingError(f"No pump for patient {hexlify(patient_id)}")
        return self._profiles[patient_id], self._states[patient_id], self._pumps[patient_id]

    def _store(self, patient_id: bytes, outcome: DosingOutcome) -> DosingOutcome:
        self._states[patient_id] = outcome.state
        self._pumps[patient_id] = outcome.pump
        return outcome

    def state(self, patient_id: bytes) -> DosingState:
        with self._lock:
            return self._get(patient_id)[1]

    def pump(self, patient_id: bytes) -> PumpState:
        with self._lock:
            return self._get(patient_id)[2]

    def snapshot(self, patient_id: bytes) -> Tuple[DosingState, PumpState]:
        """Protocol state and pump of a patient, to be put back with restore()."""
        with self._lock:
            _, state, pump = self._get(patient_id)
            return state, pump

    def restore(self, patient_id: bytes, snapshot: Tuple[DosingState, PumpState]) -> None:
        with self._lock:
            self._get(patient_id)
            self._states[patient_id], self._pumps[patient_id] = snapshot

    def recheck_due(self, patient_id: bytes) -> Optional[int]:
        return self.state(patient_id).due

    def detection(
        self, patient_id: bytes, now: int, vitals: Optional[Mapping[str, Any]] = None
    ) -> DosingOutcome:
        with self._lock:
            profile, state, pump = self._get(patient_id)
            return self._store(patient_id, on_detection(state, profile, pump, now, self.policy, vitals))

    def recheck(self, patient_id: bytes, glucose: float, now: int) -> DosingOutcome:
        with self._lock:
            profile, state, pump = self._get(patient_id)
            return self._store(patient_id, on_recheck(state, glucose, profile, pump, now, self.policy))

    def refill(self, patient_id: bytes, volume_ml: float) -> PumpState:
        """Refill the pump. A ReservoirEmpty patient returns to Idle."""
        with self._lock:
            profile, state, pump = self._get(patient_id)
            pump = refill(pump, ml_to_ul(volume_ml))
            self._pumps[patient_id] = pump
            if state.phase is Phase.ReservoirEmpty:
                self._states[patient_id] = DosingState()
        logger.info(
            f"DOSING: Refilled pump of patient {hexlify(patient_id)} by {volume_ml} ml to {pump.reservoir_ml} ml"
        )
        return pump

    def refill_alert(self, patient_id: bytes, now: int) -> Optional[Notification]:
        """
        Run the refill check on the stored pump.

        Dispensing runs it by itself; call this after attaching or refilling a pump
        that may already be at or below the alert level.
        """
        with self._lock:
            profile, _, pump = self._get(patient_id)
            pump, alert = refill_check(pump, self.policy.refill_alert_doses)
            self._pumps[patient_id] = pump
        if not alert:
            return None
        logger.info(f"DOSING: Pump of patient {hexlify(patient_id)} holds {pump.doses_remaining} doses, refill")
        return Notification(
            profile.patient_id, NotificationKind.RefillAlert, Severity.Warning, now, _pump_details(pump)
        )

    def status(self, patient_id: bytes) -> Dict[str, Any]:
        """Pump status and protocol phase for display."""
        with self._lock:
            profile, state, pump = self._get(patient_id)
        return {
            **pump.to_dict(),
            "age_class": profile.age_class.value,
            "phase": state.phase.value,
            "recheck_due": state.due,
            "cycles": state.cycles,
            "refill_needed": pump.doses_remaining <= self.policy.refill_alert_doses,
            "reservoir_empty": pump.doses_remaining == 0,
            "dose_mg": profile.dose.mass_mg,
        }
