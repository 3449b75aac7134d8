"""
Health Information Unit.

Authenticates and authorizes every interaction, then runs an ingested batch through
fog preprocessing, the ledger, the detector and the rescue protocol:

  readings -> samples -> vitals block -> detections (+ doses) -> detection block

With auto_approve the approvals are collected from the patient's miners known to
the registry. Otherwise the pooled transactions wait for POST /approvals.
"""
from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

from glucoguard.common.config import GlucoguardConfig
from glucoguard.common.config_misc import DosingPolicy
from glucoguard.common.integrity import hexlify
from glucoguard.detector.forest import RandomForest
from glucoguard.detector.model_io import load_model
from glucoguard.detector.result import DetectionResult, detect, model_id
from glucoguard.dosing.controller import DosingController
from glucoguard.dosing.data import DosingOutcome, DosingState, PatientProfile, PumpState
from glucoguard.fog.data import RawReading, VitalsSample
from glucoguard.fog.payload import encode_vitals_payload
from glucoguard.fog.preprocess import preprocess_batch
from glucoguard.gateway.data import (
    AuthenticationFailed,
    BatchPending,
    GatewayError,
    IngestSummary,
    InvalidApproval,
    MalformedRequest,
    ModelUnavailable,
    NoPendingBatch,
    NotAuthorized,
    PatientNotFound,
    transaction_to_dict,
)
from glucoguard.gateway.notify import Notifier
from glucoguard.identity.data import Action, AgeClass, Effect, RegistrationRequest, Role, Status
from glucoguard.identity.registry import Registry, sign_approval
from glucoguard.identity.store import open_registry
from glucoguard.ledger.chain import Clock, Ledger, required_approvals, system_clock
from glucoguard.ledger.data import (
    Block,
    IntegrityError,
    LedgerError,
    MinerApproval,
    TransactionKind,
    TransactionRecord,
    hash_transaction,
)
from glucoguard.ledger.merkle import merkle_root
from glucoguard.ledger.store import block_to_dict

__author__ = "glucoguard"

logger = logging.getLogger(__name__)


@dataclass
class PendingBatch:
    """Pooled transactions of one patient waiting for interactive approvals."""

    stage: str
    samples: Tuple[VitalsSample, ...]
    transactions: List[TransactionRecord]
    approvals: Dict[bytes, MinerApproval] = field(default_factory=dict)
    vitals_block: Optional[int] = None
    detections: Tuple[DetectionResult, ...] = ()
    outcomes: Tuple[DosingOutcome, ...] = ()
    # protocol state and pump once the detection block is on the chain
    dosing: Optional[Tuple[DosingState, PumpState]] = None


class GlucoguardService:
    """The registry, the ledger, the pumps and the model behind one gateway."""

    def __init__(
        self,
        registry: Registry,
        ledger: Ledger,
        controller: DosingController,
        model: Optional[RandomForest] = None,
        notifier: Optional[Notifier] = None,
        threshold: float = 0.5,
        auto_approve: bool = True,
        record_retrievals: bool = False,
        clock: Clock = system_clock,
    ):
        """Tie the parts together. The ledger should use the registry as its miner directory."""
        self.registry = registry
        self.ledger = ledger
        self.controller = controller
        self.notifier = notifier or Notifier()
        self.threshold = threshold
        self.auto_approve = auto_approve
        self.record_retrievals = record_retrievals
        self.clock = clock
        self._model: Optional[RandomForest] = None
        self._model_id = b""
        self._pending: Dict[bytes, PendingBatch] = {}
        self._lock = threading.RLock()
        if model is not None:
            self.set_model(model)

    @classmethod
    def from_config(
        cls, config: GlucoguardConfig, model: Optional[RandomForest] = None, clock: Clock = system_clock
    ) -> GlucoguardService:
        """
        Build a service from configuration.

        Stored identities are loaded, and every patient gets a pump filled with the
        configured reservoir volume. Pump state is not persisted.
        """
        registry = open_registry(
            config.identity.store, seed=config.identity.seed, block_threshold=config.identity.block_threshold
        )
        ledger = Ledger(
            directory=registry, threshold=config.ledger.approval_threshold, clock=clock, store=config.ledger.store
        )
        if model is None and config.detector.model:
            model = load_model(config.detector.model)
        gateway = config.gateway
        notifier = Notifier(
            log_path=gateway.notification_log, webhook_url=gateway.webhook_url, timeout=gateway.webhook_timeout
        )
        service = cls(
            registry,
            ledger,
            DosingController(config.dosing),
            model=model,
            notifier=notifier,
            threshold=config.detector.threshold,
            auto_approve=gateway.auto_approve,
            record_retrievals=gateway.record_retrievals,
            clock=clock,
        )
        for user in registry.users:
            if user.role is Role.Patient:
                service.add_patient(PatientProfile(user.user_id, user.age_class or AgeClass.Adult))
        return service

    @property
    def model(self) -> Optional[RandomForest]:
        return self._model

    def set_model(self, model: RandomForest) -> None:
        """Use a (new) detection model."""
        self._model = model
        self._model_id = model_id(model)
        logger.info(f"Detection model {hexlify(self._model_id)[:16]} with {len(model)} trees in use")

    @property
    def dosing_policy(self) -> DosingPolicy:
        return self.controller.policy

    #
    # Registration Center / Administration Unit
    #
    def register(self, request: RegistrationRequest) -> Tuple[bytes, bytes]:
        """Register a user. Patients get a pump."""
        user_id, key = self.registry.register(request)
        if request.role is Role.Patient:
            user = self.registry.get(user_id)
            self.add_patient(PatientProfile(user_id, user.age_class or AgeClass.Adult))
        return user_id, key

    def add_patient(self, profile: PatientProfile, reservoir_ml: Optional[float] = None) -> PumpState:
        """Attach a pump, alerting right away when it starts at or below the refill level."""
        self.controller.add_patient(profile, reservoir_ml)
        self._check_refill(profile.patient_id)
        return self.controller.pump(profile.patient_id)

    def _check_refill(self, patient_id: bytes) -> None:
        notification = self.controller.refill_alert(patient_id, self.clock())
        if notification is not None:
            self.notifier.notify(notification)

    def authenticate(self, user_id: bytes, public_key: bytes) -> bytes:
        """Return the user id, or raise AuthenticationFailed."""
        result = self.registry.authenticate(user_id, public_key)
        if not result.authenticated:
            assert result.reason is not None
            raise AuthenticationFailed(f"Authentication failed: {result.reason.value}")
        return user_id

    def authorize(self, actor_id: bytes, action: Action, target_id: Optional[bytes]) -> None:
        """Raise NotAuthorized (and count a violation) unless the policy list allows it."""
        if self.registry.authorize(actor_id, action, target_id) is not Effect.Allow:
            raise NotAuthorized(f"{action.value} not allowed")

    def _require_patient(self, patient_id: bytes) -> None:
        if patient_id not in self.controller:
            raise PatientNotFound(f"No patient with id {hexlify(patient_id)}")

    #
    # Ledger plumbing
    #
    def _auto_approvals(self, patient_id: bytes, root: bytes) -> List[MinerApproval]:
        res = []
        for miner_id in self.registry.miners_of(patient_id):
            miner = self.registry.get(miner_id)
            if miner.status is Status.Active:
                res.append(MinerApproval(miner_id=miner_id, signature=sign_approval(miner.public_key, root)))
        return res

    def _append(self, patient_id: bytes, txs: Sequence[TransactionRecord]) -> Block:
        """Pool txs and append them (with anything else pooled for the patient) as one auto approved block."""
        for tx in txs:
            self.ledger.submit(tx)
        pooled = self.ledger.pool.for_patient(patient_id)
        root = merkle_root([hash_transaction(tx) for tx in pooled])
        try:
            return self.ledger.append_block(pooled, self._auto_approvals(patient_id, root), patient_id)
        except LedgerError:
            self.ledger.pool.remove(txs)
            raise

    def _submit_pending(self, patient_id: bytes, batch: PendingBatch) -> IngestSummary:
        for tx in batch.transactions:
            self.ledger.submit(tx)
        batch.transactions = self.ledger.pool.for_patient(patient_id)
        self._pending[patient_id] = batch
        root = merkle_root([hash_transaction(tx) for tx in batch.transactions])
        logger.info(
            f"LEDGER-APPEND: {len(batch.transactions)} {batch.stage} transactions of "
            f"{hexlify(patient_id)[:16]} wait for approvals of {hexlify(root)}"
        )
        return IngestSummary(
            status="pending",
            vitals_block=batch.vitals_block,
            samples=batch.samples,
            detections=batch.detections,
            outcomes=batch.outcomes,
            merkle_root=root,
        )

    #
    # Ingest pipeline
    #
    def _detect_and_dose(
        self, patient_id: bytes, samples: Sequence[VitalsSample], stored: Sequence[TransactionRecord]
    ) -> Tuple[Tuple[DetectionResult, ...], Tuple[DosingOutcome, ...], List[TransactionRecord]]:
        if self._model is None:
            raise ModelUnavailable("No detection model loaded")
        payloads = {tx.payload for tx in stored if tx.kind is TransactionKind.VitalsData}
        detections: List[DetectionResult] = []
        outcomes: List[DosingOutcome] = []
        txs: List[TransactionRecord] = []
        for sample in samples:
            # detection runs on the in-flight sample, which must be what went on the chain
            if encode_vitals_payload(sample) not in payloads:
                raise GatewayError(f"Sample at {sample.timestamp} differs from the stored vitals")
            due = self.controller.recheck_due(patient_id)
            if due is not None and sample.timestamp >= due:
                outcomes.append(self.controller.recheck(patient_id, sample.glucose, sample.timestamp))
            result = detect(self._model, sample, self.threshold, self._model_id)
            detections.append(result)
            txs.append(
                TransactionRecord(TransactionKind.DetectionResult, patient_id, result.to_payload(), sample.timestamp)
            )
            logger.info(
                f"Detection for {hexlify(patient_id)[:16]} at {sample.timestamp}: "
                f"p={result.probability:.3f} label={result.label}"
            )
            if result.label == 1:
                vitals = {"glucose": sample.glucose, "systolic_bp": sample.systolic_bp, "heart_rate": sample.heart_rate}
                outcomes.append(self.controller.detection(patient_id, sample.timestamp, vitals))
        for outcome in outcomes:
            if outcome.dose is not None:
                dose = outcome.dose
                txs.append(TransactionRecord(TransactionKind.DoseEvent, patient_id, dose.to_payload(), dose.timestamp))
        return tuple(detections), tuple(outcomes), txs

    def _notify(self, outcomes: Sequence[DosingOutcome]) -> None:
        for outcome in outcomes:
            for notification in outcome.notifications:
                self.notifier.notify(notification)

    def ingest(self, actor_id: bytes, patient_id: bytes, readings: Sequence[RawReading]) -> IngestSummary:
        """
        Accept a batch of raw readings of one patient.

        With auto approval exactly two blocks are appended, one with the vitals and
        one with the detection results and any doses. When the second append fails
        the pump and protocol state are put back.
        """
        self.authorize(actor_id, Action.IngestVitals, patient_id)
        if not readings:
            raise MalformedRequest("Empty batch")
        if any(r.patient_id != patient_id for r in readings):
            raise MalformedRequest("Batch holds readings of another patient")
        if self._model is None:
            raise ModelUnavailable("No detection model loaded")
        with self._lock:
            if patient_id in self._pending:
                raise BatchPending(f"Batch of {hexlify(patient_id)[:16]} is waiting for approvals")
            samples = tuple(sorted(preprocess_batch(readings), key=lambda s: s.timestamp))
            vitals = [
                TransactionRecord(TransactionKind.VitalsData, patient_id, encode_vitals_payload(s), s.timestamp)
                for s in samples
            ]
            if not self.auto_approve:
                return self._submit_pending(patient_id, PendingBatch("vitals", samples, vitals))
            vitals_block = self._append(patient_id, vitals)
            before = self.controller.snapshot(patient_id)
            try:
                detections, outcomes, txs = self._detect_and_dose(patient_id, samples, vitals_block.transactions)
                detection_block = self._append(patient_id, txs)
            except Exception:
                # no dose without its DoseEvent on the chain
                self.controller.restore(patient_id, before)
                raise
            self._notify(outcomes)
        return IngestSummary(
            status="appended",
            vitals_block=vitals_block.index,
            detection_block=detection_block.index,
            samples=samples,
            detections=detections,
            outcomes=outcomes,
        )

    def approve(self, actor_id: bytes, patient_id: bytes, signature: bytes) -> IngestSummary:
        """
        Interactive approval of a patient's pending transactions.

        When enough miners approved, the block is appended. Appending the vitals block
        runs detection and dosing, whose results then wait for approvals in turn.
        """
        self.authorize(actor_id, Action.ApproveBlock, patient_id)
        with self._lock:
            batch = self._pending.get(patient_id)
            if batch is None:
                raise NoPendingBatch(f"Nothing of {hexlify(patient_id)[:16]} waits for approval")
            root = merkle_root([hash_transaction(tx) for tx in batch.transactions])
            if not self.registry.verify_approval(actor_id, signature, root):
                raise InvalidApproval(f"Approval of {hexlify(actor_id)[:16]} does not verify against {hexlify(root)}")
            batch.approvals[actor_id] = MinerApproval(miner_id=actor_id, signature=signature)
            miners = self.registry.miners_of(patient_id)
            needed = required_approvals(self.ledger.threshold, len(miners))
            if len(batch.approvals) < needed:
                return IngestSummary(
                    status="pending",
                    vitals_block=batch.vitals_block,
                    samples=batch.samples,
                    merkle_root=root,
                    approvals=len(batch.approvals),
                )
            block = self.ledger.append_block(batch.transactions, list(batch.approvals.values()), patient_id)
            del self._pending[patient_id]
            if batch.stage == "vitals":
                # doses are decided now and given once the detection block is approved
                before = self.controller.snapshot(patient_id)
                try:
                    detections, outcomes, txs = self._detect_and_dose(patient_id, batch.samples, block.transactions)
                    after = self.controller.snapshot(patient_id)
                finally:
                    self.controller.restore(patient_id, before)
                return self._submit_pending(
                    patient_id,
                    PendingBatch(
                        "detection",
                        batch.samples,
                        txs,
                        vitals_block=block.index,
                        detections=detections,
                        outcomes=outcomes,
                        dosing=None if after == before else after,
                    ),
                )
            if batch.dosing is not None:
                self.controller.restore(patient_id, batch.dosing)
            self._notify(batch.outcomes)
        return IngestSummary(
            status="appended",
            vitals_block=batch.vitals_block,
            detection_block=block.index,
            samples=batch.samples,
            detections=batch.detections,
            outcomes=batch.outcomes,
        )

    def pending(self, patient_id: bytes) -> Optional[PendingBatch]:
        return self._pending.get(patient_id)

    #
    # Queries
    #
    def history(
        self,
        actor_id: bytes,
        patient_id: bytes,
        kinds: Optional[Set[TransactionKind]] = None,
        start: Optional[int] = None,
        end: Optional[int] = None,
    ) -> List[Dict]:
        """A patient's transactions for the patient or a linked doctor."""
        self.authorize(actor_id, Action.ReadHistory, patient_id)
        txs = self.ledger.query_transactions(patient_id, kinds, start, end)
        if self.record_retrievals and actor_id != patient_id:
            grant = TransactionRecord(TransactionKind.RetrievalGrant, patient_id, actor_id, self.clock())
            with self._lock:
                if self.auto_approve and patient_id not in self._pending:
                    self._append(patient_id, [grant])
                else:
                    self.ledger.submit(grant)
        return [transaction_to_dict(tx) for tx in txs]

    def pump_status(self, actor_id: bytes, patient_id: bytes) -> Dict:
        self._require_patient(patient_id)
        self.authorize(actor_id, Action.ReadPumpStatus, patient_id)
        return self.controller.status(patient_id)

    def refill(self, actor_id: bytes, patient_id: bytes, volume_ml: float) -> PumpState:
        self._require_patient(patient_id)
        self.authorize(actor_id, Action.RefillPump, patient_id)
        with self._lock:
            batch = self._pending.get(patient_id)
            if batch is not None and batch.dosing is not None:
                raise BatchPending(f"Doses of {hexlify(patient_id)[:16]} are waiting for approvals")
            self.controller.refill(patient_id, volume_ml)
            self._check_refill(patient_id)
            return self.controller.pump(patient_id)

    def acknowledge(self, actor_id: bytes, patient_id: bytes, note: str = "") -> Dict:
        self._require_patient(patient_id)
        self.authorize(actor_id, Action.Acknowledge, patient_id)
        return self.notifier.acknowledge(patient_id, actor_id, self.clock(), note)

    def verify_chain(self) -> Optional[IntegrityError]:
        return self.ledger.validate()

    def block(self, actor_id: bytes, index: int) -> Dict:
        """
        A block as JSON.

        Payloads of transactions the actor may not read are left out, the
        transaction metadata is always shown.
        """
        block = self.ledger.get_block(index)
        res = block_to_dict(block)
        for rendered, tx in zip(res["transactions"], block.transactions):
            if self.registry.permits(actor_id, Action.ReadHistory, tx.patient_id) is not Effect.Allow:
                rendered["payload"] = None
        return res

    def close(self) -> None:
        self.notifier.close()
