import unittest
from typing import Dict, List, Optional, Sequence

import numpy as np

from glucoguard.common.integrity import sha256
from glucoguard.ledger.chain import Ledger
from glucoguard.ledger.data import (
    MinerApproval,
    TransactionKind,
    TransactionRecord,
    hash_transaction,
)
from glucoguard.ledger.merkle import merkle_root


class MockDirectory:
    """Miner directory where every miner signs with sha256(key || root)."""

    def __init__(self) -> None:
        self.keys: Dict[bytes, bytes] = {}
        self.miners: Dict[bytes, List[bytes]] = {}

    def add_patient(self, patient_id: bytes, miner_ids: Sequence[bytes]) -> None:
        for _id in [patient_id] + list(miner_ids):
            self.keys.setdefault(_id, sha256(b"key" + _id))
        self.miners[patient_id] = sorted(set([patient_id] + list(miner_ids)))

    def is_registered(self, user_id: bytes) -> bool:
        return user_id in self.miners

    def miners_of(self, patient_id: bytes) -> List[bytes]:
        return list(self.miners.get(patient_id, []))

    def verify_approval(self, miner_id: bytes, signature: bytes, root: bytes) -> bool:
        if miner_id not in self.keys:
            return False
        return sha256(self.keys[miner_id] + root) == signature

    def sign(self, miner_id: bytes, root: bytes) -> MinerApproval:
        return MinerApproval(miner_id=miner_id, signature=sha256(self.keys[miner_id] + root))


class Counter:
    """Deterministic clock."""

    def __init__(self, start: int = 1_600_000_000, step: int = 60) -> None:
        self.now = start
        self.step = step

    def __call__(self) -> int:
        res = self.now
        self.now += self.step
        return res


def _id(n: int) -> bytes:
    return bytes([n]) * 32


class Test_Ledger(unittest.TestCase):
    def setUp(self) -> None:
        self.patient = _id(1)
        self.doctor = _id(2)
        self.relative = _id(3)
        self.other_patient = _id(4)
        self.directory = MockDirectory()
        # patient with 3 miners: self, doctor and relative
        self.directory.add_patient(self.patient, [self.doctor, self.relative])
        self.directory.add_patient(self.other_patient, [])

    def _ledger(self, store: Optional[str] = None) -> Ledger:
        return Ledger(directory=self.directory, clock=Counter(), store=store)

    def _tx(
        self,
        payload: bytes = b"vitals",
        kind: TransactionKind = TransactionKind.VitalsData,
        patient_id: Optional[bytes] = None,
        created_at: int = 1_600_000_000,
    ) -> TransactionRecord:
        return TransactionRecord(
            kind=kind,
            patient_id=self.patient if patient_id is None else patient_id,
            payload=payload,
            created_at=created_at,
        )

    def _approvals(
        self, txs: Sequence[TransactionRecord], miners: Sequence[bytes]
    ) -> List[MinerApproval]:
        root = merkle_root([hash_transaction(tx) for tx in txs])
        return [self.directory.sign(m, root) for m in miners]

    def _append(self, ledger: Ledger, txs: Sequence[TransactionRecord]) -> None:
        patient_id = txs[0].patient_id
        ledger.append_block(
            txs, self._approvals(txs, self.directory.miners_of(patient_id)), patient_id
        )

    def _build_chain(self, num_blocks: int, seed: int = 0) -> Ledger:
        """Chain of blocks with two or three transactions each, mixed kinds."""
        rng = np.random.default_rng(seed)
        ledger = self._ledger()
        kinds = list(TransactionKind)
        for i in range(num_blocks):
            txs = [
                self._tx(
                    payload=rng.bytes(int(rng.integers(1, 40))),
                    kind=kinds[int(rng.integers(0, len(kinds)))],
                    created_at=1_600_000_000 + i * 100 + j,
                )
                for j in range(int(rng.integers(2, 4)))
            ]
            self._append(ledger, txs)
        return ledger
