"""The ledger: transaction pool, chain of blocks and hash table."""
from __future__ import annotations

import logging
import os
import threading
import time
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Set, Union

from glucoguard.common.integrity import ZERO_DIGEST, hexlify
from glucoguard.ledger.data import (
    BLOCK_VERSION,
    MAX_UINT32,
    Block,
    BlockHeader,
    HashTableEntry,
    IntegrityError,
    LedgerError,
    MinerApproval,
    TransactionKind,
    TransactionRecord,
    approval_digest,
    compute_block_hash,
    hash_transaction,
    sort_approvals,
)
from glucoguard.ledger.merkle import merkle_root
from glucoguard.ledger.store import append_store, read_store
from glucoguard.ledger.validate import MinerDirectory, validate_chain

__author__ = "glucoguard"

logger = logging.getLogger(__name__)

Clock = Callable[[], int]


class EmptyTransactionSet(LedgerError):
    """A block must carry at least one transaction."""


class InsufficientApprovals(LedgerError):
    """Fewer distinct valid approvals than the threshold requires."""


class InvalidSignature(LedgerError):
    """An approval did not verify, or came from someone who is not a miner for the patient."""

    def __init__(self, miner_id: bytes, message: str):
        """Remember which miner failed."""
        super().__init__(message)
        self.miner_id = miner_id


class UnknownBlock(LedgerError):
    """No block at the requested index."""


class UnknownPatient(LedgerError):
    """A transaction references a patient id that is not registered."""


class ForeignTransaction(LedgerError):
    """A block may only carry transactions of the patient it is approved for."""


def system_clock() -> int:
    """Current time in whole seconds."""
    return int(time.time())


def required_approvals(threshold: Union[str, int], miner_count: int) -> int:
    """Number of approvals needed; 'majority' is a strict majority of the miners."""
    if threshold == "majority":
        return miner_count // 2 + 1
    return int(threshold)


class TransactionPool:
    """Transactions waiting for approval and block assembly. Each appears at most once."""

    def __init__(self) -> None:
        """Create an empty pool."""
        self._pending: Dict[bytes, TransactionRecord] = {}

    def add(self, tx: TransactionRecord) -> bool:
        """Add a transaction, returns False if it was already pending."""
        digest = hash_transaction(tx)
        if digest in self._pending:
            return False
        self._pending[digest] = tx
        return True

    def remove(self, txs: Iterable[TransactionRecord]) -> None:
        """Remove transactions that made it into a block."""
        for tx in txs:
            self._pending.pop(hash_transaction(tx), None)

    def for_patient(self, patient_id: bytes) -> List[TransactionRecord]:
        """Pending transactions of one patient, in arrival order."""
        return [tx for tx in self._pending.values() if tx.patient_id == patient_id]

    @property
    def pending(self) -> List[TransactionRecord]:
        """All pending transactions in arrival order."""
        return list(self._pending.values())

    def __contains__(self, tx: TransactionRecord) -> bool:
        return hash_transaction(tx) in self._pending

    def __len__(self) -> int:
        return len(self._pending)


class Ledger:
    """
    Append-only chain of miner approved blocks.

    Appends are serialized by a lock; appended blocks are immutable so readers
    need no locking. When a store path is given, existing blocks are loaded from
    it and every new block is appended to it.
    """

    def __init__(
        self,
        directory: Optional[MinerDirectory] = None,
        threshold: Union[str, int] = "majority",
        clock: Clock = system_clock,
        store: Optional[str] = None,
    ):
        """
        Create a ledger, loading blocks from the store file if it exists.

        :param threshold: 'majority' or a fixed number of approvals
        :param clock: returns the block timestamp in seconds
        """
        self.directory = directory
        self.threshold = threshold
        self.clock = clock
        self.store = store
        self.pool = TransactionPool()
        self._blocks: List[Block] = []
        self._hash_table: Dict[bytes, HashTableEntry] = {}
        self._lock = threading.Lock()
        if store and os.path.exists(store):
            for block in read_store(store):
                self._add(block)
            logger.info(f"Loaded {len(self._blocks)} blocks from {store}")

    def _add(self, block: Block) -> None:
        self._blocks.append(block)
        self._hash_table[block.block_hash] = HashTableEntry(
            block_hash=block.block_hash, block_index=block.index
        )

    @property
    def blocks(self) -> Sequence[Block]:
        """Snapshot of the chain."""
        return tuple(self._blocks)

    def __len__(self) -> int:
        return len(self._blocks)

    @property
    def hash_table_size(self) -> int:
        """Number of entries in the hash table."""
        return len(self._hash_table)

    def get_block(self, index: int) -> Block:
        """Block at an index."""
        if not 0 <= index < len(self._blocks):
            raise UnknownBlock(f"No block with index {index}")
        return self._blocks[index]

    def lookup(self, block_hash: bytes) -> Optional[HashTableEntry]:
        """Find a block by its hash."""
        return self._hash_table.get(block_hash)

    def submit(self, tx: TransactionRecord) -> bool:
        """Put a transaction in the pool."""
        return self.pool.add(tx)

    def append_block(
        self,
        pool_txs: Sequence[TransactionRecord],
        approvals: Sequence[MinerApproval],
        user_id: bytes,
    ) -> Block:
        """
        Assemble, approve and append a block of one patient's transactions.

        Every approval must verify against the candidate Merkle root and come from
        one of the patient's miners. Duplicate approvals from one miner count once.
        On any error the chain and the pool are left unchanged.
        """
        if not pool_txs:
            raise EmptyTransactionSet("Refusing to append a block without transactions")
        if self.directory is None:
            raise LedgerError("Cannot append without a miner directory")
        for tx in pool_txs:
            if tx.patient_id != user_id:
                raise ForeignTransaction(
                    f"Transaction for {hexlify(tx.patient_id)} in block of {hexlify(user_id)}"
                )
        if not self.directory.is_registered(user_id):
            raise UnknownPatient(f"Patient {hexlify(user_id)} is not registered")

        root = merkle_root([hash_transaction(tx) for tx in pool_txs])
        miners = self.directory.miners_of(user_id)
        unique: Dict[bytes, MinerApproval] = {}
        for approval in approvals:
            if approval.miner_id not in miners:
                raise InvalidSignature(
                    approval.miner_id,
                    f"{hexlify(approval.miner_id)} is not a miner for {hexlify(user_id)}",
                )
            if not self.directory.verify_approval(
                approval.miner_id, approval.signature, root
            ):
                raise InvalidSignature(
                    approval.miner_id,
                    f"Approval from {hexlify(approval.miner_id)} does not verify",
                )
            unique.setdefault(approval.miner_id, approval)

        needed = required_approvals(self.threshold, len(miners))
        if len(unique) < needed:
            logger.warning(
                f"LEDGER-APPEND: {len(unique)} of {len(miners)} miners approved, {needed} needed"
            )
            raise InsufficientApprovals(
                f"{len(unique)} approvals, {needed} required ({len(miners)} miners)"
            )
        kept = sort_approvals(tuple(unique.values()))

        with self._lock:
            timestamp = self.clock()
            if not 0 <= timestamp <= MAX_UINT32:
                raise LedgerError(f"Timestamp {timestamp} does not fit in 32 bits")
            if self._blocks:
                prev = self._blocks[-1]
                index, prev_hash, nonce = prev.index + 1, prev.block_hash, prev.header.nonce + 1
            else:
                index, prev_hash, nonce = 0, ZERO_DIGEST, 0
            header = BlockHeader(
                version=BLOCK_VERSION,
                index=index,
                prev_hash=prev_hash,
                merkle_root=root,
                timestamp=timestamp,
                nonce=nonce,
                user_id=user_id,
                approval_digest=approval_digest(kept),
            )
            block = Block(
                header=header,
                transactions=tuple(pool_txs),
                approvals=kept,
                block_hash=compute_block_hash(header),
            )
            if self.store:
                append_store(self.store, block)
            self._add(block)
            self.pool.remove(pool_txs)
        logger.info(
            f"LEDGER-APPEND: Block {index} {hexlify(block.block_hash)} with "
            f"{len(pool_txs)} transactions and {len(kept)}/{len(miners)} approvals"
        )
        return block

    def validate(self) -> Optional[IntegrityError]:
        """Validate the whole chain, re-verifying approvals with the miner directory."""
        return validate_chain(self._blocks, self.directory)

    def query_transactions(
        self,
        patient_id: bytes,
        kinds: Optional[Set[TransactionKind]] = None,
        start: Optional[int] = None,
        end: Optional[int] = None,
    ) -> List[TransactionRecord]:
        """
        Transactions of a patient in chain order.

        kinds restricts the transaction kinds, start and end (inclusive) bound created_at.
        """
        return [
            tx
            for block in self._blocks
            for tx in block.transactions
            if tx.patient_id == patient_id
            and (kinds is None or tx.kind in kinds)
            and (start is None or tx.created_at >= start)
            and (end is None or tx.created_at <= end)
        ]
