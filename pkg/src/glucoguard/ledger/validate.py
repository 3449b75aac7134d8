"""Controls to verify the integrity of a chain of blocks."""
from __future__ import annotations

import logging
from typing import Callable, List, Optional, Sequence

from typing_extensions import Protocol

from glucoguard.common.integrity import ZERO_DIGEST, hexlify
from glucoguard.ledger.data import (
    BLOCK_VERSION,
    Block,
    IntegrityError,
    IntegrityReason,
    approval_digest,
    compute_block_hash,
    hash_transaction,
)
from glucoguard.ledger.merkle import merkle_root

__author__ = "glucoguard"

logger = logging.getLogger(__name__)


class MinerDirectory(Protocol):
    """Who may approve blocks for a patient, and how their signatures verify."""

    def is_registered(self, user_id: bytes) -> bool:
        ...

    def miners_of(self, patient_id: bytes) -> List[bytes]:
        ...

    def verify_approval(self, miner_id: bytes, signature: bytes, root: bytes) -> bool:
        ...


BlockCheck = Callable[[Sequence[Block], int], Optional[IntegrityError]]


def validate_chain(
    chain: Sequence[Block], directory: Optional[MinerDirectory] = None
) -> Optional[IntegrityError]:
    """
    Verify every block of a chain, in order.

    Returns None when the chain is intact, otherwise the first failure found.
    Without a miner directory the approvals are only checked for order and
    uniqueness; signatures are re-verified when a directory is given.
    """
    checks: List[BlockCheck] = [
        check_linkage,
        check_index,
        check_version,
        check_block_hash,
        check_nonce,
        check_merkle_root,
        check_approval_order,
        check_approval_digest,
        check_user,
    ]
    if directory is not None:
        _directory = directory
        checks.append(lambda _chain, k: check_approvals(_chain, k, _directory))
    for k in range(len(chain)):
        for check in checks:
            res = check(chain, k)
            if res is not None:
                logger.warning(f"LEDGER-VERIFY: {res}")
                return res
    logger.info(f"LEDGER-VERIFY: All {len(chain)} blocks verified")
    return None


def check_linkage(chain: Sequence[Block], k: int) -> Optional[IntegrityError]:
    """Block k must reference the hash of block k-1, or zeros for the first block."""
    expected = ZERO_DIGEST if k == 0 else chain[k - 1].block_hash
    if chain[k].header.prev_hash != expected:
        return IntegrityError(
            k,
            IntegrityReason.LinkageBroken,
            f"prev_hash {hexlify(chain[k].header.prev_hash)} != {hexlify(expected)}",
        )
    return None


def check_index(chain: Sequence[Block], k: int) -> Optional[IntegrityError]:
    """Block k must carry index k."""
    if chain[k].header.index != k:
        return IntegrityError(
            k, IntegrityReason.IndexGap, f"index {chain[k].header.index} at position {k}"
        )
    return None


def check_version(chain: Sequence[Block], k: int) -> Optional[IntegrityError]:
    """Only one block version exists."""
    if chain[k].header.version != BLOCK_VERSION:
        return IntegrityError(
            k, IntegrityReason.VersionMismatch, f"version {chain[k].header.version}"
        )
    return None


def check_block_hash(chain: Sequence[Block], k: int) -> Optional[IntegrityError]:
    """The stored block hash must be the hash of the stored header."""
    if compute_block_hash(chain[k].header) != chain[k].block_hash:
        return IntegrityError(k, IntegrityReason.HashMismatch)
    return None


def check_nonce(chain: Sequence[Block], k: int) -> Optional[IntegrityError]:
    """Nonce counts up from zero by one per block."""
    expected = 0 if k == 0 else chain[k - 1].header.nonce + 1
    if chain[k].header.nonce != expected:
        return IntegrityError(
            k, IntegrityReason.NonceGap, f"nonce {chain[k].header.nonce} != {expected}"
        )
    return None


def check_merkle_root(chain: Sequence[Block], k: int) -> Optional[IntegrityError]:
    """Merkle root over the stored transactions must match the header."""
    block = chain[k]
    if not block.transactions:
        return IntegrityError(k, IntegrityReason.MerkleMismatch, "no transactions")
    root = merkle_root([hash_transaction(tx) for tx in block.transactions])
    if root != block.header.merkle_root:
        return IntegrityError(k, IntegrityReason.MerkleMismatch)
    return None


def check_approval_digest(chain: Sequence[Block], k: int) -> Optional[IntegrityError]:
    """Approval digest over the stored approvals must match the header."""
    block = chain[k]
    if approval_digest(block.approvals) != block.header.approval_digest:
        return IntegrityError(k, IntegrityReason.ApprovalDigestMismatch)
    return None


def check_approval_order(chain: Sequence[Block], k: int) -> Optional[IntegrityError]:
    """A block carries at least one approval, strictly increasing by miner id."""
    approvals = chain[k].approvals
    if not approvals:
        return IntegrityError(k, IntegrityReason.ApprovalInvalid, "no approvals")
    for prev, this in zip(approvals, approvals[1:]):
        if this.miner_id <= prev.miner_id:
            return IntegrityError(
                k,
                IntegrityReason.ApprovalInvalid,
                f"approval from {hexlify(this.miner_id)} out of miner-id order",
            )
    return None


def check_user(chain: Sequence[Block], k: int) -> Optional[IntegrityError]:
    """All transactions in a block belong to the header user."""
    block = chain[k]
    for tx in block.transactions:
        if tx.patient_id != block.header.user_id:
            return IntegrityError(
                k,
                IntegrityReason.UserMismatch,
                f"transaction for {hexlify(tx.patient_id)} in block of {hexlify(block.header.user_id)}",
            )
    return None


def check_approvals(
    chain: Sequence[Block], k: int, directory: MinerDirectory
) -> Optional[IntegrityError]:
    """Every stored approval must come from one of the patient's miners and verify."""
    block = chain[k]
    miners = set(directory.miners_of(block.header.user_id))
    for approval in block.approvals:
        if approval.miner_id not in miners:
            return IntegrityError(
                k,
                IntegrityReason.ApprovalInvalid,
                f"{hexlify(approval.miner_id)} is not a miner for this patient",
            )
        if not directory.verify_approval(
            approval.miner_id, approval.signature, block.header.merkle_root
        ):
            return IntegrityError(
                k,
                IntegrityReason.ApprovalInvalid,
                f"bad signature from {hexlify(approval.miner_id)}",
            )
    return None
