"""Ledger data classes and their canonical byte encodings."""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

from glucoguard.common.errors import GlucoguardError
from glucoguard.common.integrity import ZERO_DIGEST, sha256

__author__ = "glucoguard"

BLOCK_VERSION = 1
HEADER_SIZE = 172
ID_SIZE = 32
DIGEST_SIZE = 32
MAX_UINT32 = 0xFFFFFFFF

# version, index, prev_hash, merkle_root, timestamp, nonce, user_id, approval_digest
_HEADER_STRUCT = struct.Struct(">I32s32s32sII32s32s")
_TX_PREFIX_STRUCT = struct.Struct(">B32sII")
_APPROVAL_STRUCT = struct.Struct(">32s32s")


class LedgerError(GlucoguardError):
    """Base class for ledger errors."""


class TransactionKind(Enum):
    """What a transaction on the chain carries."""

    VitalsData = 1
    DetectionResult = 2
    DoseEvent = 3
    RetrievalGrant = 4


@dataclass(frozen=True)
class TransactionRecord:
    """The content one smart contract carries onto the chain."""

    kind: TransactionKind
    patient_id: bytes = field(repr=False)
    payload: bytes = field(repr=False)
    created_at: int

    def __post_init__(self) -> None:
        """Check field sizes."""
        if len(self.patient_id) != ID_SIZE:
            raise ValueError(f"patient_id must be {ID_SIZE} bytes")
        if not 0 <= self.created_at <= MAX_UINT32:
            raise ValueError(f"created_at {self.created_at} does not fit in 32 bits")

    def to_bytes(self) -> bytes:
        """Canonical encoding: kind || patient_id || created_at || len(payload) || payload."""
        return (
            _TX_PREFIX_STRUCT.pack(
                self.kind.value, self.patient_id, self.created_at, len(self.payload)
            )
            + self.payload
        )

    @classmethod
    def from_bytes(cls, data: bytes, offset: int = 0) -> Tuple[TransactionRecord, int]:
        """Decode one transaction at offset, return it and the offset following it."""
        end = offset + _TX_PREFIX_STRUCT.size
        if len(data) < end:
            raise ValueError("Truncated transaction header")
        kind, patient_id, created_at, length = _TX_PREFIX_STRUCT.unpack_from(
            data, offset
        )
        if len(data) < end + length:
            raise ValueError("Truncated transaction payload")
        tx = cls(
            kind=TransactionKind(kind),
            patient_id=patient_id,
            payload=bytes(data[end : end + length]),
            created_at=created_at,
        )
        return tx, end + length


def hash_transaction(tx: TransactionRecord) -> bytes:
    """SHA-256 over the canonical transaction bytes."""
    return sha256(tx.to_bytes())


@dataclass(frozen=True)
class MinerApproval:
    """A miner's agreement to append a block, signed over the candidate Merkle root."""

    miner_id: bytes
    signature: bytes = field(repr=False)

    def to_bytes(self) -> bytes:
        """Encode as miner_id || signature."""
        return _APPROVAL_STRUCT.pack(self.miner_id, self.signature)

    @classmethod
    def from_bytes(cls, data: bytes, offset: int = 0) -> Tuple[MinerApproval, int]:
        """Decode one approval at offset."""
        if len(data) < offset + _APPROVAL_STRUCT.size:
            raise ValueError("Truncated approval")
        miner_id, signature = _APPROVAL_STRUCT.unpack_from(data, offset)
        return cls(miner_id=miner_id, signature=signature), offset + _APPROVAL_STRUCT.size


def sort_approvals(approvals: Tuple[MinerApproval, ...]) -> Tuple[MinerApproval, ...]:
    """Approvals in miner-id order."""
    return tuple(sorted(approvals, key=lambda a: a.miner_id))


def approval_digest(approvals: Tuple[MinerApproval, ...]) -> bytes:
    """SHA-256 of the approval signatures concatenated in miner-id order."""
    return sha256(b"".join(a.signature for a in sort_approvals(approvals)))


@dataclass(frozen=True)
class BlockHeader:
    """The 172 byte block header."""

    version: int
    index: int
    prev_hash: bytes
    merkle_root: bytes
    timestamp: int
    nonce: int
    user_id: bytes
    approval_digest: bytes

    def to_bytes(self) -> bytes:
        """Serialize header, all integers big-endian."""
        return _HEADER_STRUCT.pack(
            self.version,
            self.index.to_bytes(32, "big"),
            self.prev_hash,
            self.merkle_root,
            self.timestamp,
            self.nonce,
            self.user_id,
            self.approval_digest,
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> BlockHeader:
        """Parse a serialized header."""
        if len(data) != HEADER_SIZE:
            raise ValueError(f"Header must be {HEADER_SIZE} bytes, got {len(data)}")
        (
            version,
            index,
            prev_hash,
            merkle_root,
            timestamp,
            nonce,
            user_id,
            _approval_digest,
        ) = _HEADER_STRUCT.unpack(data)
        return cls(
            version=version,
            index=int.from_bytes(index, "big"),
            prev_hash=prev_hash,
            merkle_root=merkle_root,
            timestamp=timestamp,
            nonce=nonce,
            user_id=user_id,
            approval_digest=_approval_digest,
        )

    @classmethod
    def empty(cls) -> BlockHeader:
        """Version 1 header with every other field zero."""
        return cls(
            version=BLOCK_VERSION,
            index=0,
            prev_hash=ZERO_DIGEST,
            merkle_root=ZERO_DIGEST,
            timestamp=0,
            nonce=0,
            user_id=bytes(ID_SIZE),
            approval_digest=ZERO_DIGEST,
        )


def compute_block_hash(header: BlockHeader) -> bytes:
    """SHA-256 over the 172 byte serialized header."""
    return sha256(header.to_bytes())


@dataclass(frozen=True)
class Block:
    """A block: header, transactions, approvals and the derived block hash."""

    header: BlockHeader
    transactions: Tuple[TransactionRecord, ...]
    approvals: Tuple[MinerApproval, ...]
    block_hash: bytes

    @property
    def index(self) -> int:
        """Block index from the header."""
        return self.header.index


@dataclass(frozen=True)
class HashTableEntry:
    """Where a block hash is found on the chain."""

    block_hash: bytes
    block_index: int


class IntegrityReason(Enum):
    """Why validate_chain rejected a block."""

    LinkageBroken = "LinkageBroken"
    IndexGap = "IndexGap"
    VersionMismatch = "VersionMismatch"
    NonceGap = "NonceGap"
    HashMismatch = "HashMismatch"
    MerkleMismatch = "MerkleMismatch"
    UserMismatch = "UserMismatch"
    ApprovalDigestMismatch = "ApprovalDigestMismatch"
    ApprovalInvalid = "ApprovalInvalid"


@dataclass(frozen=True)
class IntegrityError:
    """First integrity failure found on a chain. A value, not an exception."""

    block_index: int
    reason: IntegrityReason
    message: Optional[str] = None

    def __str__(self) -> str:
        """Human readable form."""
        return f"block {self.block_index}: {self.reason.value} {self.message or ''}".strip()
