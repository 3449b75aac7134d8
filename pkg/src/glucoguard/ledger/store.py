"""Block file format: length-prefixed block records."""
from __future__ import annotations

import logging
import os
import struct
from typing import Any, Dict, List, Sequence

from glucoguard.common.integrity import checksum_bytes2str, hexlify
from glucoguard.ledger.data import (
    HEADER_SIZE,
    Block,
    BlockHeader,
    LedgerError,
    MinerApproval,
    TransactionRecord,
    compute_block_hash,
)

__author__ = "glucoguard"

logger = logging.getLogger(__name__)

_U32 = struct.Struct(">I")


class StoreFormatError(LedgerError):
    """A block record or block file could not be parsed."""


def serialize_block(block: Block) -> bytes:
    """Header || tx count || transactions || approval count || approvals."""
    res = [block.header.to_bytes(), _U32.pack(len(block.transactions))]
    res += [tx.to_bytes() for tx in block.transactions]
    res += [_U32.pack(len(block.approvals))]
    res += [a.to_bytes() for a in block.approvals]
    return b"".join(res)


def deserialize_block(data: bytes) -> Block:
    """
    Parse a block record produced by serialize_block.

    The block hash is not part of the record, it is recomputed from the header.
    """
    try:
        header = BlockHeader.from_bytes(data[:HEADER_SIZE])
        offset = HEADER_SIZE
        (tx_count,) = _U32.unpack_from(data, offset)
        offset += _U32.size
        transactions: List[TransactionRecord] = []
        for _ in range(tx_count):
            tx, offset = TransactionRecord.from_bytes(data, offset)
            transactions.append(tx)
        (approval_count,) = _U32.unpack_from(data, offset)
        offset += _U32.size
        approvals: List[MinerApproval] = []
        for _ in range(approval_count):
            approval, offset = MinerApproval.from_bytes(data, offset)
            approvals.append(approval)
    except (ValueError, struct.error) as exc:
        raise StoreFormatError(f"Malformed block record: {exc}") from exc
    if offset != len(data):
        raise StoreFormatError(f"{len(data) - offset} trailing bytes in block record")
    return Block(
        header=header,
        transactions=tuple(transactions),
        approvals=tuple(approvals),
        block_hash=compute_block_hash(header),
    )


def encode_record(block: Block) -> bytes:
    """One length-prefixed record."""
    data = serialize_block(block)
    return _U32.pack(len(data)) + data


def write_store(path: str, chain: Sequence[Block]) -> None:
    """Write a whole chain to a block file, replacing it."""
    data = b"".join(encode_record(block) for block in chain)
    with open(path, "wb") as fd:
        fd.write(data)
    logger.info(
        f"Wrote {len(chain)} blocks to file {path} {checksum_bytes2str(data)}"
    )


def append_store(path: str, block: Block) -> None:
    """Append one block record to a block file."""
    with open(path, "ab") as fd:
        fd.write(encode_record(block))
        fd.flush()
        os.fsync(fd.fileno())


def read_store(path: str) -> List[Block]:
    """Read every block record from a block file."""
    with open(path, "rb") as fd:
        data = fd.read()
    logger.info(f"Loaded block file {path} {checksum_bytes2str(data)}")
    chain: List[Block] = []
    offset = 0
    while offset < len(data):
        if len(data) - offset < _U32.size:
            raise StoreFormatError(f"Truncated record length at offset {offset}")
        (length,) = _U32.unpack_from(data, offset)
        offset += _U32.size
        if len(data) - offset < length:
            raise StoreFormatError(
                f"Truncated block record {len(chain)} at offset {offset}"
            )
        chain.append(deserialize_block(data[offset : offset + length]))
        offset += length
    return chain


def block_to_dict(block: Block) -> Dict[str, Any]:
    """JSON friendly rendering of a block, every 32 byte field in hex."""
    header = block.header
    return {
        "index": header.index,
        "version": header.version,
        "prev_hash": hexlify(header.prev_hash),
        "merkle_root": hexlify(header.merkle_root),
        "timestamp": header.timestamp,
        "nonce": header.nonce,
        "user_id": hexlify(header.user_id),
        "approval_digest": hexlify(header.approval_digest),
        "block_hash": hexlify(block.block_hash),
        "transactions": [
            {
                "kind": tx.kind.name,
                "patient_id": hexlify(tx.patient_id),
                "created_at": tx.created_at,
                "payload": hexlify(tx.payload),
            }
            for tx in block.transactions
        ],
        "approvals": [
            {"miner_id": hexlify(a.miner_id), "signature": hexlify(a.signature)}
            for a in block.approvals
        ],
    }
