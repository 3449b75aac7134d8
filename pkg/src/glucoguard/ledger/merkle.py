"""Binary Merkle tree over transaction digests."""
from __future__ import annotations

from enum import Enum
from typing import List, NamedTuple, Sequence

from glucoguard.common.integrity import sha256
from glucoguard.ledger.data import LedgerError

__author__ = "glucoguard"


class EmptyLeafSet(LedgerError):
    """A Merkle root was requested over zero leaves."""


class IndexOutOfRange(LedgerError):
    """A proof was requested for a leaf that does not exist."""


class Side(Enum):
    """Which side of the running hash a sibling sits on."""

    Left = "L"
    Right = "R"


class ProofStep(NamedTuple):
    """One sibling digest on the path from a leaf to the root."""

    sibling: bytes
    side: Side


def _next_level(level: Sequence[bytes]) -> List[bytes]:
    if len(level) % 2:
        # odd level, duplicate the last digest
        level = list(level) + [level[-1]]
    return [sha256(level[i] + level[i + 1]) for i in range(0, len(level), 2)]


def merkle_root(leaf_digests: Sequence[bytes]) -> bytes:
    """
    Compute the Merkle root of an ordered list of digests.

    A single leaf is its own root.
    """
    if not leaf_digests:
        raise EmptyLeafSet("Cannot compute a Merkle root over zero leaves")
    level = list(leaf_digests)
    while len(level) > 1:
        level = _next_level(level)
    return level[0]


def merkle_proof(leaf_digests: Sequence[bytes], leaf_index: int) -> List[ProofStep]:
    """Inclusion proof for one leaf, ordered from the leaf level upwards."""
    if not 0 <= leaf_index < len(leaf_digests):
        raise IndexOutOfRange(
            f"Leaf index {leaf_index} outside 0..{len(leaf_digests) - 1}"
        )
    proof: List[ProofStep] = []
    level = list(leaf_digests)
    idx = leaf_index
    while len(level) > 1:
        if idx % 2 == 0:
            sibling = level[idx + 1] if idx + 1 < len(level) else level[idx]
            proof.append(ProofStep(sibling, Side.Right))
        else:
            proof.append(ProofStep(level[idx - 1], Side.Left))
        level = _next_level(level)
        idx //= 2
    return proof


def verify_merkle_proof(leaf: bytes, proof: Sequence[ProofStep], root: bytes) -> bool:
    """Replay an inclusion proof and compare against the expected root."""
    running = leaf
    for step in proof:
        if step.side is Side.Left:
            running = sha256(step.sibling + running)
        else:
            running = sha256(running + step.sibling)
    return running == root
