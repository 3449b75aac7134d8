"""Integrity checking helpers."""

import binascii
import hashlib

ZERO_DIGEST = bytes(32)


def sha256(message: bytes) -> bytes:
    """Create SHA-256 digest from bytes."""
    return hashlib.sha256(message).digest()


def hexlify(data: bytes) -> str:
    """Lower case hex string of some bytes."""
    return binascii.hexlify(data).decode()


def unhexlify(data: str, size: int = 32) -> bytes:
    """Parse a hex string of exactly `size' bytes."""
    try:
        res = binascii.unhexlify(data)
    except (binascii.Error, TypeError) as exc:
        raise ValueError(f"Invalid hex value {data!r}") from exc
    if len(res) != size:
        raise ValueError(f"Expected {size} bytes, got {len(res)}")
    return res


def checksum_bytes2str(message: bytes) -> str:
    """Format SHA-256 digest of some bytes for log messages."""
    return f"SHA-256 {hexlify(sha256(message))}"
