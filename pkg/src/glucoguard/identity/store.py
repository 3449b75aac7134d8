"""Identity store: one JSON object per line, ids and keys in lower case hex."""
from __future__ import annotations

import json
import logging
import os
from dataclasses import asdict
from typing import Any, Dict, Optional

from glucoguard.common.integrity import checksum_bytes2str, hexlify, unhexlify
from glucoguard.identity.data import (
    AgeClass,
    IdentityError,
    Profile,
    Role,
    Status,
    UserIdentity,
)
from glucoguard.identity.registry import Registry

__author__ = "glucoguard"

logger = logging.getLogger(__name__)


def identity_to_dict(user: UserIdentity) -> Dict[str, Any]:
    """JSON friendly form of an identity."""
    return {
        "user_id": hexlify(user.user_id),
        "public_key": hexlify(user.public_key),
        "role": user.role.value,
        "profile": asdict(user.profile),
        "status": user.status.value,
        "violation_count": user.violation_count,
        "age_class": user.age_class.value if user.age_class else None,
        "qualification": user.qualification,
        "job_details": user.job_details,
        "links": [hexlify(x) for x in user.links],
        "miner_ids": [hexlify(x) for x in user.miner_ids],
    }


def identity_from_dict(data: Dict[str, Any]) -> UserIdentity:
    """Parse one identity store line."""
    try:
        return UserIdentity(
            user_id=unhexlify(data["user_id"]),
            public_key=unhexlify(data["public_key"]),
            role=Role(data["role"]),
            profile=Profile(**data["profile"]),
            status=Status(data["status"]),
            violation_count=int(data["violation_count"]),
            age_class=AgeClass(data["age_class"]) if data.get("age_class") else None,
            qualification=data.get("qualification"),
            job_details=data.get("job_details"),
            links=tuple(unhexlify(x) for x in data.get("links", [])),
            miner_ids=tuple(unhexlify(x) for x in data.get("miner_ids", [])),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise IdentityError(f"Malformed identity record: {exc}") from exc


def save_identities(path: str, registry: Registry) -> None:
    """Write every identity, replacing the file atomically."""
    data = "".join(
        json.dumps(identity_to_dict(user), sort_keys=True) + "\n" for user in registry.users
    ).encode()
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fd:
        fd.write(data)
    os.replace(tmp, path)
    logger.debug(f"Wrote {len(registry.users)} identities to {path} {checksum_bytes2str(data)}")


def load_identities(
    path: str, seed: Optional[int] = None, block_threshold: int = 3
) -> Registry:
    """Load an identity store into a new registry."""
    registry = Registry(seed=seed, block_threshold=block_threshold)
    with open(path, "rb") as fd:
        data = fd.read()
    for lineno, line in enumerate(data.decode().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise IdentityError(f"{path}:{lineno}: {exc}") from exc
        registry.add(identity_from_dict(record))
    logger.info(
        f"Loaded {len(registry.users)} identities from {path} {checksum_bytes2str(data)}"
    )
    return registry


def open_registry(
    path: Optional[str], seed: Optional[int] = None, block_threshold: int = 3
) -> Registry:
    """Registry backed by an identity store file that is rewritten on every change."""
    if path and os.path.exists(path):
        registry = load_identities(path, seed=seed, block_threshold=block_threshold)
    else:
        registry = Registry(seed=seed, block_threshold=block_threshold)
    if path:
        _path = path
        registry.on_change = lambda reg: save_identities(_path, reg)
    return registry
