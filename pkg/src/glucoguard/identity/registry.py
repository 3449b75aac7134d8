"""Registration Center and Administration Unit."""
from __future__ import annotations

import logging
import random
import secrets
import threading
from dataclasses import replace
from typing import Callable, Dict, List, Optional, Set, Tuple

from glucoguard.common.integrity import hexlify, sha256
from glucoguard.identity.data import (
    Action,
    AgeClass,
    AuthResult,
    DenyReason,
    DuplicateRegistration,
    Effect,
    MissingField,
    Relation,
    RegistrationRequest,
    Role,
    Status,
    UnknownLinkedPatient,
    UnknownMiner,
    UnknownUser,
    UserIdentity,
)
from glucoguard.identity.policy import PolicyList

__author__ = "glucoguard"

logger = logging.getLogger(__name__)

KEY_SIZE = 32


def sign_approval(miner_key: bytes, merkle_root: bytes) -> bytes:
    """Keyed digest standing in for a miner signature."""
    return sha256(miner_key + merkle_root)


def _short(user_id: bytes) -> str:
    return hexlify(user_id)[:16]


class Registry:
    """
    Issues ids and keys, authenticates and authorizes users, blocks violators.

    Also acts as the ledger's miner directory. Mutations are serialized by a lock.
    """

    def __init__(
        self,
        seed: Optional[int] = None,
        block_threshold: int = 3,
        policy: Optional[PolicyList] = None,
    ):
        """
        Create an empty registry.

        :param seed: make id and key generation reproducible
        :param block_threshold: violations before a user is blocked
        """
        self._rng: Optional[random.Random] = random.Random(seed) if seed is not None else None
        self.block_threshold = block_threshold
        self.policy = policy or PolicyList()
        self._users: Dict[bytes, UserIdentity] = {}
        self._keys: Set[bytes] = set()
        self._emails: Set[Tuple[Role, str]] = set()
        self._lock = threading.RLock()
        # called after every mutation, the identity store hooks in here
        self.on_change: Optional[Callable[[Registry], None]] = None

    def _random_bytes(self) -> bytes:
        if self._rng is None:
            return secrets.token_bytes(KEY_SIZE)
        return self._rng.getrandbits(KEY_SIZE * 8).to_bytes(KEY_SIZE, "big")

    def _new_credentials(self) -> Tuple[bytes, bytes]:
        while True:
            user_id = self._random_bytes()
            key = self._random_bytes()
            taken = (user_id in self._users or user_id in self._keys) or (
                key in self._users or key in self._keys
            )
            if user_id != key and not taken:
                return user_id, key

    def _changed(self) -> None:
        if self.on_change is not None:
            self.on_change(self)

    @property
    def users(self) -> List[UserIdentity]:
        """All identities, in registration order."""
        return list(self._users.values())

    def get(self, user_id: bytes) -> UserIdentity:
        """Look up an identity."""
        try:
            return self._users[user_id]
        except KeyError:
            raise UnknownUser(f"No user with id {hexlify(user_id)}")

    def is_registered(self, user_id: bytes) -> bool:
        """True for any known id."""
        return user_id in self._users

    def add(self, identity: UserIdentity) -> None:
        """Insert a stored identity (used when loading the identity store)."""
        with self._lock:
            if identity.user_id in self._users or identity.public_key in self._keys:
                raise DuplicateRegistration(f"Id or key of {_short(identity.user_id)} already in use")
            self._users[identity.user_id] = identity
            self._keys.add(identity.public_key)
            self._emails.add((identity.role, identity.profile.email))

    def register(self, request: RegistrationRequest) -> Tuple[bytes, bytes]:
        """
        Register a patient, doctor or relative.

        Doctors and relatives must present at least one linked patient's id and key;
        they are recorded as miners of those patients.
        """
        for name in ["name", "date_of_birth", "email"]:
            if not getattr(request.profile, name):
                raise MissingField(f"Registration without {name}")
        if request.role is Role.Doctor:
            for name in ["qualification", "job_details"]:
                if not getattr(request, name):
                    raise MissingField(f"Doctor registration without {name}")
        with self._lock:
            if (request.role, request.profile.email) in self._emails:
                raise DuplicateRegistration(
                    f"{request.role.value} with email {request.profile.email} already registered"
                )
            links: List[bytes] = []
            if request.role is not Role.Patient:
                if not request.linked:
                    raise UnknownLinkedPatient(
                        f"{request.role.value} registration without a linked patient id and key"
                    )
                for cred in request.linked:
                    patient = self._users.get(cred.patient_id)
                    if (
                        patient is None
                        or patient.role is not Role.Patient
                        or patient.public_key != cred.public_key
                    ):
                        raise UnknownLinkedPatient(
                            f"Linked patient {_short(cred.patient_id)} does not verify"
                        )
                    if cred.patient_id not in links:
                        links.append(cred.patient_id)

            user_id, key = self._new_credentials()
            identity = UserIdentity(
                user_id=user_id,
                public_key=key,
                role=request.role,
                profile=request.profile,
                age_class=(request.age_class or AgeClass.Adult)
                if request.role is Role.Patient
                else None,
                qualification=request.qualification,
                job_details=request.job_details,
                links=tuple(links),
            )
            self.add(identity)
            for patient_id in links:
                patient = self._users[patient_id]
                self._users[patient_id] = replace(
                    patient, miner_ids=patient.miner_ids + (user_id,)
                )
            logger.info(
                f"AUTHN: Registered {request.role.value} {_short(user_id)} "
                f"linked to {len(links)} patients"
            )
            self._changed()
        return user_id, key

    def _record_violation(self, user_id: bytes, what: str) -> None:
        user = self._users[user_id]
        count = user.violation_count + 1
        status = user.status
        if count >= self.block_threshold and status is Status.Active:
            status = Status.Blocked
            logger.warning(
                f"AUTHZ: User {_short(user_id)} blocked after {count} violations"
            )
        self._users[user_id] = replace(user, violation_count=count, status=status)
        logger.warning(f"AUTHZ: Violation {count} by {_short(user_id)}: {what}")
        self._changed()

    def authenticate(self, user_id: bytes, public_key: bytes) -> AuthResult:
        """Authenticated iff an Active identity matches both id and key."""
        with self._lock:
            user = self._users.get(user_id)
            if user is None:
                logger.warning(f"AUTHN: Unknown id {_short(user_id)}")
                return AuthResult(user_id, DenyReason.UnknownId)
            if user.status is Status.Blocked:
                logger.warning(f"AUTHN: Blocked user {_short(user_id)}")
                return AuthResult(user_id, DenyReason.Blocked)
            if not secrets.compare_digest(user.public_key, public_key):
                self._record_violation(user_id, "key mismatch")
                return AuthResult(user_id, DenyReason.KeyMismatch)
        logger.debug(f"AUTHN: {_short(user_id)} authenticated")
        return AuthResult(user_id)

    def relation(self, actor: UserIdentity, target_id: Optional[bytes]) -> Relation:
        """How the target patient relates to the actor."""
        if target_id == actor.user_id:
            return Relation.Self
        if target_id is not None and target_id in actor.links:
            return Relation.LinkedPatient
        return Relation.Any

    def permits(self, actor_id: bytes, action: Action, target_id: Optional[bytes]) -> Effect:
        """Policy lookup without side effects."""
        actor = self._users.get(actor_id)
        if actor is None or actor.status is Status.Blocked:
            return Effect.Deny
        return self.policy.resolve(actor.role, action, self.relation(actor, target_id))

    def authorize(self, actor_id: bytes, action: Action, target_id: Optional[bytes]) -> Effect:
        """
        Resolve an interaction against the policy list.

        A Deny counts as a violation; reaching the block threshold blocks the actor.
        """
        with self._lock:
            effect = self.permits(actor_id, action, target_id)
            target = _short(target_id) if target_id else "-"
            if effect is Effect.Deny:
                if actor_id in self._users:
                    self._record_violation(actor_id, f"{action.value} on {target}")
                else:
                    logger.warning(f"AUTHZ: Unknown actor {_short(actor_id)}")
            else:
                logger.info(f"AUTHZ: {action.value} by {_short(actor_id)} on {target} allowed")
        return effect

    def miners_of(self, patient_id: bytes) -> List[bytes]:
        """The patient, their linked doctors and relatives, sorted by id."""
        user = self._users.get(patient_id)
        if user is None or user.role is not Role.Patient:
            return []
        return sorted({patient_id, *user.miner_ids})

    def verify_approval(self, miner_id: bytes, signature: bytes, merkle_root: bytes) -> bool:
        """Recompute a miner's signature with the stored key. Blocked miners never verify."""
        user = self._users.get(miner_id)
        if user is None:
            raise UnknownMiner(f"No miner with id {hexlify(miner_id)}")
        if user.status is Status.Blocked:
            return False
        return secrets.compare_digest(sign_approval(user.public_key, merkle_root), signature)
