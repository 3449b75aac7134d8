"""Identity data classes."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

from glucoguard.common.errors import GlucoguardError

__author__ = "glucoguard"


class IdentityError(GlucoguardError):
    """Base class for identity errors."""


class DuplicateRegistration(IdentityError):
    """Same email already registered with the same role."""


class MissingField(IdentityError):
    """A required registration field is absent."""


class UnknownLinkedPatient(IdentityError):
    """A doctor or relative presented a patient id/key pair that does not verify."""


class UnknownMiner(IdentityError):
    """Approval from an id that is not registered."""


class UnknownUser(IdentityError):
    """No identity with this id."""


class Role(Enum):
    """Who a user is."""

    Patient = "Patient"
    Doctor = "Doctor"
    Relative = "Relative"


class AgeClass(Enum):
    """Decides the rescue dose."""

    Adult = "Adult"
    Child = "Child"


class Status(Enum):
    """Blocked users are denied everything."""

    Active = "Active"
    Blocked = "Blocked"


class Action(Enum):
    """Interactions guarded by the policy list."""

    IngestVitals = "IngestVitals"
    ReadHistory = "ReadHistory"
    ReadPumpStatus = "ReadPumpStatus"
    ApproveBlock = "ApproveBlock"
    Register = "Register"
    RefillPump = "RefillPump"
    Acknowledge = "Acknowledge"


class Relation(Enum):
    """How the target patient relates to the actor."""

    Self = "Self"
    LinkedPatient = "LinkedPatient"
    Any = "Any"


class Effect(Enum):
    """Outcome of a policy lookup."""

    Allow = "Allow"
    Deny = "Deny"


class DenyReason(Enum):
    """Why authentication failed."""

    UnknownId = "UnknownId"
    KeyMismatch = "KeyMismatch"
    Blocked = "Blocked"


@dataclass(frozen=True)
class Profile:
    name: str
    date_of_birth: str
    email: str
    phone: Optional[str] = None
    address: Optional[str] = None


@dataclass(frozen=True)
class LinkedCredentials:
    """Patient id and key a doctor or relative presents when registering."""

    patient_id: bytes
    public_key: bytes = field(repr=False)


@dataclass(frozen=True)
class RegistrationRequest:
    role: Role
    profile: Profile
    age_class: Optional[AgeClass] = None
    qualification: Optional[str] = None
    job_details: Optional[str] = None
    linked: Tuple[LinkedCredentials, ...] = field(default_factory=tuple)


@dataclass(frozen=True)
class UserIdentity:
    """
    A registered user.

    For doctors and relatives `links' are the linked patient ids. For patients
    `miner_ids' are the doctors and relatives registered against them.
    """

    user_id: bytes
    public_key: bytes = field(repr=False)
    role: Role
    profile: Profile
    status: Status = Status.Active
    violation_count: int = 0
    age_class: Optional[AgeClass] = None
    qualification: Optional[str] = None
    job_details: Optional[str] = None
    links: Tuple[bytes, ...] = field(default_factory=tuple)
    miner_ids: Tuple[bytes, ...] = field(default_factory=tuple)


@dataclass(frozen=True)
class AuthResult:
    """Authenticated when reason is None, otherwise Denied with a reason."""

    user_id: bytes
    reason: Optional[DenyReason] = None

    @property
    def authenticated(self) -> bool:
        """True if authentication succeeded."""
        return self.reason is None


@dataclass(frozen=True)
class PolicyRule:
    role: Role
    action: Action
    relation: Relation
    effect: Effect
