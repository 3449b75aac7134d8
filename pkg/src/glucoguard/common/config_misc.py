"""Sub-parts of GlucoguardConfig (in config.py)."""
from __future__ import annotations

from abc import ABC
from copy import deepcopy
from dataclasses import dataclass
from typing import Optional, Type, TypeVar, Union

__author__ = "glucoguard"


PolicyType = TypeVar("PolicyType", bound="Policy")


@dataclass(frozen=True)
class Policy(ABC):
    """Base class for the configuration sections."""

    # avoid upsetting type checker in from_dict below when arguments are passed to cls() without any attributes
    _dataclass_placeholder: Optional[bool] = None

    @classmethod
    def from_dict(cls: Type[PolicyType], data: dict) -> PolicyType:
        """Instantiate a section from a dict of values."""
        _data = deepcopy(data)  # don't mess with caller's data
        return cls(**_data)


@dataclass(frozen=True)
class GatewayPolicy(Policy):
    """HTTP service and notification settings."""

    host: str = "127.0.0.1"
    port: int = 8080
    webhook_url: Optional[str] = None
    webhook_timeout: float = 2.0
    notification_log: Optional[str] = None
    # Collect approvals from the miners known to the service instead of waiting for POST /approvals
    auto_approve: bool = True
    # Put a RetrievalGrant on the chain for every history read by someone else than the patient
    record_retrievals: bool = False


@dataclass(frozen=True)
class LedgerPolicy(Policy):
    """Block store settings."""

    store: Optional[str] = None
    # 'majority' of the patient's miners, or a fixed number of approvals
    approval_threshold: Union[str, int] = "majority"


@dataclass(frozen=True)
class IdentityPolicy(Policy):
    """Registration Center / Administration Unit settings."""

    store: Optional[str] = None
    # Set to 1 for "any unauthorized interaction blocks the user"
    block_threshold: int = 3
    seed: Optional[int] = None


@dataclass(frozen=True)
class DetectorPolicy(Policy):
    """Trained model location and forest defaults."""

    model: Optional[str] = None
    n_trees: int = 100
    max_depth: int = 4
    seed: int = 42
    features_per_split: int = 3
    bootstrap: bool = True
    min_samples_leaf: int = 1
    min_samples_split: int = 2
    threshold: float = 0.5


@dataclass(frozen=True)
class DosingPolicy(Policy):
    """Rescue protocol and pump settings."""

    reservoir_ml: float = 2.0
    max_cycles: int = 4
    recheck_minutes: int = 15
    refill_alert_doses: int = 5
    hypo_threshold: float = 70.0
