"""Load and parse configuration."""
from __future__ import annotations

import logging
import os
from typing import IO, Dict, Mapping, Optional, Type

import voluptuous.error
import voluptuous.humanize
import yaml

from glucoguard.common.config_misc import (
    DetectorPolicy,
    DosingPolicy,
    GatewayPolicy,
    IdentityPolicy,
    LedgerPolicy,
)
from glucoguard.common.config_schema import GLUCOGUARD_CONFIG_SCHEMA
from glucoguard.common.errors import ConfigurationError
from glucoguard.common.integrity import checksum_bytes2str

__author__ = "glucoguard"

logger = logging.getLogger(__name__)

ENV_PREFIX = "GLUCOGUARD_"
SECTIONS = ["gateway", "ledger", "identity", "detector", "dosing"]


class GlucoguardConfig:
    """
    Configuration object.

    Holds configuration loaded from glucoguard.yaml.
    """

    def __init__(self, data: Mapping):
        """Initialise configuration from a Mapping."""
        self._data: Dict[str, dict] = {k: dict(v) for k, v in data.items()}
        # lazily parsed parts of the configuration.
        self._gateway: Optional[GatewayPolicy] = None
        self._ledger: Optional[LedgerPolicy] = None
        self._identity: Optional[IdentityPolicy] = None
        self._detector: Optional[DetectorPolicy] = None
        self._dosing: Optional[DosingPolicy] = None

    @property
    def gateway(self) -> GatewayPolicy:
        """
        HTTP service settings.

        Example:
        -------
            gateway:
              host: 127.0.0.1
              port: 8080
              webhook_url: https://example.com/hook
              notification_log: notifications.jsonl

        """
        if self._gateway is None:
            self._gateway = GatewayPolicy.from_dict(self._data.get("gateway", {}))
        return self._gateway

    @property
    def ledger(self) -> LedgerPolicy:
        """
        Ledger settings.

        Example:
        -------
            ledger:
              store: chain.blocks
              approval_threshold: majority

        """
        if self._ledger is None:
            self._ledger = LedgerPolicy.from_dict(self._data.get("ledger", {}))
        return self._ledger

    @property
    def identity(self) -> IdentityPolicy:
        """
        Identity store and violation settings.

        Example:
        -------
            identity:
              store: identities.jsonl
              block_threshold: 3

        """
        if self._identity is None:
            self._identity = IdentityPolicy.from_dict(self._data.get("identity", {}))
        return self._identity

    @property
    def detector(self) -> DetectorPolicy:
        """
        Detection model settings.

        Example:
        -------
            detector:
              model: model.ggrf
              threshold: 0.5

        """
        if self._detector is None:
            self._detector = DetectorPolicy.from_dict(self._data.get("detector", {}))
        return self._detector

    @property
    def dosing(self) -> DosingPolicy:
        """
        Rescue protocol settings.

        Example:
        -------
            dosing:
              reservoir_ml: 2.0
              max_cycles: 4

        """
        if self._dosing is None:
            self._dosing = DosingPolicy.from_dict(self._data.get("dosing", {}))
        return self._dosing

    def merge_update(self, data: Mapping) -> None:
        """Merge-update configuration on the fly. Usable in tests."""
        logger.warning(f"Merging configuration (sections {list(data.keys())})")
        for k, v in data.items():
            self._data.setdefault(k, {}).update(v)
        self._gateway = self._ledger = self._identity = None
        self._detector = self._dosing = None

    @classmethod
    def from_yaml(
        cls: Type[GlucoguardConfig],
        stream: IO,
        environ: Optional[Mapping[str, str]] = None,
    ) -> GlucoguardConfig:
        """Load configuration from a YAML stream, then apply environment overrides."""
        config = yaml.safe_load(stream) or {}
        if not isinstance(config, dict):
            raise ConfigurationError("Configuration must be a mapping")
        config = apply_env_overrides(config, os.environ if environ is None else environ)
        try:
            voluptuous.humanize.validate_with_humanized_errors(
                config, GLUCOGUARD_CONFIG_SCHEMA
            )
            logger.info("Configuration validated")
        except voluptuous.error.Error as exc:
            raise ConfigurationError(str(exc))
        return cls(config)


def apply_env_overrides(config: dict, environ: Mapping[str, str]) -> dict:
    """
    Override configuration values from GLUCOGUARD_<SECTION>_<KEY> environment variables.

    Values are parsed as YAML scalars, so 'true', '8080' and 'null' get their natural types.
    """
    res = {k: dict(v or {}) for k, v in config.items()}
    for name, value in sorted(environ.items()):
        if not name.startswith(ENV_PREFIX):
            continue
        rest = name[len(ENV_PREFIX) :].lower()
        for section in SECTIONS:
            if rest.startswith(section + "_"):
                key = rest[len(section) + 1 :]
                res.setdefault(section, {})[key] = yaml.safe_load(value)
                logger.info(f"Configuration {section}.{key} overridden from {name}")
                break
    return res


def get_config(
    filename: Optional[str], environ: Optional[Mapping[str, str]] = None
) -> GlucoguardConfig:
    """Top-level function to load configuration, or return a default instance."""
    if not filename:
        # Avoid having Optional[GlucoguardConfig] everywhere by always having a config, even if it is empty
        logger.warning(
            "No configuration filename provided, using default configuration."
        )
        return GlucoguardConfig.from_yaml(
            "{}", environ=environ if environ is not None else os.environ
        )
    with open(filename, "rb") as fd:
        config_bytes = fd.read()
        logger.info(
            "Loaded configuration from file %s %s",
            filename,
            checksum_bytes2str(config_bytes),
        )
        fd.seek(0)
        return GlucoguardConfig.from_yaml(fd, environ=environ)
