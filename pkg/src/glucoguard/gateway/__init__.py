"""Sub-package with the Health Information Unit and its HTTP gateway."""
from glucoguard.gateway.data import GatewayError, IngestSummary  # noqa
from glucoguard.gateway.notify import Notifier  # noqa
from glucoguard.gateway.service import GlucoguardService  # noqa

__author__ = "glucoguard"
