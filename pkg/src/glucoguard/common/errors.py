"""Base exception classes."""

__author__ = "glucoguard"


class GlucoguardError(Exception):
    """Base class for all errors raised by glucoguard."""


class ConfigurationError(GlucoguardError):
    """Base exception for errors in the configuration."""
