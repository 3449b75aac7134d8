"""Sub-package with the Registration Center and Administration Unit."""
from glucoguard.identity.data import Action, Effect, Role, UserIdentity  # noqa
from glucoguard.identity.registry import Registry, sign_approval  # noqa

__author__ = "glucoguard"
