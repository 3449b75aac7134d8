"""The strict policy list of the Administration Unit."""
from __future__ import annotations

from itertools import product
from typing import Dict, Iterable, List, Tuple

from glucoguard.identity.data import Action, Effect, PolicyRule, Relation, Role

__author__ = "glucoguard"


PolicyKey = Tuple[Role, Action, Relation]

ALLOW_RULES: List[PolicyRule] = [
    PolicyRule(Role.Patient, Action.IngestVitals, Relation.Self, Effect.Allow),
    PolicyRule(Role.Patient, Action.ReadHistory, Relation.Self, Effect.Allow),
    PolicyRule(Role.Patient, Action.ReadPumpStatus, Relation.Self, Effect.Allow),
    PolicyRule(Role.Patient, Action.ApproveBlock, Relation.Self, Effect.Allow),
    PolicyRule(Role.Doctor, Action.ReadHistory, Relation.LinkedPatient, Effect.Allow),
    PolicyRule(Role.Doctor, Action.ReadPumpStatus, Relation.LinkedPatient, Effect.Allow),
    PolicyRule(Role.Doctor, Action.ApproveBlock, Relation.LinkedPatient, Effect.Allow),
    PolicyRule(Role.Relative, Action.ApproveBlock, Relation.LinkedPatient, Effect.Allow),
    PolicyRule(Role.Patient, Action.RefillPump, Relation.Self, Effect.Allow),
    PolicyRule(Role.Patient, Action.Acknowledge, Relation.Self, Effect.Allow),
    PolicyRule(Role.Doctor, Action.Acknowledge, Relation.LinkedPatient, Effect.Allow),
    PolicyRule(Role.Relative, Action.Acknowledge, Relation.LinkedPatient, Effect.Allow),
]
# anyone may file a registration request
ALLOW_RULES += [
    PolicyRule(role, Action.Register, relation, Effect.Allow)
    for role, relation in product(Role, Relation)
]


class PolicyList:
    """Total mapping of (role, action, relation) to an effect. Anything not allowed is denied."""

    def __init__(self, rules: Iterable[PolicyRule] = ALLOW_RULES):
        """Build the table, later rules override earlier ones."""
        self._table: Dict[PolicyKey, Effect] = {
            key: Effect.Deny for key in product(Role, Action, Relation)
        }
        for rule in rules:
            self._table[(rule.role, rule.action, rule.relation)] = rule.effect

    def resolve(self, role: Role, action: Action, relation: Relation) -> Effect:
        """Effect of one triple."""
        return self._table[(role, action, relation)]

    def __len__(self) -> int:
        return len(self._table)
