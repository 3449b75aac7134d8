import unittest
from itertools import product

import numpy as np

from glucoguard.common.integrity import sha256
from glucoguard.identity.data import (
    Action,
    AgeClass,
    DenyReason,
    DuplicateRegistration,
    LinkedCredentials,
    Effect,
    MissingField,
    Profile,
    RegistrationRequest,
    Relation,
    Role,
    Status,
    UnknownLinkedPatient,
    UnknownMiner,
    UnknownUser,
)
from glucoguard.identity.policy import PolicyList
from glucoguard.identity.registry import Registry, sign_approval
from glucoguard.identity.tests.common import (
    doctor_request,
    patient_request,
    relative_request,
)
from glucoguard.ledger.chain import InvalidSignature, Ledger
from glucoguard.ledger.data import (
    MinerApproval,
    TransactionKind,
    TransactionRecord,
    hash_transaction,
)
from glucoguard.ledger.merkle import merkle_root


class Test_Registry(unittest.TestCase):
    def setUp(self):
        self.registry = Registry(seed=1)
        self.patient, self.patient_key = self.registry.register(patient_request())
        self.doctor, self.doctor_key = self.registry.register(
            doctor_request(self.patient, self.patient_key)
        )
        self.other, self.other_key = self.registry.register(
            patient_request(email="other@example.com")
        )


class Test_Register(Test_Registry):
    def test_valid_patient(self):
        user_id, key = self.registry.register(patient_request(email="new@example.com"))
        self.assertEqual(len(user_id), 32)
        self.assertEqual(len(key), 32)
        self.assertNotEqual(user_id, key)
        user = self.registry.get(user_id)
        self.assertEqual(user.status, Status.Active)
        self.assertEqual(user.age_class, AgeClass.Adult)

    def test_seeded_is_reproducible(self):
        other = Registry(seed=1)
        self.assertEqual(other.register(patient_request()), (self.patient, self.patient_key))

    def test_doctor_without_patient(self):
        request = RegistrationRequest(
            role=Role.Doctor,
            profile=Profile(name="Doc", date_of_birth="1970-01-01", email="d2@example.com"),
            qualification="MD",
            job_details="GP",
        )
        with self.assertRaises(UnknownLinkedPatient):
            self.registry.register(request)

    def test_doctor_with_wrong_key(self):
        with self.assertRaises(UnknownLinkedPatient):
            self.registry.register(doctor_request(self.patient, self.other_key, email="d3@example.com"))
        # a doctor id is not a patient
        with self.assertRaises(UnknownLinkedPatient):
            self.registry.register(doctor_request(self.doctor, self.doctor_key, email="d4@example.com"))

    def test_duplicate(self):
        with self.assertRaises(DuplicateRegistration):
            self.registry.register(patient_request())
        # same email with another role is fine
        self.registry.register(relative_request(self.patient, self.patient_key, email="pat@example.com"))

    def test_missing_field(self):
        request = RegistrationRequest(
            role=Role.Patient,
            profile=Profile(name="", date_of_birth="1980-01-01", email="x@example.com"),
        )
        with self.assertRaises(MissingField):
            self.registry.register(request)
        request = RegistrationRequest(
            role=Role.Doctor,
            profile=Profile(name="D", date_of_birth="1980-01-01", email="x@example.com"),
            linked=(LinkedCredentials(self.patient, self.patient_key),),
        )
        with self.assertRaises(MissingField):
            self.registry.register(request)

    def test_unknown_user(self):
        with self.assertRaises(UnknownUser):
            self.registry.get(b"\x00" * 32)

    def test_unique_ids_and_keys(self):
        """ No two identities share an id or a key """
        registry = Registry(seed=7)
        seen = set()
        for i in range(10000):
            user_id, key = registry.register(patient_request(email=f"p{i}@example.com"))
            self.assertNotEqual(user_id, key)
            self.assertNotIn(user_id, seen)
            self.assertNotIn(key, seen)
            seen.update([user_id, key])
        self.assertEqual(len(seen), 20000)

    def test_miners_of(self):
        relative, _ = self.registry.register(relative_request(self.patient, self.patient_key))
        miners = self.registry.miners_of(self.patient)
        self.assertEqual(miners, sorted([self.patient, self.doctor, relative]))
        self.assertEqual(self.registry.miners_of(self.doctor), [])
        self.assertEqual(self.registry.miners_of(b"\x00" * 32), [])


class Test_Authenticate(Test_Registry):
    def test_ok(self):
        self.assertTrue(self.registry.authenticate(self.patient, self.patient_key).authenticated)

    def test_unknown(self):
        res = self.registry.authenticate(b"\x01" * 32, self.patient_key)
        self.assertEqual(res.reason, DenyReason.UnknownId)

    def test_key_mismatch_records_violation(self):
        res = self.registry.authenticate(self.patient, self.other_key)
        self.assertFalse(res.authenticated)
        self.assertEqual(res.reason, DenyReason.KeyMismatch)
        self.assertEqual(self.registry.get(self.patient).violation_count, 1)

    def test_blocked(self):
        for _ in range(3):
            self.registry.authenticate(self.patient, self.other_key)
        self.assertEqual(self.registry.get(self.patient).status, Status.Blocked)
        res = self.registry.authenticate(self.patient, self.patient_key)
        self.assertEqual(res.reason, DenyReason.Blocked)


class Test_Authorize(Test_Registry):
    def test_doctor_reads_linked_patient(self):
        self.assertEqual(
            self.registry.authorize(self.doctor, Action.ReadHistory, self.patient), Effect.Allow
        )
        self.assertEqual(
            self.registry.authorize(self.doctor, Action.ReadHistory, self.other), Effect.Deny
        )

    def test_patient_reads_other_patient(self):
        self.assertEqual(
            self.registry.authorize(self.patient, Action.ReadHistory, self.other), Effect.Deny
        )
        self.assertEqual(
            self.registry.authorize(self.patient, Action.ReadHistory, self.patient), Effect.Allow
        )

    def test_doctor_cannot_ingest(self):
        self.assertEqual(
            self.registry.authorize(self.doctor, Action.IngestVitals, self.patient), Effect.Deny
        )

    def test_relative_only_approves(self):
        relative, _ = self.registry.register(relative_request(self.patient, self.patient_key))
        self.assertEqual(
            self.registry.permits(relative, Action.ApproveBlock, self.patient), Effect.Allow
        )
        self.assertEqual(
            self.registry.permits(relative, Action.ReadHistory, self.patient), Effect.Deny
        )

    def test_third_deny_blocks(self):
        for i in range(2):
            self.registry.authorize(self.patient, Action.ReadHistory, self.other)
            self.assertEqual(self.registry.get(self.patient).status, Status.Active)
        self.registry.authorize(self.patient, Action.ReadHistory, self.other)
        self.assertEqual(self.registry.get(self.patient).status, Status.Blocked)
        self.assertEqual(self.registry.get(self.patient).violation_count, 3)
        # now even allowed actions are denied
        self.assertEqual(
            self.registry.authorize(self.patient, Action.ReadHistory, self.patient), Effect.Deny
        )

    def test_strict_threshold(self):
        registry = Registry(seed=2, block_threshold=1)
        patient, _ = registry.register(patient_request())
        registry.authorize(patient, Action.ReadHistory, b"\x00" * 32)
        self.assertEqual(registry.get(patient).status, Status.Blocked)

    def test_permits_is_pure(self):
        for _ in range(5):
            self.assertEqual(
                self.registry.permits(self.patient, Action.ReadHistory, self.other), Effect.Deny
            )
        self.assertEqual(self.registry.get(self.patient).violation_count, 0)

    def test_policy_is_total(self):
        policy = PolicyList()
        self.assertEqual(len(policy), len(Role) * len(Action) * len(Relation))
        for role, action, relation in product(Role, Action, Relation):
            self.assertIn(policy.resolve(role, action, relation), (Effect.Allow, Effect.Deny))
        self.assertEqual(policy.resolve(Role.Doctor, Action.IngestVitals, Relation.Self), Effect.Deny)
        self.assertEqual(policy.resolve(Role.Relative, Action.Register, Relation.Any), Effect.Allow)


class Test_Approvals(Test_Registry):
    def test_round_trip(self):
        root = sha256(b"root")
        sig = sign_approval(self.doctor_key, root)
        self.assertTrue(self.registry.verify_approval(self.doctor, sig, root))
        self.assertFalse(self.registry.verify_approval(self.doctor, sig, sha256(b"other")))

    def test_distinct_miners(self):
        rng = np.random.default_rng(4)
        for _ in range(500):
            root = rng.bytes(32)
            self.assertNotEqual(
                sign_approval(rng.bytes(32), root), sign_approval(rng.bytes(32), root)
            )

    def test_unknown_miner(self):
        with self.assertRaises(UnknownMiner):
            self.registry.verify_approval(b"\x00" * 32, b"\x00" * 32, b"\x00" * 32)

    def test_blocked_user_cannot_append(self):
        """ A blocked miner's approvals no longer verify, so it cannot help append blocks """
        ledger = Ledger(directory=self.registry, clock=lambda: 1_600_000_000)
        tx = TransactionRecord(
            kind=TransactionKind.VitalsData,
            patient_id=self.patient,
            payload=b"x",
            created_at=1_600_000_000,
        )
        root = merkle_root([hash_transaction(tx)])
        approvals = [
            MinerApproval(self.patient, sign_approval(self.patient_key, root)),
            MinerApproval(self.doctor, sign_approval(self.doctor_key, root)),
        ]
        for _ in range(3):
            self.registry.authorize(self.doctor, Action.ReadHistory, self.other)
        with self.assertRaises(InvalidSignature) as exc:
            ledger.append_block([tx], approvals, self.patient)
        self.assertEqual(exc.exception.miner_id, self.doctor)
        # with a threshold of one the patient alone may still append
        block = Ledger(directory=self.registry, threshold=1, clock=lambda: 1).append_block(
            [tx], approvals[:1], self.patient
        )
        self.assertEqual(block.index, 0)


if __name__ == "__main__":
    unittest.main()
