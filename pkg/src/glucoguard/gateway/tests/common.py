import unittest
from typing import Any, Dict, List, Optional, Tuple

from glucoguard.common.config_misc import DosingPolicy
from glucoguard.common.integrity import hexlify, unhexlify
from glucoguard.devices.tests.common import noiseless_model
from glucoguard.dosing.controller import DosingController
from glucoguard.gateway.notify import Notifier
from glucoguard.gateway.server import generate_app
from glucoguard.gateway.service import GlucoguardService
from glucoguard.identity.registry import Registry
from glucoguard.ledger.chain import Ledger
from glucoguard.ledger.tests.common import Counter


def reading_batch(glucose: float, t: int = 1000, symptoms: bool = False) -> List[Dict[str, Any]]:
    """The seven readings of one observation, heart rate in bpm."""
    symptom = 1 if symptoms else 0
    return [
        {"feature": "glucose", "value": glucose, "source": "CGM", "t": t},
        {"feature": "systolic_bp", "value": 120, "source": "Smartwatch", "t": t},
        {"feature": "heart_rate", "value": 92, "source": "Smartwatch", "t": t},
        {"feature": "diastolic_bp", "value": 80, "source": "Smartwatch", "t": t},
        {"feature": "body_temp", "value": 36.6, "source": "Smartwatch", "t": t},
        {"feature": "sweating", "value": symptom, "source": "Smartwatch", "t": t},
        {"feature": "shivering", "value": symptom, "source": "Smartwatch", "t": t},
    ]


class Test_Gateway(unittest.TestCase):
    """A gateway with a patient and the patient's doctor registered over HTTP."""

    auto_approve = True
    record_retrievals = False
    reservoir_ml = 1.2

    def setUp(self) -> None:
        self.registry = Registry(seed=1)
        self.ledger = Ledger(directory=self.registry, clock=Counter())
        self.controller = DosingController(DosingPolicy(reservoir_ml=self.reservoir_ml))
        self.notifier = self.make_notifier()
        self.service = GlucoguardService(
            self.registry,
            self.ledger,
            self.controller,
            model=noiseless_model(),
            notifier=self.notifier,
            auto_approve=self.auto_approve,
            record_retrievals=self.record_retrievals,
            clock=Counter(),
        )
        self.app = generate_app(self.service)
        self.client = self.app.test_client()
        self.patient, self.patient_key = self.register_patient("pat@example.com")
        self.doctor, self.doctor_key = self.register_doctor(self.patient, self.patient_key, "doc@example.com")

    def tearDown(self) -> None:
        self.service.close()

    def make_notifier(self) -> Notifier:
        return Notifier()

    def _register(self, body: Dict[str, Any]) -> Tuple[bytes, bytes]:
        response = self.client.post("/register", json=body)
        self.assertEqual(response.status_code, 201, response.get_json())
        data = response.get_json()
        return unhexlify(data["user_id"]), unhexlify(data["public_key"])

    def register_patient(self, email: str, age_class: str = "Adult") -> Tuple[bytes, bytes]:
        return self._register(
            {
                "role": "Patient",
                "age_class": age_class,
                "profile": {"name": "Pat", "date_of_birth": "1980-01-01", "email": email},
            }
        )

    def register_doctor(self, patient_id: bytes, key: bytes, email: str) -> Tuple[bytes, bytes]:
        return self._register(
            {
                "role": "Doctor",
                "qualification": "MD",
                "job_details": "Endocrinology",
                "profile": {"name": "Doc", "date_of_birth": "1970-01-01", "email": email},
                "linked": [{"patient_id": hexlify(patient_id), "public_key": hexlify(key)}],
            }
        )

    @staticmethod
    def headers(user_id: bytes, key: bytes) -> Dict[str, str]:
        return {"X-User-Id": hexlify(user_id), "X-User-Key": hexlify(key)}

    def ingest(
        self, glucose: float, t: int = 1000, symptoms: bool = False, credentials: Optional[Tuple[bytes, bytes]] = None
    ):
        user_id, key = credentials or (self.patient, self.patient_key)
        return self.client.post(
            "/ingest",
            json={"patient_id": hexlify(self.patient), "readings": reading_batch(glucose, t, symptoms)},
            headers=self.headers(user_id, key),
        )

    def get(self, path: str, user_id: bytes, key: bytes):
        return self.client.get(path, headers=self.headers(user_id, key))
