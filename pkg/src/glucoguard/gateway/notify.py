"""
Notification sink standing in for the mobile application.

Every notification is appended to a JSON-lines log and, when a webhook is configured,
POSTed there from a worker thread. Delivery problems are logged and written to the
notification log as well, they never reach the dosing path.
"""
from __future__ import annotations

import json
import logging
import os
import threading
from collections import deque
from concurrent.futures import Future, ThreadPoolExecutor
from typing import Any, Deque, Dict, List, Optional

import requests

from glucoguard.common.integrity import hexlify
from glucoguard.dosing.data import Notification

__author__ = "glucoguard"

logger = logging.getLogger(__name__)


class Notifier:
    """
    Fire-and-forget notification delivery.

    The last max_records records are kept in memory in the order they were written.
    All of them are appended to `log_path' when one is given.
    """

    def __init__(
        self,
        log_path: Optional[str] = None,
        webhook_url: Optional[str] = None,
        timeout: float = 2.0,
        workers: int = 2,
        max_records: int = 1000,
    ):
        """Create a notifier. The worker pool is only started when there is a webhook."""
        self.log_path = log_path
        self.webhook_url = webhook_url
        self.timeout = timeout
        self.records: Deque[Dict[str, Any]] = deque(maxlen=max_records)
        self._lock = threading.Lock()
        self._executor: Optional[ThreadPoolExecutor] = None
        if webhook_url:
            self._executor = ThreadPoolExecutor(max_workers=workers, thread_name_prefix="notify")

    def _write(self, record: Dict[str, Any]) -> None:
        with self._lock:
            self.records.append(record)
            if self.log_path:
                with open(self.log_path, "a") as fd:
                    fd.write(json.dumps(record, sort_keys=True) + "\n")

    def notify(self, notification: Notification) -> Optional[Future]:
        """Log a notification and hand it to the webhook, if any. Never raises."""
        event = notification.to_dict()
        try:
            self._write({"record": "notification", **event})
        except OSError as exc:
            logger.error(f"NOTIFY: Could not write notification log {self.log_path}: {exc}")
        logger.info(
            f"NOTIFY: {event['kind']} ({event['severity']}) for {event['patient_id'][:16]} "
            f"to {', '.join(notification.recipients)}"
        )
        if self._executor is None:
            return None
        return self._executor.submit(self._deliver, event)

    def _deliver(self, event: Dict[str, Any]) -> bool:
        assert self.webhook_url is not None
        try:
            response = requests.post(self.webhook_url, json=event, timeout=self.timeout)
            response.raise_for_status()
        except requests.RequestException as exc:
            logger.warning(f"NOTIFY: Delivery of {event['kind']} to {self.webhook_url} failed: {exc}")
            try:
                self._write(
                    {
                        "record": "delivery_failure",
                        "kind": event["kind"],
                        "patient_id": event["patient_id"],
                        "timestamp": event["timestamp"],
                        "error": str(exc),
                    }
                )
            except OSError:
                pass
            return False
        logger.debug(f"NOTIFY: Delivered {event['kind']} to {self.webhook_url}")
        return True

    def acknowledge(self, patient_id: bytes, actor_id: bytes, timestamp: int, note: str = "") -> Dict[str, Any]:
        """Note in the log that someone has attended to the patient's alerts."""
        record = {
            "record": "acknowledgment",
            "patient_id": hexlify(patient_id),
            "actor_id": hexlify(actor_id),
            "timestamp": timestamp,
            "note": note,
        }
        self._write(record)
        logger.info(f"NOTIFY: Alerts of {hexlify(patient_id)[:16]} acknowledged by {hexlify(actor_id)[:16]}")
        return record

    def notifications(self, patient_id: Optional[bytes] = None) -> List[Dict[str, Any]]:
        """Notification records, optionally of one patient."""
        with self._lock:
            records = list(self.records)
        return [
            r
            for r in records
            if r["record"] == "notification" and (patient_id is None or r["patient_id"] == hexlify(patient_id))
        ]

    def close(self) -> None:
        """Wait for pending deliveries."""
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None


def read_notification_log(path: str) -> List[Dict[str, Any]]:
    """Records of a notification log file, empty if there is none."""
    if not os.path.exists(path):
        return []
    with open(path) as fd:
        return [json.loads(line) for line in fd if line.strip()]
