"""Test configuration schema validation using the example config file"""

import os
import tempfile
import unittest

import voluptuous.error
import voluptuous.humanize
import yaml

from glucoguard.common.config import ConfigurationError, GlucoguardConfig, apply_env_overrides, get_config
from glucoguard.common.config_misc import DosingPolicy
from glucoguard.common.config_schema import GLUCOGUARD_CONFIG_SCHEMA

CONFIG_DIR = os.path.join(os.path.dirname(__file__), "..", "..", "..", "..", "config")


class TestConfigSchema(unittest.TestCase):
    def setUp(self):
        self.tmpdir = tempfile.TemporaryDirectory()
        self.example = os.path.join(CONFIG_DIR, "glucoguard.yaml")
        if not os.path.isfile(self.example):
            self.skipTest("No example configuration")

    def tearDown(self):
        self.tmpdir.cleanup()

    def _write(self, data) -> str:
        path = os.path.join(self.tmpdir.name, "config.yaml")
        with open(path, "w") as fd:
            fd.write(data if isinstance(data, str) else yaml.dump(data))
        return path

    def test_example_config(self):
        """Test the annotated example config"""
        with open(self.example) as input_file:
            config = yaml.safe_load(input_file)
        voluptuous.humanize.validate_with_humanized_errors(config, GLUCOGUARD_CONFIG_SCHEMA)

    def test_bad_config(self):
        with self.assertRaises(voluptuous.error.Error):
            voluptuous.humanize.validate_with_humanized_errors({"xyzzy": False}, GLUCOGUARD_CONFIG_SCHEMA)

    def test_loading_from_file(self):
        config = get_config(self.example, environ={})
        self.assertEqual(config.gateway.port, 8080)
        self.assertEqual(config.gateway.webhook_url, "https://alerts.example.com/glucoguard")
        self.assertEqual(config.ledger.approval_threshold, "majority")
        self.assertEqual(config.detector.n_trees, 100)
        self.assertEqual(config.dosing.recheck_minutes, 15)
        self.assertEqual(config.dosing, DosingPolicy())

    def test_loading_from_file_error_handling(self):
        with self.assertRaises(ConfigurationError):
            get_config(self._write({"dosing": {"max_cycles": 0}}), environ={})
        with self.assertRaises(ConfigurationError):
            get_config(self._write({"gateway": {"port": 70000}}), environ={})
        with self.assertRaises(ConfigurationError):
            get_config(self._write("- just\n- a list\n"), environ={})
        with self.assertRaises(FileNotFoundError):
            get_config(os.path.join(self.tmpdir.name, "missing.yaml"))

    def test_defaults(self):
        config = get_config(None, environ={})
        self.assertEqual(config.gateway.host, "127.0.0.1")
        self.assertIsNone(config.ledger.store)
        self.assertEqual(config.identity.block_threshold, 3)
        self.assertEqual(config.detector.threshold, 0.5)
        self.assertEqual(config.dosing.reservoir_ml, 2.0)

    def test_environment_overrides(self):
        environ = {
            "GLUCOGUARD_GATEWAY_PORT": "8443",
            "GLUCOGUARD_GATEWAY_AUTO_APPROVE": "false",
            "GLUCOGUARD_DOSING_RESERVOIR_ML": "3.0",
            "HOME": "/root",
        }
        config = get_config(self.example, environ=environ)
        self.assertEqual(config.gateway.port, 8443)
        self.assertFalse(config.gateway.auto_approve)
        self.assertEqual(config.dosing.reservoir_ml, 3.0)

    def test_override_is_validated(self):
        with self.assertRaises(ConfigurationError):
            get_config(self.example, environ={"GLUCOGUARD_GATEWAY_PORT": "0"})

    def test_apply_env_overrides(self):
        res = apply_env_overrides({"ledger": {"store": "a.blocks"}}, {"GLUCOGUARD_LEDGER_APPROVAL_THRESHOLD": "2"})
        self.assertEqual(res, {"ledger": {"store": "a.blocks", "approval_threshold": 2}})

    def test_merge_update(self):
        config = GlucoguardConfig({})
        self.assertEqual(config.dosing.max_cycles, 4)
        config.merge_update({"dosing": {"max_cycles": 2}})
        self.assertEqual(config.dosing.max_cycles, 2)


if __name__ == "__main__":
    unittest.main()
