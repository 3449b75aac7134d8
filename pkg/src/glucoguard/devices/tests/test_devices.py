import json
import os
import tempfile
import unittest

import numpy as np

from glucoguard.devices.clock import VirtualClock
from glucoguard.devices.data import OutsideScenario, ScenarioFormatError, ScenarioScript, TimeReversal
from glucoguard.devices.scenario import PRESETS, get_preset, load_scenario, save_scenario, scenario_from_dict
from glucoguard.devices.sensors import GlucoseKinetics, next_reading
from glucoguard.devices.simulation import fresh_system, run_scenario
from glucoguard.devices.tests.common import noiseless_model
from glucoguard.fog.data import Feature, Source
from glucoguard.identity.data import AgeClass

PATIENT = b"\x07" * 32
SCENARIO_DIR = os.path.join(os.path.dirname(__file__), "..", "..", "..", "..", "config", "scenarios")


def _flat(value: float, noise: float = 0.0, duration: int = 3600) -> ScenarioScript:
    return ScenarioScript(
        name="flat", trajectory=((0, value), (duration, value)), duration_s=duration, noise_mg_dl=noise
    )


def _glucose(readings) -> float:
    return [r.value for r in readings if r.feature is Feature.glucose][0]


class Test_VirtualClock(unittest.TestCase):
    def test_advance_without_events(self):
        clock = VirtualClock()
        self.assertEqual(clock.advance(100), [])
        self.assertEqual(clock.now, 100)
        self.assertEqual(clock(), 100)

    def test_same_due_in_insertion_order(self):
        clock = VirtualClock()
        clock.schedule(10, "b")
        clock.schedule(5, "first")
        clock.schedule(10, "c")
        self.assertEqual(clock.advance(20), ["first", "b", "c"])
        self.assertEqual(len(clock), 0)

    def test_due_boundary(self):
        clock = VirtualClock()
        clock.schedule(10, "x")
        clock.schedule(11, "y")
        self.assertEqual(clock.advance(10), ["x"])
        self.assertEqual(clock.next_due, 11)

    def test_time_reversal(self):
        clock = VirtualClock(start=50)
        with self.assertRaises(TimeReversal):
            clock.advance(49)
        with self.assertRaises(TimeReversal):
            clock.schedule(10, "late")
        self.assertEqual(clock.now, 50)


class Test_Kinetics(unittest.TestCase):
    def test_ramp(self):
        kinetics = GlucoseKinetics()
        kinetics.add_dose(1000, AgeClass.Adult)
        self.assertEqual(kinetics.effect(999), 0.0)
        self.assertEqual(kinetics.effect(1000), 0.0)
        self.assertAlmostEqual(kinetics.effect(1450), 20.0)
        self.assertEqual(kinetics.effect(1900), 40.0)
        self.assertEqual(kinetics.effect(100000), 40.0)

    def test_child_and_scale(self):
        kinetics = GlucoseKinetics(scale=0.5)
        kinetics.add_dose(0, AgeClass.Child)
        self.assertEqual(kinetics.effect(900), 10.0)

    def test_doses_add_up(self):
        kinetics = GlucoseKinetics()
        kinetics.add_dose(0)
        kinetics.add_dose(900)
        self.assertEqual(kinetics.effect(900), 40.0)
        self.assertEqual(kinetics.effect(1800), 80.0)


class Test_NextReading(unittest.TestCase):
    def setUp(self):
        self.clock = VirtualClock()
        self.rng = np.random.default_rng(1)

    def test_flat_noiseless(self):
        readings = next_reading(_flat(100.0), GlucoseKinetics(), self.clock, self.rng, PATIENT)
        self.assertEqual(len(readings), 7)
        self.assertEqual({r.feature for r in readings}, set(Feature))
        self.assertEqual(_glucose(readings), 100.0)
        for r in readings:
            self.assertEqual(r.timestamp, 0)
            self.assertEqual(r.patient_id, PATIENT)
            self.assertEqual(r.source, Source.CGM if r.feature is Feature.glucose else Source.Smartwatch)
            if r.feature in (Feature.sweating, Feature.shivering):
                self.assertIn(r.value, (0, 1))

    def test_heart_rate_in_bpm(self):
        for _ in range(50):
            readings = next_reading(_flat(60.0), GlucoseKinetics(), self.clock, self.rng, PATIENT)
            bpm = [r.value for r in readings if r.feature is Feature.heart_rate][0]
            self.assertTrue(60000 / 769 <= bpm <= 60000 / 461, bpm)

    def test_dose_effect_after_ramp(self):
        kinetics = GlucoseKinetics()
        kinetics.add_dose(0, AgeClass.Adult)
        self.clock.advance(900)
        readings = next_reading(_flat(60.0), kinetics, self.clock, self.rng, PATIENT)
        self.assertEqual(_glucose(readings), 100.0)

    def test_first_sub_70_tick(self):
        script = ScenarioScript(
            name="crossing", trajectory=((0, 100.0), (1700, 70.0), (3400, 40.0)), duration_s=3400, noise_mg_dl=0.0
        )
        kinetics = GlucoseKinetics()
        below = []
        for t in range(0, 3401, 300):
            self.clock.advance(t)
            if _glucose(next_reading(script, kinetics, self.clock, self.rng, PATIENT)) < 70:
                below.append(t)
        self.assertEqual(below[0], 1800)

    def test_deterministic_per_seed(self):
        script = _flat(80.0, noise=2.0)
        first = next_reading(script, GlucoseKinetics(), self.clock, np.random.default_rng(9), PATIENT)
        second = next_reading(script, GlucoseKinetics(), self.clock, np.random.default_rng(9), PATIENT)
        self.assertEqual(first, second)

    def test_outside_scenario(self):
        self.clock.advance(3601)
        with self.assertRaises(OutsideScenario):
            next_reading(_flat(100.0), GlucoseKinetics(), self.clock, self.rng, PATIENT)


class Test_ScenarioFormat(unittest.TestCase):
    def setUp(self):
        self.tmpdir = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmpdir.cleanup()

    def _write(self, name: str, data) -> str:
        path = os.path.join(self.tmpdir.name, name)
        with open(path, "w") as fd:
            fd.write(data if isinstance(data, str) else json.dumps(data))
        return path

    def test_save_and_load(self):
        script = ScenarioScript(
            name="child", trajectory=((0, 90.0), (600, 65.5)), duration_s=600, age_class=AgeClass.Child, seed=4
        )
        path = os.path.join(self.tmpdir.name, "child.json")
        save_scenario(script, path)
        self.assertEqual(load_scenario(path), script)

    def test_defaults(self):
        script = scenario_from_dict({"trajectory": [[0, 100]], "duration_s": 600}, name="minimal")
        self.assertEqual(script.name, "minimal")
        self.assertEqual(script.interval_s, 300)
        self.assertEqual(script.age_class, AgeClass.Adult)
        self.assertEqual(script.noise_mg_dl, 2.0)

    def test_not_json(self):
        with self.assertRaises(ScenarioFormatError):
            load_scenario(self._write("bad.json", "{not json"))

    def test_missing_trajectory(self):
        with self.assertRaises(ScenarioFormatError):
            load_scenario(self._write("bad.json", {"duration_s": 600}))

    def test_times_not_increasing(self):
        with self.assertRaises(ScenarioFormatError):
            scenario_from_dict({"trajectory": [[0, 100], [600, 90], [600, 80]], "duration_s": 600})

    def test_glucose_out_of_range(self):
        with self.assertRaises(ScenarioFormatError):
            scenario_from_dict({"trajectory": [[0, 100], [600, 700]], "duration_s": 600})

    def test_bad_symptom_policy(self):
        with self.assertRaises(ScenarioFormatError):
            scenario_from_dict({"trajectory": [[0, 100]], "duration_s": 600, "symptom_policy": {"sweating": [0.5]}})
        with self.assertRaises(ScenarioFormatError):
            scenario_from_dict({"trajectory": [[0, 100]], "duration_s": 600, "symptom_policy": {"sweating": [1.5, 0]}})

    def test_unknown_preset(self):
        with self.assertRaises(ScenarioFormatError):
            get_preset("no-such-scenario")

    def test_shipped_scenarios_match_presets(self):
        if not os.path.isdir(SCENARIO_DIR):
            self.skipTest("No scenario directory")
        for name, preset in PRESETS.items():
            self.assertEqual(load_scenario(os.path.join(SCENARIO_DIR, f"{name}.json")), preset)


class Test_RunScenario(unittest.TestCase):
    def _run(self, name: str):
        script = get_preset(name)
        system = fresh_system(script, noiseless_model())
        return run_scenario(script, system), system

    def _check_causality(self, log):
        positive_seen = False
        for entry in log.entries:
            if entry.type == "detection" and entry.payload["label"] == 1:
                positive_seen = True
            if entry.type == "dose":
                self.assertTrue(positive_seen)

    def test_drop_and_rescue(self):
        log, system = self._run("drop-and-rescue")
        self.assertEqual(log.of_type("error"), [])
        doses = log.of_type("dose")
        self.assertEqual(len(doses), 1)
        self.assertEqual(doses[0].payload["volume_ml"], 0.2)
        dose_t = doses[0].t
        resolved = [e for e in log.of_type("phase") if e.payload["phase"] == "Resolved"]
        self.assertEqual([e.t for e in resolved], [dose_t + 900])
        # dosing follows the first sub-70 reading within one sampling interval
        first_low = [e.t for e in log.of_type("reading") if e.payload["glucose"] < 70][0]
        self.assertTrue(0 <= dose_t - first_low <= 300)
        kinds = [e.payload["kind"] for e in log.of_type("notification")]
        self.assertEqual(kinds.count("HypoAlert"), 1)
        self.assertEqual(kinds.count("Resolved"), 1)
        end = log.of_type("end")[0]
        self.assertEqual(end.payload["phase"], "Idle")
        self.assertAlmostEqual(end.payload["reservoir_ml"], 1.8)
        self._check_causality(log)

    def test_stubborn_hypo(self):
        log, _ = self._run("stubborn-hypo")
        self.assertEqual(log.of_type("error"), [])
        doses = log.of_type("dose")
        self.assertEqual(len(doses), 2)
        self.assertEqual(doses[1].t - doses[0].t, 900)
        self.assertEqual([d.payload["ordinal"] for d in doses], [1, 2])
        kinds = [e.payload["kind"] for e in log.of_type("notification")]
        self.assertIn("RepeatDose", kinds)
        self.assertEqual(log.of_type("end")[0].payload["phase"], "Idle")
        self._check_causality(log)

    def test_flat(self):
        log, system = self._run("flat")
        self.assertEqual(log.of_type("dose"), [])
        detections = log.of_type("detection")
        self.assertEqual(len(detections), 7200 // 300 + 1)
        self.assertTrue(all(e.payload["label"] == 0 for e in detections))
        self.assertEqual(log.entries[-1].type, "end")
        # a vitals and a detection block per tick
        self.assertEqual(len(system.service.ledger), 2 * len(detections))
        self.assertIsNone(system.service.verify_chain())

    def test_deterministic(self):
        first, _ = self._run("drop-and-rescue")
        second, _ = self._run("drop-and-rescue")
        self.assertEqual(first.to_jsonl(), second.to_jsonl())

    def test_conservation(self):
        log, system = self._run("stubborn-hypo")
        dispensed = sum(e.payload["volume_ml"] for e in log.of_type("dose"))
        self.assertAlmostEqual(2.0 - system.service.controller.pump(system.patient_id).reservoir_ml, dispensed)

    def test_event_log_written(self):
        log, _ = self._run("flat")
        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, "events.jsonl")
            log.write(path)
            with open(path) as fd:
                lines = fd.read().splitlines()
        self.assertEqual(len(lines), len(log))
        first = json.loads(lines[0])
        self.assertEqual(sorted(first), ["payload", "t", "type"])
        self.assertEqual(first["type"], "reading")

    def test_error_ends_run(self):
        script = get_preset("flat")
        system = fresh_system(script, None)
        log = run_scenario(script, system)
        self.assertEqual(log.entries[-1].type, "error")
        self.assertEqual(log.entries[-1].payload["error"], "ModelUnavailable")
        self.assertEqual(log.of_type("end"), [])
